#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <span>
#include <vector>

#include "finlab/errors.hpp"
#include "finlab/expr.hpp"

using namespace finlab;

namespace {

double ev(const char* text, std::vector<double> q, std::vector<double> u) {
    const int dim = static_cast<int>(q.size());
    const Expression e = Expression::parse(text, dim);
    return e.eval<double>(std::span<const double>(q), std::span<const double>(u));
}

}  // namespace

TEST_CASE("numeric evaluation matches direct computation") {
    CHECK(ev("1+2*3", {0.0}, {0.0}) == 7.0);
    CHECK(ev("(1+2)*3", {0.0}, {0.0}) == 9.0);
    CHECK(ev("2-3-4", {0.0}, {0.0}) == -5.0);
    CHECK(ev("16/4/2", {0.0}, {0.0}) == 2.0);
    CHECK(ev("q1*u1+q2*u2", {2.0, 3.0}, {5.0, 7.0}) == 31.0);
    CHECK(ev("0.5*(u1^2+u2^2)", {0.0, 0.0}, {3.0, 4.0}) == 12.5);
    CHECK(ev("sin(q1)", {1.2}, {0.0}) == std::sin(1.2));
    CHECK(ev("cos(q1)*exp(q1)", {0.7}, {0.0}) == std::cos(0.7) * std::exp(0.7));
    CHECK(ev("log(q1)", {2.5}, {0.0}) == std::log(2.5));
    CHECK(ev("sqrt(u1^2+u2^2)", {0.0, 0.0}, {3.0, 4.0}) == 5.0);
    CHECK(ev("q1^3", {-2.0}, {0.0}) == -8.0);
    CHECK(ev("q1^-2", {4.0}, {0.0}) == doctest::Approx(1.0 / 16.0));
    CHECK(ev("q1^0.5", {9.0}, {0.0}) == doctest::Approx(3.0));
    CHECK(ev("q1^q2", {2.0, 10.0}, {0.0, 0.0}) == doctest::Approx(1024.0));
}

TEST_CASE("precedence and associativity") {
    CHECK(ev("2^3^2", {0.0}, {0.0}) == 512.0);    // right-associative power
    CHECK(ev("-2^2", {0.0}, {0.0}) == -4.0);      // unary minus binds weaker than ^
    CHECK(ev("(-2)^2", {0.0}, {0.0}) == 4.0);
    CHECK(ev("2*-3", {0.0}, {0.0}) == -6.0);
    CHECK(ev("-q1^2", {3.0}, {0.0}) == -9.0);
    CHECK(ev("2--3", {0.0}, {0.0}) == 5.0);
}

TEST_CASE("printing round-trips structurally") {
    const char* cases[] = {
        "q1+2*u1",       "(q1+q2)*u1",     "-q1^2",          "q1^(q2+1)",
        "2^3^2",         "sin(q1*u2)",     "sqrt(u1^2+u2^2)", "q1-(q2-u1)",
        "1/(q1+q2)",     "-(q1+q2)",       "(u1+u2)^2",       "0.5*(u1^2+q1^2*u2^2)",
    };
    for (const char* text : cases) {
        CAPTURE(text);
        const Expression e = Expression::parse(text, 2);
        const Expression back = Expression::parse(e.str(), 2);
        CHECK(structurally_equal(e, back));
        std::vector<double> q = {1.3, -0.7}, u = {0.9, 1.1};
        CHECK(e.eval<double>(std::span<const double>(q), std::span<const double>(u)) ==
              back.eval<double>(std::span<const double>(q), std::span<const double>(u)));
    }
}

TEST_CASE("compact printed forms") {
    CHECK(Expression::parse("q1 + 2 * u1", 2).str() == "q1+2*u1");
    CHECK(Expression::parse("(q1+q2)*u1", 2).str() == "(q1+q2)*u1");
    CHECK(Expression::parse("-q1^2", 2).str() == "-q1^2");
}

TEST_CASE("builders agree with parsed text") {
    const Expression built = Expression::q(1, 2) * Expression::q(1, 2) +
                             Expression::number(2.0, 2) * Expression::u(2, 2);
    const Expression parsed = Expression::parse("q1*q1+2*u2", 2);
    CHECK(structurally_equal(built, parsed));
}

TEST_CASE("parse errors carry positions") {
    CHECK_THROWS_AS(Expression::parse("q1+", 2), ParseError);
    CHECK_THROWS_AS(Expression::parse("", 2), ParseError);
    CHECK_THROWS_AS(Expression::parse("1 2", 2), ParseError);
    CHECK_THROWS_AS(Expression::parse(")", 2), ParseError);
    CHECK_THROWS_AS(Expression::parse("sin q1", 2), ParseError);
    CHECK_THROWS_AS(Expression::parse("foo(1)", 2), ParseError);
    CHECK_THROWS_WITH_AS(Expression::parse("u3", 2), doctest::Contains("u3 out of range"),
                         ParseError);
    CHECK_THROWS_WITH_AS(Expression::parse("q9+1", 2), doctest::Contains("q9 out of range"),
                         ParseError);
    try {
        Expression::parse("q1+%", 2);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.position == 3);
        CHECK(std::string(e.what()).find("unexpected character '%'") != std::string::npos);
    }
}

TEST_CASE("evaluation errors name the offending subexpression") {
    CHECK_THROWS_WITH_AS(ev("1/(q1-1)", {1.0}, {0.0}), doctest::Contains("division by zero"),
                         EvalError);
    CHECK_THROWS_AS(ev("log(q1)", {-1.0}, {0.0}), EvalError);
    CHECK_THROWS_AS(ev("log(q1)", {0.0}, {0.0}), EvalError);
    CHECK_THROWS_AS(ev("sqrt(q1)", {-4.0}, {0.0}), EvalError);
    CHECK_THROWS_AS(ev("q1^0.5", {-4.0}, {0.0}), EvalError);
    CHECK_THROWS_AS(ev("q1^-1", {0.0}, {0.0}), EvalError);
    CHECK_THROWS_WITH_AS(ev("q1^q2", {-2.0, 2.0}, {0.0, 0.0}),
                         doctest::Contains("variable exponent needs a positive base"), EvalError);
    try {
        ev("1+2/(q1*u1)", {0.0}, {5.0});
        FAIL("expected an evaluation error");
    } catch (const EvalError& e) {
        CHECK(e.subexpression == "2/(q1*u1)");
    }
}

TEST_CASE("velocity usage and polynomial degree") {
    CHECK(Expression::parse("q1^2+q2", 2).uses_u() == false);
    CHECK(Expression::parse("q1*u2", 2).uses_u() == true);
    CHECK(Expression::parse("q1^2", 2).u_poly_degree() == 0);
    CHECK(Expression::parse("u1", 2).u_poly_degree() == 1);
    CHECK(Expression::parse("u1*u2^2", 2).u_poly_degree() == 3);
    CHECK(Expression::parse("(u1+u2)^2", 2).u_poly_degree() == 2);
    CHECK(Expression::parse("u1^2+q1*u2^4", 2).u_poly_degree() == 4);
    CHECK(Expression::parse("u1/q1", 2).u_poly_degree() == 1);
    CHECK(Expression::parse("q1/u1", 2).u_poly_degree() == -1);
    CHECK(Expression::parse("sin(u1)", 2).u_poly_degree() == -1);
    CHECK(Expression::parse("sqrt(u1^2+u2^2)", 2).u_poly_degree() == -1);
    CHECK(Expression::parse("2^u1", 2).u_poly_degree() == -1);
    CHECK(Expression::parse("2^q1", 2).u_poly_degree() == 0);
    CHECK(Expression::parse("u1^0", 2).u_poly_degree() == 0);
}

TEST_CASE("deep exponent towers do not overflow the degree computation") {
    // ((u1^9)^9)^... — the degree saturates instead of wrapping
    std::string text = "u1";
    for (int i = 0; i < 20; ++i) text = "(" + text + ")^9";
    const Expression e = Expression::parse(text, 1);
    CHECK(e.u_poly_degree() == -1);  // saturated past any representable int
}

TEST_CASE("whitespace is insignificant") {
    const Expression a = Expression::parse("  q1\t+\n u1 * 2 ", 1);
    const Expression b = Expression::parse("q1+u1*2", 1);
    CHECK(structurally_equal(a, b));
}
