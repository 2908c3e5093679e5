#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "finlab/errors.hpp"
#include "finlab/jet.hpp"

namespace finlab {

enum class Func { Sin, Cos, Exp, Log, Sqrt };

const char* func_name(Func f);

struct ExprNode;
using NodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    enum class Kind : unsigned char { Number, Var, Neg, Add, Sub, Mul, Div, Pow, Call };

    Kind kind = Kind::Number;
    double number = 0.0;    // Number
    bool var_is_u = false;  // Var
    int var_index = 0;      // Var, 1-based
    Func func = Func::Sin;  // Call
    NodePtr a, b;

    // constant-exponent cache for Pow, folded at construction
    bool exp_const = false;
    bool exp_int = false;
    double exp_value = 0.0;
    long long exp_int_value = 0;

    // span into the original source text (both zero for built trees)
    unsigned src_begin = 0, src_end = 0;
};

std::string print_node(const ExprNode& node);

// Immutable expression over coordinates q1..qn, u1..un. Subtrees are shared,
// so programmatically built tensors (powers, shifts) stay cheap.
class Expression {
public:
    Expression() = default;

    // grammar:  expr   := term (('+'|'-') term)*
    //           term   := factor (('*'|'/') factor)*
    //           factor := '-' factor | atom ('^' factor)?
    //           atom   := number | ident | '(' expr ')' | func '(' expr ')'
    // '^' binds tightest and associates right, then unary minus, then '*' '/',
    // then '+' '-'. idents are q<i>/u<i> with 1 <= i <= dim, funcs are
    // sin cos exp log sqrt.
    static Expression parse(std::string_view text, int dim);

    static Expression number(double v, int dim);
    static Expression q(int index, int dim);
    static Expression u(int index, int dim);
    static Expression call(Func f, const Expression& arg);
    static Expression pow_int(const Expression& base, long long k);

    friend Expression operator+(const Expression& x, const Expression& y);
    friend Expression operator-(const Expression& x, const Expression& y);
    friend Expression operator*(const Expression& x, const Expression& y);
    friend Expression operator-(const Expression& x);

    bool valid() const { return root_ != nullptr; }
    int dim() const { return dim_; }
    const ExprNode& root() const { return *root_; }
    std::string str() const { return root_ ? print_node(*root_) : std::string(); }

    bool uses_u() const;
    // polynomial degree in the u-coordinates, -1 when not polynomial in u
    int u_poly_degree() const;

    friend bool structurally_equal(const Expression& x, const Expression& y);

    // evaluate over any scalar tower (double, Jet); q and u must have dim entries
    template <class S>
    S eval(std::span<const S> qv, std::span<const S> uv) const;

private:
    Expression(NodePtr root, int dim) : root_(std::move(root)), dim_(dim) {}

    NodePtr root_;
    int dim_ = 0;
};

namespace detail {

template <class S>
S eval_node(const ExprNode& n, std::span<const S> qv, std::span<const S> uv) {
    using Kind = ExprNode::Kind;
    switch (n.kind) {
        case Kind::Number:
            return scalar_constant(n.number, qv[0]);
        case Kind::Var: {
            const std::size_t i = static_cast<std::size_t>(n.var_index - 1);
            return n.var_is_u ? uv[i] : qv[i];
        }
        case Kind::Neg:
            return -eval_node(*n.a, qv, uv);
        case Kind::Add:
            return eval_node(*n.a, qv, uv) + eval_node(*n.b, qv, uv);
        case Kind::Sub:
            return eval_node(*n.a, qv, uv) - eval_node(*n.b, qv, uv);
        case Kind::Mul:
            return eval_node(*n.a, qv, uv) * eval_node(*n.b, qv, uv);
        case Kind::Div: {
            S num = eval_node(*n.a, qv, uv);
            S den = eval_node(*n.b, qv, uv);
            if (value_of(den) == 0.0) throw EvalError("division by zero", print_node(n));
            return num / den;
        }
        case Kind::Pow: {
            S base = eval_node(*n.a, qv, uv);
            if (n.exp_const) {
                if (n.exp_int) {
                    if (n.exp_int_value < 0 && value_of(base) == 0.0)
                        throw EvalError("zero base raised to a negative power", print_node(n));
                    return powi(base, n.exp_int_value);
                }
                if (value_of(base) <= 0.0)
                    throw EvalError("non-integer power of a non-positive base", print_node(n));
                return pow_real(base, n.exp_value);
            }
            S expo = eval_node(*n.b, qv, uv);
            if (value_of(base) <= 0.0)
                throw EvalError("variable exponent needs a positive base", print_node(n));
            {
                using std::exp;
                using std::log;
                return exp(expo * log(base));
            }
        }
        case Kind::Call: {
            S arg = eval_node(*n.a, qv, uv);
            const double v = value_of(arg);
            try {
                using std::cos;
                using std::exp;
                using std::log;
                using std::sin;
                using std::sqrt;
                switch (n.func) {
                    case Func::Sin: return sin(arg);
                    case Func::Cos: return cos(arg);
                    case Func::Exp: return exp(arg);
                    case Func::Log:
                        if (v <= 0.0) throw DomainError("log of a non-positive argument");
                        return log(arg);
                    case Func::Sqrt:
                        if (v < 0.0) throw DomainError("sqrt of a negative argument");
                        return sqrt(arg);
                }
            } catch (const DomainError& e) {
                throw EvalError(e.what(), print_node(n));
            }
            throw EvalError("unknown function", print_node(n));
        }
    }
    throw EvalError("corrupt expression node", "");
}

}  // namespace detail

template <class S>
S Expression::eval(std::span<const S> qv, std::span<const S> uv) const {
    if (!root_) throw EvalError("empty expression", "");
    if (qv.size() != static_cast<std::size_t>(dim_) || uv.size() != static_cast<std::size_t>(dim_))
        throw std::invalid_argument("point dimension does not match expression dimension");
    return detail::eval_node(*root_, qv, uv);
}

}  // namespace finlab
