#include "finlab/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

namespace finlab {

const char* func_name(Func f) {
    switch (f) {
        case Func::Sin: return "sin";
        case Func::Cos: return "cos";
        case Func::Exp: return "exp";
        case Func::Log: return "log";
        case Func::Sqrt: return "sqrt";
    }
    return "?";
}

namespace {

bool lookup_func(std::string_view name, Func& out) {
    if (name == "sin") out = Func::Sin;
    else if (name == "cos") out = Func::Cos;
    else if (name == "exp") out = Func::Exp;
    else if (name == "log") out = Func::Log;
    else if (name == "sqrt") out = Func::Sqrt;
    else return false;
    return true;
}

bool node_is_constant(const ExprNode& n) {
    using Kind = ExprNode::Kind;
    switch (n.kind) {
        case Kind::Number: return true;
        case Kind::Var: return false;
        case Kind::Neg:
        case Kind::Call: return node_is_constant(*n.a);
        default: return node_is_constant(*n.a) && node_is_constant(*n.b);
    }
}

// plain IEEE arithmetic, only called on constant subtrees
double constant_value(const ExprNode& n) {
    using Kind = ExprNode::Kind;
    switch (n.kind) {
        case Kind::Number: return n.number;
        case Kind::Neg: return -constant_value(*n.a);
        case Kind::Add: return constant_value(*n.a) + constant_value(*n.b);
        case Kind::Sub: return constant_value(*n.a) - constant_value(*n.b);
        case Kind::Mul: return constant_value(*n.a) * constant_value(*n.b);
        case Kind::Div: return constant_value(*n.a) / constant_value(*n.b);
        case Kind::Pow: return std::pow(constant_value(*n.a), constant_value(*n.b));
        case Kind::Call: {
            const double v = constant_value(*n.a);
            switch (n.func) {
                case Func::Sin: return std::sin(v);
                case Func::Cos: return std::cos(v);
                case Func::Exp: return std::exp(v);
                case Func::Log: return std::log(v);
                case Func::Sqrt: return std::sqrt(v);
            }
            return v;
        }
        case Kind::Var: break;
    }
    return 0.0;
}

NodePtr make_binary(ExprNode::Kind kind, NodePtr a, NodePtr b) {
    auto n = std::make_shared<ExprNode>();
    n->kind = kind;
    n->a = std::move(a);
    n->b = std::move(b);
    if (kind == ExprNode::Kind::Pow && node_is_constant(*n->b)) {
        n->exp_const = true;
        n->exp_value = constant_value(*n->b);
        if (std::isfinite(n->exp_value) && n->exp_value == std::rint(n->exp_value) &&
            std::fabs(n->exp_value) < 9.007199254740992e15) {
            n->exp_int = true;
            n->exp_int_value = static_cast<long long>(n->exp_value);
        }
    }
    return n;
}

NodePtr make_unary(ExprNode::Kind kind, NodePtr a) {
    auto n = std::make_shared<ExprNode>();
    n->kind = kind;
    n->a = std::move(a);
    return n;
}

struct Parser {
    std::string_view src;
    int dim;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
        throw ParseError(msg, at);
    }

    void skip_ws() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }

    bool peek_is(char c) {
        skip_ws();
        return pos < src.size() && src[pos] == c;
    }

    void expect(char c, const char* what) {
        skip_ws();
        if (pos >= src.size() || src[pos] != c)
            fail(std::string("expected '") + c + "' " + what, pos);
        ++pos;
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            skip_ws();
            if (pos < src.size() && (src[pos] == '+' || src[pos] == '-')) {
                const char op = src[pos++];
                NodePtr rhs = parse_term();
                const auto end = static_cast<unsigned>(pos);
                const auto begin = lhs->src_begin;
                lhs = make_binary(op == '+' ? ExprNode::Kind::Add : ExprNode::Kind::Sub,
                                  std::move(lhs), std::move(rhs));
                const_cast<ExprNode&>(*lhs).src_begin = begin;
                const_cast<ExprNode&>(*lhs).src_end = end;
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_factor();
        for (;;) {
            skip_ws();
            if (pos < src.size() && (src[pos] == '*' || src[pos] == '/')) {
                const char op = src[pos++];
                NodePtr rhs = parse_factor();
                const auto end = static_cast<unsigned>(pos);
                const auto begin = lhs->src_begin;
                lhs = make_binary(op == '*' ? ExprNode::Kind::Mul : ExprNode::Kind::Div,
                                  std::move(lhs), std::move(rhs));
                const_cast<ExprNode&>(*lhs).src_begin = begin;
                const_cast<ExprNode&>(*lhs).src_end = end;
            } else {
                return lhs;
            }
        }
    }

    // '^' binds tighter than unary minus: -q1^2 is -(q1^2)
    NodePtr parse_factor() {
        skip_ws();
        const auto begin = static_cast<unsigned>(pos);
        if (pos < src.size() && src[pos] == '-') {
            ++pos;
            NodePtr inner = parse_factor();
            NodePtr n = make_unary(ExprNode::Kind::Neg, std::move(inner));
            const_cast<ExprNode&>(*n).src_begin = begin;
            const_cast<ExprNode&>(*n).src_end = static_cast<unsigned>(pos);
            return n;
        }
        NodePtr base = parse_atom();
        skip_ws();
        if (pos < src.size() && src[pos] == '^') {
            ++pos;
            NodePtr expo = parse_factor();  // right-associative
            NodePtr n = make_binary(ExprNode::Kind::Pow, std::move(base), std::move(expo));
            const_cast<ExprNode&>(*n).src_begin = begin;
            const_cast<ExprNode&>(*n).src_end = static_cast<unsigned>(pos);
            return n;
        }
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos >= src.size()) fail("unexpected end of input", pos);
        const auto begin = static_cast<unsigned>(pos);
        const char c = src[pos];
        if (c == '(') {
            ++pos;
            NodePtr inner = parse_expr();
            expect(')', "to close '('");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            double value = 0.0;
            const char* first = src.data() + pos;
            const char* last = src.data() + src.size();
            auto res = std::from_chars(first, last, value);
            if (res.ec != std::errc() || res.ptr == first)
                fail("malformed number", pos);
            pos = static_cast<std::size_t>(res.ptr - src.data());
            auto n = std::make_shared<ExprNode>();
            n->kind = ExprNode::Kind::Number;
            n->number = value;
            n->src_begin = begin;
            n->src_end = static_cast<unsigned>(pos);
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos;
            while (end < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[end])) || src[end] == '_'))
                ++end;
            const std::string_view name = src.substr(pos, end - pos);
            pos = end;

            // q<i> / u<i> coordinate names
            if ((name[0] == 'q' || name[0] == 'u') && name.size() > 1 &&
                std::all_of(name.begin() + 1, name.end(),
                            [](char d) { return std::isdigit(static_cast<unsigned char>(d)); })) {
                int index = 0;
                auto res = std::from_chars(name.data() + 1, name.data() + name.size(), index);
                if (res.ec != std::errc() || index < 1 || index > dim)
                    fail(std::string(name) + " out of range for dimension " + std::to_string(dim),
                         begin);
                auto n = std::make_shared<ExprNode>();
                n->kind = ExprNode::Kind::Var;
                n->var_is_u = name[0] == 'u';
                n->var_index = index;
                n->src_begin = begin;
                n->src_end = static_cast<unsigned>(pos);
                return n;
            }

            Func f;
            if (!lookup_func(name, f))
                fail("unknown identifier '" + std::string(name) + "'", begin);
            expect('(', (std::string("after function name '") + std::string(name) + "'").c_str());
            NodePtr arg = parse_expr();
            expect(')', "to close function argument");
            auto n = std::make_shared<ExprNode>();
            n->kind = ExprNode::Kind::Call;
            n->func = f;
            n->a = std::move(arg);
            n->src_begin = begin;
            n->src_end = static_cast<unsigned>(pos);
            return n;
        }
        fail(std::string("unexpected character '") + c + "'", pos);
    }
};

// printing precedence: '+','-' 1; '*','/' 2; unary minus 3; '^' 4; atoms 5
int node_prec(const ExprNode& n) {
    using Kind = ExprNode::Kind;
    switch (n.kind) {
        case Kind::Add:
        case Kind::Sub: return 1;
        case Kind::Mul:
        case Kind::Div: return 2;
        case Kind::Neg: return 3;
        case Kind::Pow: return 4;
        case Kind::Number:
            // a negative literal prints with a leading '-', so treat it like one
            return std::signbit(n.number) ? 3 : 5;
        default: return 5;
    }
}

std::string number_repr(double v) {
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

void print_rec(const ExprNode& n, std::string& out) {
    using Kind = ExprNode::Kind;
    auto child = [&out](const ExprNode& c, bool parens) {
        if (parens) out += '(';
        print_rec(c, out);
        if (parens) out += ')';
    };
    const int p = node_prec(n);
    switch (n.kind) {
        case Kind::Number:
            out += number_repr(n.number);
            return;
        case Kind::Var:
            out += n.var_is_u ? 'u' : 'q';
            out += std::to_string(n.var_index);
            return;
        case Kind::Neg:
            out += '-';
            child(*n.a, node_prec(*n.a) < p);
            return;
        case Kind::Add:
        case Kind::Sub:
        case Kind::Mul:
        case Kind::Div:
            child(*n.a, node_prec(*n.a) < p);
            out += n.kind == Kind::Add ? '+'
                 : n.kind == Kind::Sub ? '-'
                 : n.kind == Kind::Mul ? '*'
                                       : '/';
            // parenthesise same-precedence right children: the operators are
            // left-associative, so q1-(q2-q3) must keep its parentheses
            child(*n.b, node_prec(*n.b) <= p);
            return;
        case Kind::Pow:
            child(*n.a, node_prec(*n.a) <= p);
            out += '^';
            child(*n.b, node_prec(*n.b) < p);  // right-associative
            return;
        case Kind::Call:
            out += func_name(n.func);
            out += '(';
            print_rec(*n.a, out);
            out += ')';
            return;
    }
}

bool nodes_equal(const ExprNode& x, const ExprNode& y) {
    using Kind = ExprNode::Kind;
    if (x.kind != y.kind) return false;
    switch (x.kind) {
        case Kind::Number: return x.number == y.number;
        case Kind::Var: return x.var_is_u == y.var_is_u && x.var_index == y.var_index;
        case Kind::Neg: return nodes_equal(*x.a, *y.a);
        case Kind::Call: return x.func == y.func && nodes_equal(*x.a, *y.a);
        default: return nodes_equal(*x.a, *y.a) && nodes_equal(*x.b, *y.b);
    }
}

bool node_uses_u(const ExprNode& n) {
    using Kind = ExprNode::Kind;
    switch (n.kind) {
        case Kind::Number: return false;
        case Kind::Var: return n.var_is_u;
        case Kind::Neg:
        case Kind::Call: return node_uses_u(*n.a);
        default: return node_uses_u(*n.a) || node_uses_u(*n.b);
    }
}

// degree in the u-coordinates jointly, -1 when not polynomial in u
long long node_u_degree(const ExprNode& n) {
    using Kind = ExprNode::Kind;
    switch (n.kind) {
        case Kind::Number: return 0;
        case Kind::Var: return n.var_is_u ? 1 : 0;
        case Kind::Neg: return node_u_degree(*n.a);
        case Kind::Add:
        case Kind::Sub: {
            const long long a = node_u_degree(*n.a), b = node_u_degree(*n.b);
            return (a < 0 || b < 0) ? -1 : std::max(a, b);
        }
        case Kind::Mul: {
            const long long a = node_u_degree(*n.a), b = node_u_degree(*n.b);
            constexpr long long cap = 1LL << 40;
            return (a < 0 || b < 0) ? -1 : std::min(cap, a + b);
        }
        case Kind::Div: {
            const long long a = node_u_degree(*n.a), b = node_u_degree(*n.b);
            return (a < 0 || b != 0) ? -1 : a;
        }
        case Kind::Pow: {
            const long long a = node_u_degree(*n.a);
            if (a == 0 && !node_uses_u(*n.b)) return 0;
            if (a > 0 && n.exp_int && n.exp_int_value >= 0) {
                constexpr long long cap = 1LL << 40;
                if (n.exp_int_value == 0) return 0;
                if (a > cap / n.exp_int_value) return cap;
                return a * n.exp_int_value;
            }
            return -1;
        }
        case Kind::Call:
            return node_u_degree(*n.a) == 0 ? 0 : -1;
    }
    return -1;
}

}  // namespace

std::string print_node(const ExprNode& node) {
    std::string out;
    print_rec(node, out);
    return out;
}

Expression Expression::parse(std::string_view text, int dim) {
    if (dim < 1) throw ParseError("dimension must be at least 1", 0);
    Parser p{text, dim};
    NodePtr root = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size())
        p.fail(std::string("unexpected character '") + text[p.pos] + "' after expression", p.pos);
    return Expression(std::move(root), dim);
}

Expression Expression::number(double v, int dim) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Number;
    n->number = v;
    return Expression(std::move(n), dim);
}

Expression Expression::q(int index, int dim) {
    if (index < 1 || index > dim)
        throw ParseError("q" + std::to_string(index) + " out of range for dimension " +
                             std::to_string(dim),
                         0);
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Var;
    n->var_is_u = false;
    n->var_index = index;
    return Expression(std::move(n), dim);
}

Expression Expression::u(int index, int dim) {
    if (index < 1 || index > dim)
        throw ParseError("u" + std::to_string(index) + " out of range for dimension " +
                             std::to_string(dim),
                         0);
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Var;
    n->var_is_u = true;
    n->var_index = index;
    return Expression(std::move(n), dim);
}

Expression Expression::call(Func f, const Expression& arg) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Call;
    n->func = f;
    n->a = arg.root_;
    return Expression(std::move(n), arg.dim_);
}

Expression Expression::pow_int(const Expression& base, long long k) {
    auto e = std::make_shared<ExprNode>();
    e->kind = ExprNode::Kind::Number;
    e->number = static_cast<double>(k);
    return Expression(make_binary(ExprNode::Kind::Pow, base.root_, std::move(e)), base.dim_);
}

Expression operator+(const Expression& x, const Expression& y) {
    return Expression(make_binary(ExprNode::Kind::Add, x.root_, y.root_),
                      x.dim_ ? x.dim_ : y.dim_);
}

Expression operator-(const Expression& x, const Expression& y) {
    return Expression(make_binary(ExprNode::Kind::Sub, x.root_, y.root_),
                      x.dim_ ? x.dim_ : y.dim_);
}

Expression operator*(const Expression& x, const Expression& y) {
    return Expression(make_binary(ExprNode::Kind::Mul, x.root_, y.root_),
                      x.dim_ ? x.dim_ : y.dim_);
}

Expression operator-(const Expression& x) {
    return Expression(make_unary(ExprNode::Kind::Neg, x.root_), x.dim_);
}

bool Expression::uses_u() const { return root_ && node_uses_u(*root_); }

int Expression::u_poly_degree() const {
    if (!root_) return 0;
    const long long d = node_u_degree(*root_);
    if (d < 0) return -1;
    return d > std::numeric_limits<int>::max() ? -1 : static_cast<int>(d);
}

bool structurally_equal(const Expression& x, const Expression& y) {
    if (!x.root_ || !y.root_) return x.root_ == y.root_;
    return nodes_equal(*x.root_, *y.root_);
}

}  // namespace finlab
