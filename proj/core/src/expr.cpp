#include "parobs/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <utility>
#include <vector>

namespace parobs {

namespace detail {

struct ExprNode {
    enum class Kind { Constant, VarX, VarT, Unary, Binary } kind;
    double value = 0.0;
    UnaryOp uop{};
    BinaryOp bop{};
    std::shared_ptr<const ExprNode> lhs;
    std::shared_ptr<const ExprNode> rhs;
};

namespace {

double eval_node(const ExprNode& n, double x, double t) {
    switch (n.kind) {
        case ExprNode::Kind::Constant: return n.value;
        case ExprNode::Kind::VarX: return x;
        case ExprNode::Kind::VarT: return t;
        case ExprNode::Kind::Unary: {
            double v = eval_node(*n.lhs, x, t);
            switch (n.uop) {
                case UnaryOp::Neg: return -v;
                case UnaryOp::Exp: return std::exp(v);
                case UnaryOp::Log:
                    if (v <= 0.0) throw EvalError("log of non-positive value");
                    return std::log(v);
                case UnaryOp::Sqrt:
                    if (v < 0.0) throw EvalError("sqrt of negative value");
                    return std::sqrt(v);
                case UnaryOp::Sin: return std::sin(v);
                case UnaryOp::Cos: return std::cos(v);
                case UnaryOp::Abs: return std::abs(v);
            }
            break;
        }
        case ExprNode::Kind::Binary: {
            double a = eval_node(*n.lhs, x, t);
            double b = eval_node(*n.rhs, x, t);
            switch (n.bop) {
                case BinaryOp::Add: return a + b;
                case BinaryOp::Sub: return a - b;
                case BinaryOp::Mul: return a * b;
                case BinaryOp::Div:
                    if (b == 0.0) throw EvalError("division by zero");
                    return a / b;
                case BinaryOp::Pow: {
                    double r = std::pow(a, b);
                    if (!std::isfinite(r)) throw EvalError("non-finite power");
                    return r;
                }
                case BinaryOp::Max: return std::max(a, b);
                case BinaryOp::Min: return std::min(a, b);
            }
            break;
        }
    }
    throw EvalError("malformed expression node");
}

const char* unary_name(UnaryOp op) {
    switch (op) {
        case UnaryOp::Neg: return "-";
        case UnaryOp::Exp: return "exp";
        case UnaryOp::Log: return "log";
        case UnaryOp::Sqrt: return "sqrt";
        case UnaryOp::Sin: return "sin";
        case UnaryOp::Cos: return "cos";
        case UnaryOp::Abs: return "abs";
    }
    return "?";
}

// Precedence levels used by the printer: higher binds tighter.
int precedence(const ExprNode& n) {
    if (n.kind == ExprNode::Kind::Binary) {
        switch (n.bop) {
            case BinaryOp::Add:
            case BinaryOp::Sub: return 1;
            case BinaryOp::Mul:
            case BinaryOp::Div: return 2;
            case BinaryOp::Pow: return 4;
            case BinaryOp::Max:
            case BinaryOp::Min: return 5;
        }
    }
    if (n.kind == ExprNode::Kind::Unary)
        return n.uop == UnaryOp::Neg ? 3 : 5;
    return 6;
}

void print_node(const ExprNode& n, std::string& out);

void print_child(const ExprNode& child, int parent_prec, bool tight, std::string& out) {
    // `tight` asks for parentheses even at equal precedence (right operand
    // of - and /, left operand of ^, operand of unary minus).
    bool parens = precedence(child) < parent_prec || (tight && precedence(child) == parent_prec);
    if (parens) out += '(';
    print_node(child, out);
    if (parens) out += ')';
}

void print_node(const ExprNode& n, std::string& out) {
    switch (n.kind) {
        case ExprNode::Kind::Constant: {
            char buf[40];
            if (n.value < 0) {
                // negative literals print as negation so the parse round-trips
                std::snprintf(buf, sizeof(buf), "%.17g", -n.value);
                out += "(-";
                out += buf;
                out += ')';
            } else {
                std::snprintf(buf, sizeof(buf), "%.17g", n.value);
                out += buf;
            }
            return;
        }
        case ExprNode::Kind::VarX: out += 'x'; return;
        case ExprNode::Kind::VarT: out += 't'; return;
        case ExprNode::Kind::Unary:
            if (n.uop == UnaryOp::Neg) {
                out += '-';
                print_child(*n.lhs, 3, true, out);
            } else {
                out += unary_name(n.uop);
                out += '(';
                print_node(*n.lhs, out);
                out += ')';
            }
            return;
        case ExprNode::Kind::Binary:
            switch (n.bop) {
                case BinaryOp::Max:
                case BinaryOp::Min:
                    out += (n.bop == BinaryOp::Max) ? "max(" : "min(";
                    print_node(*n.lhs, out);
                    out += ", ";
                    print_node(*n.rhs, out);
                    out += ')';
                    return;
                case BinaryOp::Add:
                    print_child(*n.lhs, 1, false, out);
                    out += " + ";
                    print_child(*n.rhs, 1, false, out);
                    return;
                case BinaryOp::Sub:
                    print_child(*n.lhs, 1, false, out);
                    out += " - ";
                    print_child(*n.rhs, 1, true, out);
                    return;
                case BinaryOp::Mul:
                    print_child(*n.lhs, 2, false, out);
                    out += "*";
                    print_child(*n.rhs, 2, false, out);
                    return;
                case BinaryOp::Div:
                    print_child(*n.lhs, 2, false, out);
                    out += "/";
                    print_child(*n.rhs, 2, true, out);
                    return;
                case BinaryOp::Pow:
                    print_child(*n.lhs, 4, true, out);
                    out += "^";
                    print_child(*n.rhs, 4, false, out);
                    return;
            }
    }
}

bool same_node(const ExprNode& a, const ExprNode& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case ExprNode::Kind::Constant: return a.value == b.value;
        case ExprNode::Kind::VarX:
        case ExprNode::Kind::VarT: return true;
        case ExprNode::Kind::Unary: return a.uop == b.uop && same_node(*a.lhs, *b.lhs);
        case ExprNode::Kind::Binary:
            return a.bop == b.bop && same_node(*a.lhs, *b.lhs) && same_node(*a.rhs, *b.rhs);
    }
    return false;
}

} // namespace
} // namespace detail

using detail::ExprNode;

namespace {

std::shared_ptr<const ExprNode> make_node(ExprNode n) {
    return std::make_shared<const ExprNode>(std::move(n));
}

} // namespace

Expr Expr::constant(double value) {
    ExprNode n;
    n.kind = ExprNode::Kind::Constant;
    n.value = value;
    return Expr(make_node(std::move(n)));
}

Expr Expr::var_x() {
    ExprNode n;
    n.kind = ExprNode::Kind::VarX;
    return Expr(make_node(std::move(n)));
}

Expr Expr::var_t() {
    ExprNode n;
    n.kind = ExprNode::Kind::VarT;
    return Expr(make_node(std::move(n)));
}

Expr Expr::unary(UnaryOp op, Expr operand) {
    ExprNode n;
    n.kind = ExprNode::Kind::Unary;
    n.uop = op;
    n.lhs = std::move(operand.node_);
    return Expr(make_node(std::move(n)));
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
    ExprNode n;
    n.kind = ExprNode::Kind::Binary;
    n.bop = op;
    n.lhs = std::move(lhs.node_);
    n.rhs = std::move(rhs.node_);
    return Expr(make_node(std::move(n)));
}

double Expr::operator()(double x, double t) const {
    if (!node_) throw EvalError("empty expression");
    return detail::eval_node(*node_, x, t);
}

std::string Expr::str() const {
    if (!node_) return "";
    std::string out;
    detail::print_node(*node_, out);
    return out;
}

bool Expr::same_tree(const Expr& other) const {
    if (!node_ || !other.node_) return node_ == other.node_;
    return detail::same_node(*node_, *other.node_);
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Expr parse() {
        Expr e = expression();
        skip_ws();
        if (pos_ != src_.size())
            throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' ||
                                      src_[pos_] == '\n' || src_[pos_] == '\r'))
            ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    // expression := term (('+'|'-') term)*
    Expr expression() {
        Expr lhs = term();
        for (;;) {
            if (eat('+'))
                lhs = Expr::binary(BinaryOp::Add, lhs, term());
            else if (eat('-'))
                lhs = Expr::binary(BinaryOp::Sub, lhs, term());
            else
                return lhs;
        }
    }

    // term := unary (('*'|'/') unary)*
    Expr term() {
        Expr lhs = unary();
        for (;;) {
            if (eat('*'))
                lhs = Expr::binary(BinaryOp::Mul, lhs, unary());
            else if (eat('/'))
                lhs = Expr::binary(BinaryOp::Div, lhs, unary());
            else
                return lhs;
        }
    }

    // unary := '-' unary | power      (unary minus binds below ^)
    Expr unary() {
        if (eat('-')) return Expr::unary(UnaryOp::Neg, unary());
        return power();
    }

    // power := atom ('^' unary)?      (right-associative; -x^-2 works)
    Expr power() {
        Expr base = atom();
        if (eat('^')) return Expr::binary(BinaryOp::Pow, base, unary());
        return base;
    }

    Expr atom() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("unexpected end of expression", pos_);
        char c = src_[pos_];

        if (c == '(') {
            ++pos_;
            Expr e = expression();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        if ((c >= '0' && c <= '9') || c == '.') return number();
        if (is_ident_start(c)) return identifier();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    static bool is_ident_start(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    }
    static bool is_ident_char(char c) {
        return is_ident_start(c) || (c >= '0' && c <= '9');
    }

    Expr number() {
        const char* begin = src_.data() + pos_;
        const char* end = src_.data() + src_.size();
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc())
            throw ParseError("malformed number", pos_);
        pos_ = static_cast<std::size_t>(ptr - src_.data());
        return Expr::constant(value);
    }

    Expr identifier() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
        std::string_view name = src_.substr(start, pos_ - start);

        if (name == "x") return Expr::var_x();
        if (name == "t") return Expr::var_t();

        struct Fn1 { std::string_view name; UnaryOp op; };
        static constexpr Fn1 fn1[] = {
            {"exp", UnaryOp::Exp}, {"log", UnaryOp::Log},   {"sqrt", UnaryOp::Sqrt},
            {"sin", UnaryOp::Sin}, {"cos", UnaryOp::Cos},   {"abs", UnaryOp::Abs},
        };
        for (const auto& f : fn1) {
            if (name == f.name) {
                auto args = arguments(start, name);
                if (args.size() != 1)
                    throw ParseError(std::string(name) + " takes 1 argument, got " +
                                         std::to_string(args.size()),
                                     start);
                return Expr::unary(f.op, args[0]);
            }
        }
        if (name == "max" || name == "min") {
            auto args = arguments(start, name);
            if (args.size() != 2)
                throw ParseError(std::string(name) + " takes 2 arguments, got " +
                                     std::to_string(args.size()),
                                 start);
            return Expr::binary(name == "max" ? BinaryOp::Max : BinaryOp::Min, args[0], args[1]);
        }
        throw ParseError("unknown identifier '" + std::string(name) + "'", start);
    }

    std::vector<Expr> arguments(std::size_t at, std::string_view name) {
        if (!eat('('))
            throw ParseError("expected '(' after function " + std::string(name), at);
        std::vector<Expr> args;
        if (peek() != ')') {
            args.push_back(expression());
            while (eat(',')) args.push_back(expression());
        }
        if (!eat(')')) throw ParseError("expected ')' in call to " + std::string(name), pos_);
        return args;
    }
};

} // namespace

Expr parse_expression(std::string_view src) {
    std::size_t i = 0;
    while (i < src.size() && (src[i] == ' ' || src[i] == '\t' || src[i] == '\n' || src[i] == '\r'))
        ++i;
    if (i == src.size()) throw ParseError("empty expression", 0);
    Parser p(src);
    return p.parse();
}

namespace {

Expr substitute_node(const ExprNode& n, const Expr& x_repl, const Expr& t_repl) {
    switch (n.kind) {
        case ExprNode::Kind::Constant: return Expr::constant(n.value);
        case ExprNode::Kind::VarX: return x_repl;
        case ExprNode::Kind::VarT: return t_repl;
        case ExprNode::Kind::Unary:
            return Expr::unary(n.uop, substitute_node(*n.lhs, x_repl, t_repl));
        case ExprNode::Kind::Binary:
            return Expr::binary(n.bop, substitute_node(*n.lhs, x_repl, t_repl),
                                substitute_node(*n.rhs, x_repl, t_repl));
    }
    throw EvalError("malformed expression node");
}

} // namespace

Expr substitute(const Expr& e, const Expr& x_repl, const Expr& t_repl) {
    if (e.empty() || x_repl.empty() || t_repl.empty())
        throw EvalError("substitute requires non-empty expressions");
    return substitute_node(*e.node_, x_repl, t_repl);
}

} // namespace parobs
