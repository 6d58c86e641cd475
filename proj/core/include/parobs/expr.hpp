#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "parobs/errors.hpp"

namespace parobs {

enum class UnaryOp { Neg, Exp, Log, Sqrt, Sin, Cos, Abs };
enum class BinaryOp { Add, Sub, Mul, Div, Pow, Max, Min };

namespace detail {
struct ExprNode;
}

/// An immutable expression in the variables x and t. Cheap to copy
/// (shared AST); evaluation is pure and thread-safe.
///
/// Grammar (parse_expression): numbers, x, t, + - * / ^ with the usual
/// precedence (^ right-associative and binding tighter than unary minus),
/// unary functions exp/log/sqrt/sin/cos/abs, binary functions max/min.
/// Whitespace is insignificant.
class Expr {
public:
    Expr() = default;

    static Expr constant(double value);
    static Expr var_x();
    static Expr var_t();
    static Expr unary(UnaryOp op, Expr operand);
    static Expr binary(BinaryOp op, Expr lhs, Expr rhs);

    bool empty() const { return node_ == nullptr; }

    /// Evaluate at (x,t). Throws EvalError on domain violations
    /// (log/sqrt of a negative number, division by zero).
    double operator()(double x, double t) const;

    /// Render with minimal parentheses; parse(str()) reproduces the tree.
    std::string str() const;

    /// Structural equality (same tree, bitwise-equal constants).
    bool same_tree(const Expr& other) const;

    friend Expr operator+(const Expr& a, const Expr& b) { return binary(BinaryOp::Add, a, b); }
    friend Expr operator-(const Expr& a, const Expr& b) { return binary(BinaryOp::Sub, a, b); }
    friend Expr operator*(const Expr& a, const Expr& b) { return binary(BinaryOp::Mul, a, b); }
    friend Expr operator/(const Expr& a, const Expr& b) { return binary(BinaryOp::Div, a, b); }
    friend Expr operator-(const Expr& a) { return unary(UnaryOp::Neg, a); }

private:
    explicit Expr(std::shared_ptr<const detail::ExprNode> node) : node_(std::move(node)) {}
    std::shared_ptr<const detail::ExprNode> node_;

    friend Expr parse_expression(std::string_view);
    friend Expr substitute(const Expr&, const Expr&, const Expr&);
};

/// Recursive-descent parse. Throws ParseError carrying the byte offset on
/// syntax errors, unknown identifiers, and arity mismatches.
Expr parse_expression(std::string_view src);

/// Replace every occurrence of x and t by the given expressions
/// (simultaneous substitution).
Expr substitute(const Expr& e, const Expr& x_repl, const Expr& t_repl);

} // namespace parobs
