#pragma once

#include "masterop/function.hpp"
#include "masterop/kernel.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace masterop {

/// Expression language for u(x,t).
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' ['-'] number)?
///   primary := number | x1 | x2 | x3 | t | '(' expr ')' | name '(' args ')'
///
/// Functions of one expression: exp cos sin abs pos sqrt bump.
/// Families with literal arguments: phi(j,alpha,beta) psi(j,alpha,beta) w(j,gamma).
struct Expr {
    enum class Kind { Literal, Variable, Unary, Binary, Family };
    enum class Op { Neg, Exp, Cos, Sin, Abs, Pos, Sqrt, Bump, Add, Sub, Mul, Div, Pow };

    Kind kind = Kind::Literal;
    double value = 0.0;
    /// 0..2 for x1..x3, 3 for t.
    int variable = 0;
    Op op = Op::Add;
    std::string family;
    std::vector<double> args;
    std::vector<std::shared_ptr<const Expr>> children;
    /// 1-based source column of the node's first token.
    int column = 1;
};

using ExprPtr = std::shared_ptr<const Expr>;

/// Throws ParseError with a 1-based column.
ExprPtr parse(const std::string& text);

/// Fully parenthesized text with literals in %.17g; parse(print(e)) is structurally equal to e.
std::string print(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);

/// Throws ParseError when a variable index exceeds dim.
void validate(const Expr& e, int dim);

struct HandleOptions {
    int dim = 1;
    double s = 0.5;
    Normalization normalization = Normalization::Normalized;
    std::optional<SupportBox> support;
    std::optional<double> feature_length;
    std::optional<double> feature_time;
};

/// Compiles e into a FunctionHandle. Support is inferred for a bare family term;
/// pos() marks the function C^1-limited in t with a time break where an affine argument vanishes.
FunctionHandle to_handle(const ExprPtr& e, const HandleOptions& opt = {});

} // namespace masterop
