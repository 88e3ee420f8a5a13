#pragma once

#include <memory>
#include <set>
#include <string>

#include "bbpde/common.hpp"

namespace bbpde {

/// Syntax error with position information (1-based line/column).
struct ExprSyntaxError : Error {
    ExprSyntaxError(const std::string& what, int line, int column)
        : Error(what + " at line " + std::to_string(line) + ", column " +
                std::to_string(column)),
          line(line),
          column(column) {}
    int line, column;
};

/// Expression over variables t, x, z1, z2 with complex constants (imaginary
/// unit literal `i`), + - * /, powers with real-literal exponents, and the
/// functions log, exp, sqrt. Grammar:
///   expr   := ["+"|"-"] term (("+"|"-") term)*
///   term   := factor (("*"|"/") factor)*
///   factor := atom ("^" signed-real)?
///   atom   := number | "i" | "t" | "x" | "z1" | "z2" | "(" expr ")"
///           | fn "(" expr ")"
/// log takes a positive real argument (complex log is not exposed); integer
/// exponents are evaluated by repeated multiplication so x^2 stays exact.
class Expr {
  public:
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    Expr() = default;
    explicit Expr(NodePtr root) : root_(std::move(root)) {}

    static Expr parse(const std::string& text);

    Cplx eval(double t, Cplx x, Cplx z1 = 0.0, Cplx z2 = 0.0) const;
    std::string str() const;
    std::set<std::string> free_vars() const;
    bool valid() const { return bool(root_); }
    const NodePtr& root() const { return root_; }

    friend bool operator==(const Expr& a, const Expr& b);

  public:
    struct Node {
        enum class Kind { Number, Imag, Var, Add, Sub, Mul, Div, Neg, Pow, Fn };
        Kind kind;
        double number = 0.0;   // Number
        double exponent = 0.0; // Pow
        std::string name;      // Var / Fn
        NodePtr a, b;
    };

  private:
    NodePtr root_;
};

}  // namespace bbpde
