#pragma once

#include <memory>
#include <string>

#include "mtlab/surface.hpp"

namespace mtlab {

// Tiny expression grammar for config-driven fields:
//   reals, + - * / ^, sin cos exp log, parentheses, constant pi,
//   variables x y (torus, period 1) or X Y Z (sphere ambient coordinates).
class Expression {
  public:
    static Expression parse(const std::string& text);  // throws ParseError

    double eval_torus(double x, double y) const;
    double eval_sphere(double X, double Y, double Z) const;

    // Nodal evaluation; throws EvalDomainError on any non-finite value.
    ScalarField evaluate(const SurfaceMesh& mesh) const;

    const std::string& text() const { return text_; }

    struct Node;
    ~Expression();
    Expression(Expression&&) noexcept;
    Expression& operator=(Expression&&) noexcept;
    Expression(const Expression&) = delete;
    Expression& operator=(const Expression&) = delete;

  private:
    Expression();
    std::unique_ptr<Node> root_;
    std::string text_;
};

}  // namespace mtlab
