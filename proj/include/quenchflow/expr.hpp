#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "quenchflow/errors.hpp"

namespace quenchflow {

enum class ExprKind {
  Constant,  // numeric literal
  Variable,  // x
  Pi,        // named constant pi
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,  // integer exponent only
  Sin,
  Cos,
  Exp,
};

// Immutable arithmetic expression tree over one real variable x.
// Values share nodes and are cheap to copy; safe to evaluate concurrently.
class Expr {
 public:
  Expr() = default;  // empty; use factories or parse_expr

  static Expr constant(double v);
  static Expr variable();
  static Expr pi();
  static Expr neg(Expr e);
  static Expr add(Expr a, Expr b);
  static Expr sub(Expr a, Expr b);
  static Expr mul(Expr a, Expr b);
  static Expr div(Expr a, Expr b);
  static Expr pow(Expr base, int exponent);
  static Expr sin(Expr e);
  static Expr cos(Expr e);
  static Expr exp(Expr e);

  bool empty() const { return node_ == nullptr; }
  ExprKind kind() const;
  double constant_value() const;  // Constant nodes only
  int pow_exponent() const;       // Pow nodes only
  int arity() const;
  Expr operand(int i) const;  // i in [0, arity)

  // IEEE-double evaluation; throws EvalError instead of returning a
  // non-finite value.
  double eval(double x) const;

  // Exact symbolic derivative. The grammar is closed under d/dx, so this
  // never fails; only light constant folding is applied.
  Expr derivative() const;

  // Canonical text form; parse_expr(to_string(e)) prints back identically.
  std::string to_string() const;

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// Recursive-descent parser for the closed grammar
//   {+, -, *, /, ^int, sin, cos, exp, x, pi, literals}
// with precedence ^ > unary- > *,/ > +,- and left associativity.
Expr parse_expr(std::string_view src);

// Decisions for the standing assumptions on f and g: positivity and
// 1-periodicity for both, reflection symmetry about x = 1/2, nondecreasing
// on [0, 1/2], and the strict gap g(0) < g(1/2).
struct AssumptionReport {
  int samples = 0;
  double tol = 0;

  bool a1_positive_f = false;
  bool a1_positive_g = false;
  bool a1_periodic_f = false;
  bool a1_periodic_g = false;

  bool a2_symmetry_f = false;
  bool a2_symmetry_g = false;
  bool a2_monotone_f = false;
  bool a2_monotone_g = false;
  bool a2_strict_gap = false;

  double worst_violation = 0;  // magnitude of the largest failed check
  double worst_location = 0;   // x where it occurred
  std::string worst_check;     // which predicate failed there

  bool a1_pass() const {
    return a1_positive_f && a1_positive_g && a1_periodic_f && a1_periodic_g;
  }
  bool a2_pass() const {
    return a2_symmetry_f && a2_symmetry_g && a2_monotone_f && a2_monotone_g &&
           a2_strict_gap;
  }
};

// Evaluates every predicate on the sample grid x_i = i/samples. Periodicity
// and symmetry pass when the mismatch is <= tol; monotonicity allows
// derivative >= -tol on [0, 1/2]; the strict gap requires
// g(1/2) - g(0) > tol. Positivity is tolerance-free.
AssumptionReport validate_assumptions(const Expr& f, const Expr& g,
                                      int samples, double tol);

std::string format_report(const AssumptionReport& r);

}  // namespace quenchflow
