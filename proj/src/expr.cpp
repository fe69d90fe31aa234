#include "quenchflow/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

namespace quenchflow {

struct Expr::Node {
  ExprKind kind;
  double value = 0;  // Constant
  int exponent = 0;  // Pow
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

std::string shortest_repr(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

Expr Expr::constant(double v) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Constant;
  n->value = v;
  return Expr(std::move(n));
}

Expr Expr::variable() {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Variable;
  return Expr(std::move(n));
}

Expr Expr::pi() {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Pi;
  return Expr(std::move(n));
}

namespace {

NodePtr make_unary(ExprKind k, NodePtr a) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = k;
  n->a = std::move(a);
  return n;
}

NodePtr make_binary(ExprKind k, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

}  // namespace

Expr Expr::neg(Expr e) { return Expr(make_unary(ExprKind::Neg, e.node_)); }
Expr Expr::add(Expr a, Expr b) {
  return Expr(make_binary(ExprKind::Add, a.node_, b.node_));
}
Expr Expr::sub(Expr a, Expr b) {
  return Expr(make_binary(ExprKind::Sub, a.node_, b.node_));
}
Expr Expr::mul(Expr a, Expr b) {
  return Expr(make_binary(ExprKind::Mul, a.node_, b.node_));
}
Expr Expr::div(Expr a, Expr b) {
  return Expr(make_binary(ExprKind::Div, a.node_, b.node_));
}
Expr Expr::pow(Expr base, int exponent) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Pow;
  n->exponent = exponent;
  n->a = base.node_;
  return Expr(std::move(n));
}
Expr Expr::sin(Expr e) { return Expr(make_unary(ExprKind::Sin, e.node_)); }
Expr Expr::cos(Expr e) { return Expr(make_unary(ExprKind::Cos, e.node_)); }
Expr Expr::exp(Expr e) { return Expr(make_unary(ExprKind::Exp, e.node_)); }

ExprKind Expr::kind() const { return node_->kind; }

double Expr::constant_value() const { return node_->value; }

int Expr::pow_exponent() const { return node_->exponent; }

int Expr::arity() const {
  switch (node_->kind) {
    case ExprKind::Constant:
    case ExprKind::Variable:
    case ExprKind::Pi:
      return 0;
    case ExprKind::Neg:
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Exp:
    case ExprKind::Pow:
      return 1;
    default:
      return 2;
  }
}

Expr Expr::operand(int i) const { return Expr(i == 0 ? node_->a : node_->b); }

// ---------------------------------------------------------------------------
// evaluation

namespace {

double eval_node(const Expr::Node& n, double x) {
  auto checked = [&](double v) -> double {
    if (!std::isfinite(v)) {
      throw EvalError(EvalError::Kind::NonFiniteResult, x,
                      "non-finite result at x=" + shortest_repr(x));
    }
    return v;
  };

  switch (n.kind) {
    case ExprKind::Constant:
      return checked(n.value);
    case ExprKind::Variable:
      return checked(x);
    case ExprKind::Pi:
      return std::numbers::pi;
    case ExprKind::Neg:
      return -eval_node(*n.a, x);
    case ExprKind::Add:
      return checked(eval_node(*n.a, x) + eval_node(*n.b, x));
    case ExprKind::Sub:
      return checked(eval_node(*n.a, x) - eval_node(*n.b, x));
    case ExprKind::Mul:
      return checked(eval_node(*n.a, x) * eval_node(*n.b, x));
    case ExprKind::Div: {
      const double num = eval_node(*n.a, x);
      const double den = eval_node(*n.b, x);
      if (den == 0.0) {
        throw EvalError(EvalError::Kind::DivisionByZero, x,
                        "division by zero at x=" + shortest_repr(x));
      }
      return checked(num / den);
    }
    case ExprKind::Pow: {
      const double base = eval_node(*n.a, x);
      if (base == 0.0 && n.exponent < 0) {
        throw EvalError(EvalError::Kind::DivisionByZero, x,
                        "zero raised to negative power at x=" +
                            shortest_repr(x));
      }
      return checked(std::pow(base, static_cast<double>(n.exponent)));
    }
    case ExprKind::Sin:
      return checked(std::sin(eval_node(*n.a, x)));
    case ExprKind::Cos:
      return checked(std::cos(eval_node(*n.a, x)));
    case ExprKind::Exp:
      return checked(std::exp(eval_node(*n.a, x)));
  }
  throw Error("corrupt expression node");
}

}  // namespace

double Expr::eval(double x) const { return eval_node(*node_, x); }

// ---------------------------------------------------------------------------
// differentiation

namespace {

bool is_const(const Expr& e, double v) {
  return e.kind() == ExprKind::Constant && e.constant_value() == v;
}

Expr fold_add(Expr a, Expr b) {
  if (is_const(a, 0)) return b;
  if (is_const(b, 0)) return a;
  if (a.kind() == ExprKind::Constant && b.kind() == ExprKind::Constant)
    return Expr::constant(a.constant_value() + b.constant_value());
  return Expr::add(std::move(a), std::move(b));
}

Expr fold_sub(Expr a, Expr b) {
  if (is_const(b, 0)) return a;
  if (a.kind() == ExprKind::Constant && b.kind() == ExprKind::Constant)
    return Expr::constant(a.constant_value() - b.constant_value());
  if (is_const(a, 0)) return Expr::neg(std::move(b));
  return Expr::sub(std::move(a), std::move(b));
}

Expr fold_mul(Expr a, Expr b) {
  if (is_const(a, 0) || is_const(b, 0)) return Expr::constant(0);
  if (is_const(a, 1)) return b;
  if (is_const(b, 1)) return a;
  if (a.kind() == ExprKind::Constant && b.kind() == ExprKind::Constant)
    return Expr::constant(a.constant_value() * b.constant_value());
  return Expr::mul(std::move(a), std::move(b));
}

Expr fold_neg(Expr a) {
  if (a.kind() == ExprKind::Constant) return Expr::constant(-a.constant_value());
  if (a.kind() == ExprKind::Neg) return a.operand(0);
  return Expr::neg(std::move(a));
}

Expr diff(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::Constant:
    case ExprKind::Pi:
      return Expr::constant(0);
    case ExprKind::Variable:
      return Expr::constant(1);
    case ExprKind::Neg:
      return fold_neg(diff(e.operand(0)));
    case ExprKind::Add:
      return fold_add(diff(e.operand(0)), diff(e.operand(1)));
    case ExprKind::Sub:
      return fold_sub(diff(e.operand(0)), diff(e.operand(1)));
    case ExprKind::Mul: {
      Expr a = e.operand(0), b = e.operand(1);
      return fold_add(fold_mul(diff(a), b), fold_mul(a, diff(b)));
    }
    case ExprKind::Div: {
      // (a/b)' = (a' b - a b') / b^2
      Expr a = e.operand(0), b = e.operand(1);
      Expr num = fold_sub(fold_mul(diff(a), b), fold_mul(a, diff(b)));
      if (is_const(num, 0)) num = Expr::constant(0);
      return Expr::div(std::move(num), Expr::pow(b, 2));
    }
    case ExprKind::Pow: {
      const int k = e.pow_exponent();
      if (k == 0) return Expr::constant(0);
      Expr base = e.operand(0);
      Expr factor = fold_mul(Expr::constant(k), Expr::pow(base, k - 1));
      return fold_mul(std::move(factor), diff(base));
    }
    case ExprKind::Sin:
      return fold_mul(Expr::cos(e.operand(0)), diff(e.operand(0)));
    case ExprKind::Cos:
      return fold_mul(fold_neg(Expr::sin(e.operand(0))), diff(e.operand(0)));
    case ExprKind::Exp:
      return fold_mul(Expr::exp(e.operand(0)), diff(e.operand(0)));
  }
  throw Error("corrupt expression node");
}

}  // namespace

Expr Expr::derivative() const { return diff(*this); }

// ---------------------------------------------------------------------------
// printing

namespace {

// precedence: + - (1) < * / (2) < unary - (3) < ^ (4) < atoms (5)
int precedence(ExprKind k) {
  switch (k) {
    case ExprKind::Add:
    case ExprKind::Sub:
      return 1;
    case ExprKind::Mul:
    case ExprKind::Div:
      return 2;
    case ExprKind::Neg:
      return 3;
    case ExprKind::Pow:
      return 4;
    default:
      return 5;
  }
}

void print(const Expr& e, int min_prec, std::string& out) {
  const int prec = precedence(e.kind());
  const bool parens = prec < min_prec;
  if (parens) out += '(';
  switch (e.kind()) {
    case ExprKind::Constant:
      out += shortest_repr(e.constant_value());
      break;
    case ExprKind::Variable:
      out += 'x';
      break;
    case ExprKind::Pi:
      out += "pi";
      break;
    case ExprKind::Neg:
      out += '-';
      print(e.operand(0), 3, out);
      break;
    case ExprKind::Add:
      print(e.operand(0), 1, out);
      out += " + ";
      print(e.operand(1), 2, out);
      break;
    case ExprKind::Sub:
      print(e.operand(0), 1, out);
      out += " - ";
      print(e.operand(1), 2, out);
      break;
    case ExprKind::Mul:
      print(e.operand(0), 2, out);
      out += '*';
      print(e.operand(1), 3, out);
      break;
    case ExprKind::Div:
      print(e.operand(0), 2, out);
      out += '/';
      print(e.operand(1), 3, out);
      break;
    case ExprKind::Pow:
      print(e.operand(0), 5, out);
      out += '^';
      out += std::to_string(e.pow_exponent());
      break;
    case ExprKind::Sin:
      out += "sin(";
      print(e.operand(0), 0, out);
      out += ')';
      break;
    case ExprKind::Cos:
      out += "cos(";
      print(e.operand(0), 0, out);
      out += ')';
      break;
    case ExprKind::Exp:
      out += "exp(";
      print(e.operand(0), 0, out);
      out += ')';
      break;
  }
  if (parens) out += ')';
}

}  // namespace

std::string Expr::to_string() const {
  std::string out;
  print(*this, 0, out);
  return out;
}

// ---------------------------------------------------------------------------
// parsing

namespace {

struct Parser {
  std::string_view src;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < src.size() &&
           (src[pos] == ' ' || src[pos] == '\t' || src[pos] == '\r' ||
            src[pos] == '\n'))
      ++pos;
  }

  bool at_end() {
    skip_ws();
    return pos >= src.size();
  }

  char peek() { return src[pos]; }

  [[noreturn]] void fail_end(const std::string& what) {
    throw ParseError(ParseError::Kind::UnexpectedEnd, pos,
                     "unexpected end of input: expected " + what +
                         " at offset " + std::to_string(pos));
  }

  [[noreturn]] void fail_token(std::size_t off, const std::string& what) {
    throw ParseError(ParseError::Kind::UnexpectedToken, off,
                     "unexpected token at offset " + std::to_string(off) +
                         ": expected " + what);
  }

  Expr parse_expression() {
    Expr lhs = parse_term();
    while (!at_end()) {
      const char c = peek();
      if (c != '+' && c != '-') break;
      ++pos;
      Expr rhs = parse_term();
      lhs = (c == '+') ? Expr::add(std::move(lhs), std::move(rhs))
                       : Expr::sub(std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    while (!at_end()) {
      const char c = peek();
      if (c != '*' && c != '/') break;
      ++pos;
      Expr rhs = parse_unary();
      lhs = (c == '*') ? Expr::mul(std::move(lhs), std::move(rhs))
                       : Expr::div(std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Expr parse_unary() {
    if (at_end()) fail_end("an operand");
    if (peek() == '-') {
      ++pos;
      return Expr::neg(parse_unary());
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    while (!at_end() && peek() == '^') {
      ++pos;
      base = Expr::pow(std::move(base), parse_int_exponent());
    }
    return base;
  }

  int parse_int_exponent() {
    if (at_end()) fail_end("an integer exponent");
    std::size_t start = pos;
    bool negative = false;
    if (peek() == '-') {
      negative = true;
      ++pos;
      skip_ws();
      if (pos >= src.size()) fail_end("an integer exponent");
    }
    if (!std::isdigit(static_cast<unsigned char>(peek())))
      fail_token(pos, "an integer exponent");
    int value = 0;
    auto [ptr, ec] =
        std::from_chars(src.data() + pos, src.data() + src.size(), value);
    if (ec != std::errc()) fail_token(start, "an integer exponent");
    pos = static_cast<std::size_t>(ptr - src.data());
    // a fractional part means the exponent was not an integer literal
    if (pos < src.size() && (src[pos] == '.' || src[pos] == 'e' ||
                             src[pos] == 'E'))
      fail_token(pos, "an integer exponent (fractional exponents are not "
                      "supported)");
    return negative ? -value : value;
  }

  Expr parse_primary() {
    if (at_end()) fail_end("an operand");
    const char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return Expr::constant(parse_number());
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return parse_identifier();
    if (c == '(') {
      ++pos;
      Expr inner = parse_expression();
      if (at_end()) fail_end("')'");
      if (peek() != ')') fail_token(pos, "')'");
      ++pos;
      return inner;
    }
    fail_token(pos, "a number, name, or '('");
  }

  double parse_number() {
    std::size_t start = pos;
    double value = 0;
    auto [ptr, ec] =
        std::from_chars(src.data() + pos, src.data() + src.size(), value);
    if (ec != std::errc()) fail_token(start, "a number");
    pos = static_cast<std::size_t>(ptr - src.data());
    return value;
  }

  Expr parse_identifier() {
    std::size_t start = pos;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) ||
            src[pos] == '_'))
      ++pos;
    const std::string_view name = src.substr(start, pos - start);
    if (name == "x") return Expr::variable();
    if (name == "pi") return Expr::pi();
    if (name == "sin" || name == "cos" || name == "exp") {
      skip_ws();
      if (pos >= src.size()) fail_end("'(' after function name");
      if (peek() != '(') fail_token(pos, "'(' after function name");
      ++pos;
      Expr arg = parse_expression();
      if (at_end()) fail_end("')'");
      if (peek() != ')') fail_token(pos, "')'");
      ++pos;
      if (name == "sin") return Expr::sin(std::move(arg));
      if (name == "cos") return Expr::cos(std::move(arg));
      return Expr::exp(std::move(arg));
    }
    throw ParseError(ParseError::Kind::UnknownIdentifier, start,
                     "unknown identifier '" + std::string(name) +
                         "' at offset " + std::to_string(start));
  }
};

}  // namespace

Expr parse_expr(std::string_view src) {
  Parser p{src};
  if (p.at_end())
    throw ParseError(ParseError::Kind::UnexpectedEnd, 0, "empty expression");
  Expr e = p.parse_expression();
  if (!p.at_end()) p.fail_token(p.pos, "end of input");
  return e;
}

// ---------------------------------------------------------------------------
// assumption validation

namespace {

double eval_at(const Expr& e, double x, const char* role) {
  try {
    return e.eval(x);
  } catch (const EvalError& err) {
    throw EvalError(err.kind, err.x,
                    std::string(err.what()) + " while evaluating " + role);
  }
}

}  // namespace

AssumptionReport validate_assumptions(const Expr& f, const Expr& g,
                                      int samples, double tol) {
  if (samples < 16) throw SpecError("validate_assumptions needs samples >= 16");
  AssumptionReport r;
  r.samples = samples;
  r.tol = tol;

  const Expr fp = f.derivative();
  const Expr gp = g.derivative();

  double worst = 0;
  auto record = [&](bool ok, double violation, double x, const char* check) {
    if (!ok && violation > worst) {
      worst = violation;
      r.worst_violation = violation;
      r.worst_location = x;
      r.worst_check = check;
    }
    return ok;
  };

  bool pos_f = true, pos_g = true, per_f = true, per_g = true;
  bool sym_f = true, sym_g = true, mon_f = true, mon_g = true;

  const double h = 1.0 / samples;
  for (int i = 0; i < samples; ++i) {
    const double x = i * h;
    const double fv = eval_at(f, x, "f");
    const double gv = eval_at(g, x, "g");

    pos_f &= record(fv > 0, -fv, x, "f > 0");
    pos_g &= record(gv > 0, -gv, x, "g > 0");

    const double dpf = std::abs(eval_at(f, x + 1.0, "f") - fv);
    const double dpg = std::abs(eval_at(g, x + 1.0, "g") - gv);
    per_f &= record(dpf <= tol, dpf, x, "f periodic");
    per_g &= record(dpg <= tol, dpg, x, "g periodic");

    const double dsf = std::abs(eval_at(f, 1.0 - x, "f") - fv);
    const double dsg = std::abs(eval_at(g, 1.0 - x, "g") - gv);
    sym_f &= record(dsf <= tol, dsf, x, "f symmetric about 1/2");
    sym_g &= record(dsg <= tol, dsg, x, "g symmetric about 1/2");

    if (x <= 0.5) {
      const double dfv = eval_at(fp, x, "f'");
      const double dgv = eval_at(gp, x, "g'");
      mon_f &= record(dfv >= -tol, -dfv, x, "f' >= 0 on [0,1/2]");
      mon_g &= record(dgv >= -tol, -dgv, x, "g' >= 0 on [0,1/2]");
    }
  }

  r.a1_positive_f = pos_f;
  r.a1_positive_g = pos_g;
  r.a1_periodic_f = per_f;
  r.a1_periodic_g = per_g;
  r.a2_symmetry_f = sym_f;
  r.a2_symmetry_g = sym_g;
  r.a2_monotone_f = mon_f;
  r.a2_monotone_g = mon_g;

  const double gap = eval_at(g, 0.5, "g") - eval_at(g, 0.0, "g");
  r.a2_strict_gap = record(gap > tol, tol - gap, 0.0, "g(0) < g(1/2)");

  return r;
}

std::string format_report(const AssumptionReport& r) {
  std::ostringstream os;
  auto line = [&](const char* name, bool ok) {
    os << "  " << name << ": " << (ok ? "pass" : "FAIL") << '\n';
  };
  os << "assumption report (" << r.samples << " samples, tol " << r.tol
     << ")\n";
  line("positivity of f", r.a1_positive_f);
  line("positivity of g", r.a1_positive_g);
  line("periodicity of f", r.a1_periodic_f);
  line("periodicity of g", r.a1_periodic_g);
  line("symmetry of f about 1/2", r.a2_symmetry_f);
  line("symmetry of g about 1/2", r.a2_symmetry_g);
  line("f nondecreasing on [0,1/2]", r.a2_monotone_f);
  line("g nondecreasing on [0,1/2]", r.a2_monotone_g);
  line("strict gap g(0) < g(1/2)", r.a2_strict_gap);
  os << "  A1: " << (r.a1_pass() ? "pass" : "FAIL")
     << "  A2: " << (r.a2_pass() ? "pass" : "FAIL") << '\n';
  if (!r.worst_check.empty())
    os << "  worst violation: " << r.worst_violation << " in '"
       << r.worst_check << "' at x=" << r.worst_location << '\n';
  return os.str();
}

}  // namespace quenchflow
