#include "vie/autodiff.hpp"

#include <algorithm>
#include <cmath>

namespace vie::ad {

const char* op_name(Op op) noexcept {
  switch (op) {
    case Op::constant: return "constant";
    case Op::variable: return "variable";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::div: return "div";
    case Op::neg: return "neg";
    case Op::tanh: return "tanh";
    case Op::exp: return "exp";
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::powi: return "powi";
  }
  return "?";
}

NonFiniteError::NonFiniteError(std::int32_t node, Op op)
    : std::runtime_error("non-finite value at node " + std::to_string(node) + " (" +
                         op_name(op) + ")"),
      node_(node),
      op_(op) {}

double Expr::value() const {
  if (!valid()) throw std::logic_error("Expr::value on an empty expression");
  return graph_->value(*this);
}

namespace {

double int_power(double x, int k) {
  double r = 1.0;
  const bool invert = k < 0;
  for (int n = invert ? -k : k; n > 0; --n) r *= x;
  return invert ? 1.0 / r : r;
}

}  // namespace

Expr Graph::push(Op op, std::int32_t a, std::int32_t b, std::int32_t aux, double v) {
  const auto id = static_cast<std::int32_t>(ops_.size());
  if (!std::isfinite(v)) throw NonFiniteError(id, op);
  ops_.push_back(op);
  lhs_.push_back(a);
  rhs_.push_back(b);
  aux_.push_back(aux);
  values_.push_back(v);
  return Expr(this, id);
}

void Graph::check_owner(Expr e) const {
  if (e.graph_ != this || e.id_ < 0 || static_cast<std::size_t>(e.id_) >= ops_.size()) {
    throw std::logic_error("expression does not belong to this graph");
  }
}

void Graph::reserve(std::size_t n) {
  ops_.reserve(n);
  lhs_.reserve(n);
  rhs_.reserve(n);
  aux_.reserve(n);
  values_.reserve(n);
}

void Graph::clear() {
  ops_.clear();
  lhs_.clear();
  rhs_.clear();
  aux_.clear();
  values_.clear();
}

Expr Graph::constant(double v) { return push(Op::constant, -1, -1, 0, v); }

Expr Graph::variable(std::size_t slot, double v) {
  return push(Op::variable, -1, -1, static_cast<std::int32_t>(slot), v);
}

Expr Graph::add(Expr a, Expr b) {
  check_owner(a);
  check_owner(b);
  return push(Op::add, a.id_, b.id_, 0, values_[a.id_] + values_[b.id_]);
}

Expr Graph::sub(Expr a, Expr b) {
  check_owner(a);
  check_owner(b);
  return push(Op::sub, a.id_, b.id_, 0, values_[a.id_] - values_[b.id_]);
}

Expr Graph::mul(Expr a, Expr b) {
  check_owner(a);
  check_owner(b);
  return push(Op::mul, a.id_, b.id_, 0, values_[a.id_] * values_[b.id_]);
}

Expr Graph::div(Expr a, Expr b) {
  check_owner(a);
  check_owner(b);
  return push(Op::div, a.id_, b.id_, 0, values_[a.id_] / values_[b.id_]);
}

Expr Graph::neg(Expr a) {
  check_owner(a);
  return push(Op::neg, a.id_, -1, 0, -values_[a.id_]);
}

Expr Graph::tanh(Expr a) {
  check_owner(a);
  return push(Op::tanh, a.id_, -1, 0, std::tanh(values_[a.id_]));
}

Expr Graph::exp(Expr a) {
  check_owner(a);
  return push(Op::exp, a.id_, -1, 0, std::exp(values_[a.id_]));
}

Expr Graph::sin(Expr a) {
  check_owner(a);
  return push(Op::sin, a.id_, -1, 0, std::sin(values_[a.id_]));
}

Expr Graph::cos(Expr a) {
  check_owner(a);
  return push(Op::cos, a.id_, -1, 0, std::cos(values_[a.id_]));
}

Expr Graph::powi(Expr a, int k) {
  check_owner(a);
  return push(Op::powi, a.id_, -1, k, int_power(values_[a.id_], k));
}

double Graph::value(Expr e) const {
  check_owner(e);
  return values_[static_cast<std::size_t>(e.id_)];
}

double Graph::compute(std::size_t i) const {
  const auto a = lhs_[i];
  const auto b = rhs_[i];
  switch (ops_[i]) {
    case Op::constant:
    case Op::variable:
      return values_[i];
    case Op::add: return values_[a] + values_[b];
    case Op::sub: return values_[a] - values_[b];
    case Op::mul: return values_[a] * values_[b];
    case Op::div: return values_[a] / values_[b];
    case Op::neg: return -values_[a];
    case Op::tanh: return std::tanh(values_[a]);
    case Op::exp: return std::exp(values_[a]);
    case Op::sin: return std::sin(values_[a]);
    case Op::cos: return std::cos(values_[a]);
    case Op::powi: return int_power(values_[a], aux_[i]);
  }
  return values_[i];
}

double Graph::evaluate(Expr e, std::span<const double> bindings) {
  check_owner(e);
  const auto last = static_cast<std::size_t>(e.id_);
  for (std::size_t i = 0; i <= last; ++i) {
    if (ops_[i] == Op::variable) {
      const auto slot = static_cast<std::size_t>(aux_[i]);
      if (slot >= bindings.size()) {
        throw std::invalid_argument("evaluate: variable slot " + std::to_string(slot) +
                                    " is unbound");
      }
      values_[i] = bindings[slot];
    } else {
      values_[i] = compute(i);
    }
    if (!std::isfinite(values_[i])) {
      throw NonFiniteError(static_cast<std::int32_t>(i), ops_[i]);
    }
  }
  return values_[last];
}

std::vector<double> Graph::gradient(Expr root, std::size_t n_slots) const {
  std::vector<double> grad(n_slots, 0.0);
  accumulate_gradient(root, 1.0, grad);
  return grad;
}

void Graph::accumulate_gradient(Expr root, double seed, std::span<double> grad) const {
  check_owner(root);
  const auto last = static_cast<std::size_t>(root.id_);
  adjoint_.assign(last + 1, 0.0);
  adjoint_[last] = seed;
  double* adj = adjoint_.data();
  const double* val = values_.data();
  for (std::size_t n = last + 1; n-- > 0;) {
    const double g = adj[n];
    if (g == 0.0) continue;
    const auto a = lhs_[n];
    const auto b = rhs_[n];
    switch (ops_[n]) {
      case Op::constant:
        break;
      case Op::variable: {
        const auto slot = static_cast<std::size_t>(aux_[n]);
        if (slot < grad.size()) grad[slot] += g;
        break;
      }
      case Op::add:
        adj[a] += g;
        adj[b] += g;
        break;
      case Op::sub:
        adj[a] += g;
        adj[b] -= g;
        break;
      case Op::mul:
        adj[a] += g * val[b];
        adj[b] += g * val[a];
        break;
      case Op::div:
        adj[a] += g / val[b];
        adj[b] -= g * val[n] / val[b];
        break;
      case Op::neg:
        adj[a] -= g;
        break;
      case Op::tanh:
        adj[a] += g * (1.0 - val[n] * val[n]);
        break;
      case Op::exp:
        adj[a] += g * val[n];
        break;
      case Op::sin:
        adj[a] += g * std::cos(val[a]);
        break;
      case Op::cos:
        adj[a] -= g * std::sin(val[a]);
        break;
      case Op::powi: {
        const int k = aux_[n];
        adj[a] += g * k * int_power(val[a], k - 1);
        break;
      }
    }
  }
}

std::int32_t Graph::materialize(std::int32_t a) {
  if (a == kZero) return constant(0.0).id_;
  if (a == kOne) return constant(1.0).id_;
  return a;
}

std::int32_t Graph::t_add(std::int32_t a, std::int32_t b) {
  if (a == kZero) return b;
  if (b == kZero) return a;
  return add(Expr(this, materialize(a)), Expr(this, materialize(b))).id_;
}

std::int32_t Graph::t_sub(std::int32_t a, std::int32_t b) {
  if (b == kZero) return a;
  if (a == kZero) return t_neg(b);
  return sub(Expr(this, materialize(a)), Expr(this, materialize(b))).id_;
}

std::int32_t Graph::t_mul(std::int32_t a, std::int32_t b) {
  if (a == kZero || b == kZero) return kZero;
  if (a == kOne) return b;
  if (b == kOne) return a;
  return mul(Expr(this, a), Expr(this, b)).id_;
}

std::int32_t Graph::t_neg(std::int32_t a) {
  if (a == kZero) return kZero;
  if (a == kOne) return constant(-1.0).id_;
  return neg(Expr(this, a)).id_;
}

std::int32_t Graph::differentiate_once(std::int32_t output, std::int32_t input) {
  if (output < input) return kZero;
  const auto base = static_cast<std::size_t>(input);
  const std::size_t span = static_cast<std::size_t>(output - input) + 1;

  // bit 0: reachable from output, bit 1: depends on input
  scratch_flags_.assign(span, 0);
  scratch_flags_[span - 1] |= 1;
  for (std::size_t k = span; k-- > 0;) {
    if (!(scratch_flags_[k] & 1)) continue;
    const std::size_t i = base + k;
    for (const auto operand : {lhs_[i], rhs_[i]}) {
      if (operand >= input) scratch_flags_[static_cast<std::size_t>(operand) - base] |= 1;
    }
  }
  scratch_flags_[0] |= 2;
  for (std::size_t k = 1; k < span; ++k) {
    const std::size_t i = base + k;
    for (const auto operand : {lhs_[i], rhs_[i]}) {
      if (operand >= input && (scratch_flags_[static_cast<std::size_t>(operand) - base] & 2)) {
        scratch_flags_[k] |= 2;
      }
    }
  }

  scratch_tangent_.assign(span, kZero);
  scratch_tangent_[0] = kOne;
  auto tangent = [&](std::int32_t operand) {
    if (operand < input) return kZero;
    return scratch_tangent_[static_cast<std::size_t>(operand) - base];
  };

  for (std::size_t k = 1; k < span; ++k) {
    if (scratch_flags_[k] != 3) continue;
    const auto i = static_cast<std::int32_t>(base + k);
    const auto a = lhs_[static_cast<std::size_t>(i)];
    const auto b = rhs_[static_cast<std::size_t>(i)];
    std::int32_t d = kZero;
    switch (ops_[static_cast<std::size_t>(i)]) {
      case Op::constant:
      case Op::variable:
        break;
      case Op::add:
        d = t_add(tangent(a), tangent(b));
        break;
      case Op::sub:
        d = t_sub(tangent(a), tangent(b));
        break;
      case Op::mul:
        d = t_add(t_mul(tangent(a), b), t_mul(a, tangent(b)));
        break;
      case Op::div: {
        // (a/b)' = (a' - (a/b) b') / b
        const auto num = t_sub(tangent(a), t_mul(i, tangent(b)));
        if (num != kZero) d = div(Expr(this, materialize(num)), Expr(this, b)).id_;
        break;
      }
      case Op::neg:
        d = t_neg(tangent(a));
        break;
      case Op::tanh: {
        const Expr y(this, i);
        const auto slope = sub(constant(1.0), mul(y, y)).id_;
        d = t_mul(slope, tangent(a));
        break;
      }
      case Op::exp:
        d = t_mul(i, tangent(a));
        break;
      case Op::sin:
        d = t_mul(cos(Expr(this, a)).id_, tangent(a));
        break;
      case Op::cos:
        d = t_mul(neg(sin(Expr(this, a))).id_, tangent(a));
        break;
      case Op::powi: {
        const int p = aux_[static_cast<std::size_t>(i)];
        if (p == 0) break;
        if (p == 1) {
          d = tangent(a);
          break;
        }
        const Expr x(this, a);
        const Expr coef = p == 2 ? mul(constant(2.0), x) : mul(constant(p), powi(x, p - 1));
        d = t_mul(coef.id_, tangent(a));
        break;
      }
    }
    scratch_tangent_[k] = d;
  }
  return scratch_tangent_[span - 1];
}

Expr Graph::derivative(Expr output, Expr input, int order) {
  if (order != 1 && order != 2) {
    throw std::invalid_argument("derivative: order must be 1 or 2");
  }
  check_owner(output);
  check_owner(input);
  if (ops_[static_cast<std::size_t>(input.id_)] != Op::variable) {
    throw std::invalid_argument("derivative: input must be a variable node");
  }
  std::int32_t d = differentiate_once(output.id_, input.id_);
  if (order == 2) {
    if (d == kZero || d == kOne) {
      d = kZero;
    } else {
      d = differentiate_once(d, input.id_);
    }
  }
  return Expr(this, materialize(d));
}

namespace {

Graph& owner(Expr a, Expr b) {
  if (a.graph() == nullptr || a.graph() != b.graph()) {
    throw std::logic_error("expressions belong to different graphs");
  }
  return *a.graph();
}

Graph& owner(Expr a) {
  if (a.graph() == nullptr) throw std::logic_error("empty expression");
  return *a.graph();
}

}  // namespace

Expr operator+(Expr a, Expr b) { return owner(a, b).add(a, b); }
Expr operator-(Expr a, Expr b) { return owner(a, b).sub(a, b); }
Expr operator*(Expr a, Expr b) { return owner(a, b).mul(a, b); }
Expr operator/(Expr a, Expr b) { return owner(a, b).div(a, b); }
Expr operator-(Expr a) { return owner(a).neg(a); }
Expr operator+(Expr a, double b) { return a + owner(a).constant(b); }
Expr operator+(double a, Expr b) { return owner(b).constant(a) + b; }
Expr operator-(Expr a, double b) { return a - owner(a).constant(b); }
Expr operator-(double a, Expr b) { return owner(b).constant(a) - b; }
Expr operator*(Expr a, double b) { return a * owner(a).constant(b); }
Expr operator*(double a, Expr b) { return owner(b).constant(a) * b; }
Expr operator/(Expr a, double b) { return a / owner(a).constant(b); }
Expr operator/(double a, Expr b) { return owner(b).constant(a) / b; }

Expr tanh(Expr a) { return owner(a).tanh(a); }
Expr exp(Expr a) { return owner(a).exp(a); }
Expr sin(Expr a) { return owner(a).sin(a); }
Expr cos(Expr a) { return owner(a).cos(a); }
Expr pow(Expr a, int k) { return owner(a).powi(a, k); }

}  // namespace vie::ad
