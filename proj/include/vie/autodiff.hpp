#pragma once

// Scalar reverse-mode automatic differentiation on an append-only tape.
//
// Nodes are evaluated eagerly when created; `Graph::evaluate` re-runs the
// forward pass with new variable bindings. Derivatives with respect to an
// input node are produced by symbolic transformation, so the result is an
// ordinary expression that can itself be differentiated again or passed to
// the reverse sweep.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vie::ad {

enum class Op : std::uint8_t {
  constant,
  variable,
  add,
  sub,
  mul,
  div,
  neg,
  tanh,
  exp,
  sin,
  cos,
  powi,
};

const char* op_name(Op op) noexcept;

class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(std::int32_t node, Op op);
  std::int32_t node() const noexcept { return node_; }
  Op op() const noexcept { return op_; }

 private:
  std::int32_t node_;
  Op op_;
};

class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while the graph lives
/// and has not been cleared.
class Expr {
 public:
  Expr() = default;

  Graph* graph() const noexcept { return graph_; }
  std::int32_t id() const noexcept { return id_; }
  bool valid() const noexcept { return graph_ != nullptr && id_ >= 0; }
  double value() const;

 private:
  friend class Graph;
  Expr(Graph* g, std::int32_t id) : graph_(g), id_(id) {}

  Graph* graph_ = nullptr;
  std::int32_t id_ = -1;
};

class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Expr constant(double v);
  /// A free variable; `slot` indexes both the bindings and the gradient.
  Expr variable(std::size_t slot, double v);

  Expr add(Expr a, Expr b);
  Expr sub(Expr a, Expr b);
  Expr mul(Expr a, Expr b);
  Expr div(Expr a, Expr b);
  Expr neg(Expr a);
  Expr tanh(Expr a);
  Expr exp(Expr a);
  Expr sin(Expr a);
  Expr cos(Expr a);
  Expr powi(Expr a, int k);

  double value(Expr e) const;
  std::size_t size() const noexcept { return ops_.size(); }

  /// Recomputes every node up to `e` using `bindings[slot]` for variables.
  double evaluate(Expr e, std::span<const double> bindings);

  /// d root / d variable for every slot in [0, n_slots). Slots that do not
  /// appear in the graph get 0.
  std::vector<double> gradient(Expr root, std::size_t n_slots) const;

  /// Adds seed * d root / d variable into `grad` (indexed by slot).
  void accumulate_gradient(Expr root, double seed, std::span<double> grad) const;

  /// Expression for d^order output / d input^order, order 1 or 2.
  Expr derivative(Expr output, Expr input, int order);

  /// Drops every node; existing Expr handles become dangling.
  void clear();
  void reserve(std::size_t n);

 private:
  static constexpr std::int32_t kZero = -1;
  static constexpr std::int32_t kOne = -2;

  Expr push(Op op, std::int32_t a, std::int32_t b, std::int32_t aux, double v);
  void check_owner(Expr e) const;
  double compute(std::size_t i) const;
  std::int32_t differentiate_once(std::int32_t output, std::int32_t input);

  // Tangent-building helpers working on ids with the kZero / kOne sentinels.
  std::int32_t t_add(std::int32_t a, std::int32_t b);
  std::int32_t t_sub(std::int32_t a, std::int32_t b);
  std::int32_t t_mul(std::int32_t a, std::int32_t b);
  std::int32_t t_neg(std::int32_t a);
  std::int32_t materialize(std::int32_t a);

  std::vector<Op> ops_;
  std::vector<std::int32_t> lhs_;
  std::vector<std::int32_t> rhs_;
  std::vector<std::int32_t> aux_;
  std::vector<double> values_;
  mutable std::vector<double> adjoint_;
  std::vector<std::int32_t> scratch_tangent_;
  std::vector<std::uint8_t> scratch_flags_;
};

Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);
Expr operator-(Expr a);
Expr operator+(Expr a, double b);
Expr operator+(double a, Expr b);
Expr operator-(Expr a, double b);
Expr operator-(double a, Expr b);
Expr operator*(Expr a, double b);
Expr operator*(double a, Expr b);
Expr operator/(Expr a, double b);
Expr operator/(double a, Expr b);

Expr tanh(Expr a);
Expr exp(Expr a);
Expr sin(Expr a);
Expr cos(Expr a);
Expr pow(Expr a, int k);

}  // namespace vie::ad
