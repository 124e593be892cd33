#pragma once

// Operator composition language for matrix-free application on a grid.
//
// Leaves are 4x4-matrix-valued functions that are diagonal in position space
// (r, t) -> M, diagonal in momentum space k -> M, or constant. Interior nodes
// are Add, Mul (left factor applied last), Scale, Commutator and Adjoint.
// Products and sums of leaves living in the same space are fused into a single
// leaf at construction, so an expression only changes representation where a
// position factor meets a momentum factor.

#include <complex>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "relspin/dirac_algebra.hpp"
#include "relspin/grid.hpp"

namespace relspin {

using PositionMap = std::function<Matrix4d(const Vector3d& r, double t)>;
using MomentumMap = std::function<Matrix4d(const Vector3d& k)>;

struct ExprNode;

class Expr {
 public:
  enum class Kind { Zero, Constant, PositionDiag, MomentumDiag, Add, Mul, Scale, Commutator, Adjoint };

  Expr() = default;  // the zero operator
  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}

  Kind kind() const;
  bool is_zero() const { return kind() == Kind::Zero; }
  bool is_leaf() const;
  const ExprNode& node() const;
  const std::shared_ptr<const ExprNode>& ptr() const { return node_; }

  /// True if some momentum leaf is singular at k = 0 (1/|p|, 1/p^2 factors).
  bool singular_at_zero() const;
  bool time_dependent() const;
  /// Number of leaves after fusion; a rough cost measure.
  std::size_t leaf_count() const;

 private:
  std::shared_ptr<const ExprNode> node_;
};

struct ExprNode {
  Expr::Kind kind = Expr::Kind::Zero;
  // Leaves
  Matrix4d constant = Matrix4d::Zero();
  PositionMap position;
  MomentumMap momentum;
  bool time_dependent = false;
  bool singular = false;
  // Interior nodes
  std::vector<Expr> children;
  cdouble scale = 1.0;
  Expr resolved_adjoint;  // Adjoint nodes only

  // Evaluated leaf tables per grid (time-independent leaves, small grids).
  mutable std::mutex cache_mutex;
  mutable std::vector<std::pair<GridSpec, std::shared_ptr<const std::vector<Matrix4d>>>> cache;

  Matrix4d eval_momentum(const Vector3d& k) const;
};

Expr constant(const Matrix4d& m);
Expr identity_op();
Expr position_diag(PositionMap map, bool time_dependent = false);
Expr momentum_diag(MomentumMap map, bool singular_at_zero = false);
/// k -> f(k) * identity
Expr momentum_scalar(std::function<double(const Vector3d&)> f, bool singular_at_zero = false);
/// (r, t) -> f(r, t) * identity
Expr position_scalar(std::function<double(const Vector3d&, double)> f, bool time_dependent = false);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator*(const Expr& a, const Expr& b);
Expr operator*(cdouble s, const Expr& a);
inline Expr operator*(double s, const Expr& a) { return cdouble(s) * a; }
Expr commutator(const Expr& a, const Expr& b);
Expr anticommutator(const Expr& a, const Expr& b);
Expr adjoint(const Expr& a);
/// (e + e^dagger) / 2
Expr hermitian_part(const Expr& a);
/// (e - e^dagger) / 2
Expr antihermitian_part(const Expr& a);

using VecExpr = std::array<Expr, 3>;

VecExpr operator+(const VecExpr& a, const VecExpr& b);
VecExpr operator-(const VecExpr& a, const VecExpr& b);
VecExpr operator*(const Expr& s, const VecExpr& v);
VecExpr operator*(const VecExpr& v, const Expr& s);
VecExpr operator*(cdouble s, const VecExpr& v);
inline VecExpr operator*(double s, const VecExpr& v) { return cdouble(s) * v; }
/// (a x b)_i = a_j b_k - a_k b_j, each product ordered left to right.
VecExpr cross(const VecExpr& a, const VecExpr& b);
Expr dot(const VecExpr& a, const VecExpr& b);
VecExpr constant_vec(const std::array<Matrix4d, 3>& m);

struct ApplyOptions {
  double zero_mode_guard = 1e-10;  // infinity disables the check
  bool check_finite = true;
  /// Leaf tables are cached only for grids with at most this many points.
  std::size_t cache_point_limit = 4096;
};

/// Applies `e` at time t. The result is linear in `field`. Throws
/// SingularMomentumError when `e` contains singular momentum leaves and the
/// zero-mode weight of `field` exceeds the guard; NumericalError on NaN/Inf.
SpinorField apply(const Expr& e, const SpinorField& field, double t = 0.0,
                  const ApplyOptions& opts = {});

/// <psi| e |psi> with the dx^d-weighted inner product.
cdouble expectation(const Expr& e, const SpinorField& field, double t = 0.0,
                    const ApplyOptions& opts = {});

/// max over pairs (a, b) of |<a, e b> - conj(<b, e a>)|.
double hermiticity_residual(const Expr& e, const std::vector<SpinorField>& states,
                            double t = 0.0, const ApplyOptions& opts = {});

}  // namespace relspin
