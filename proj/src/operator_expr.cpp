#include "relspin/operator_expr.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "relspin/errors.hpp"

namespace relspin {

using Kind = Expr::Kind;

namespace {

std::shared_ptr<ExprNode> make_node(Kind k) {
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  return n;
}

const std::shared_ptr<const ExprNode>& zero_node() {
  static const std::shared_ptr<const ExprNode> z = make_node(Kind::Zero);
  return z;
}

bool is_position_like(Kind k) { return k == Kind::PositionDiag || k == Kind::Constant; }
bool is_momentum_like(Kind k) { return k == Kind::MomentumDiag || k == Kind::Constant; }

PositionMap as_position_map(const ExprNode& n) {
  if (n.kind == Kind::Constant) {
    const Matrix4d m = n.constant;
    return [m](const Vector3d&, double) { return m; };
  }
  return n.position;
}

MomentumMap as_momentum_map(const ExprNode& n) {
  if (n.kind == Kind::Constant) {
    const Matrix4d m = n.constant;
    return [m](const Vector3d&) { return m; };
  }
  return n.momentum;
}

Expr make_position(PositionMap f, bool time_dependent) {
  auto n = make_node(Kind::PositionDiag);
  n->position = std::move(f);
  n->time_dependent = time_dependent;
  return Expr(n);
}

Expr make_momentum(MomentumMap f, bool singular) {
  auto n = make_node(Kind::MomentumDiag);
  n->momentum = std::move(f);
  n->singular = singular;
  return Expr(n);
}

Expr make_interior(Kind k, std::vector<Expr> children, cdouble scale = 1.0) {
  auto n = make_node(k);
  n->children = std::move(children);
  n->scale = scale;
  return Expr(n);
}

}  // namespace

// Singular user maps are wrapped at creation, so fused leaves drop only their
// singular parts at k = 0.
Matrix4d ExprNode::eval_momentum(const Vector3d& k) const { return momentum(k); }

Kind Expr::kind() const { return node_ ? node_->kind : Kind::Zero; }

const ExprNode& Expr::node() const { return node_ ? *node_ : *zero_node(); }

bool Expr::is_leaf() const {
  const Kind k = kind();
  return k == Kind::Constant || k == Kind::PositionDiag || k == Kind::MomentumDiag;
}

bool Expr::singular_at_zero() const {
  if (!node_) return false;
  if (node_->singular) return true;
  if (kind() == Kind::Adjoint) return node_->resolved_adjoint.singular_at_zero();
  return std::any_of(node_->children.begin(), node_->children.end(),
                     [](const Expr& c) { return c.singular_at_zero(); });
}

bool Expr::time_dependent() const {
  if (!node_) return false;
  if (node_->time_dependent) return true;
  if (kind() == Kind::Adjoint) return node_->resolved_adjoint.time_dependent();
  return std::any_of(node_->children.begin(), node_->children.end(),
                     [](const Expr& c) { return c.time_dependent(); });
}

std::size_t Expr::leaf_count() const {
  if (is_leaf()) return 1;
  if (!node_) return 0;
  if (kind() == Kind::Adjoint) return node_->resolved_adjoint.leaf_count();
  std::size_t n = 0;
  for (const auto& c : node_->children) n += c.leaf_count();
  return n;
}

Expr constant(const Matrix4d& m) {
  if (m.isZero(0.0)) return Expr();
  auto n = make_node(Kind::Constant);
  n->constant = m;
  return Expr(n);
}

Expr identity_op() { return constant(Matrix4d::Identity()); }

Expr position_diag(PositionMap map, bool time_dependent) {
  return make_position(std::move(map), time_dependent);
}

Expr momentum_diag(MomentumMap map, bool singular_at_zero) {
  if (!singular_at_zero) return make_momentum(std::move(map), false);
  return make_momentum([f = std::move(map)](const Vector3d& k) -> Matrix4d {
    if (k.isZero(0.0)) return Matrix4d::Zero();
    return f(k);
  }, true);
}

Expr momentum_scalar(std::function<double(const Vector3d&)> f, bool singular_at_zero) {
  return momentum_diag([f = std::move(f)](const Vector3d& k) -> Matrix4d {
    return Matrix4d::Identity() * f(k);
  }, singular_at_zero);
}

Expr position_scalar(std::function<double(const Vector3d&, double)> f, bool time_dependent) {
  return make_position([f = std::move(f)](const Vector3d& r, double t) -> Matrix4d {
    return Matrix4d::Identity() * f(r, t);
  }, time_dependent);
}

Expr operator*(cdouble s, const Expr& a) {
  if (a.is_zero() || s == cdouble(0)) return Expr();
  if (s == cdouble(1)) return a;
  const ExprNode& n = a.node();
  switch (n.kind) {
    case Kind::Constant:
      return constant(s * n.constant);
    case Kind::PositionDiag: {
      PositionMap f = n.position;
      return make_position([f, s](const Vector3d& r, double t) -> Matrix4d { return s * f(r, t); },
                           n.time_dependent);
    }
    case Kind::MomentumDiag: {
      MomentumMap f = as_momentum_map(n);
      return make_momentum([f, s](const Vector3d& k) -> Matrix4d { return s * f(k); }, n.singular);
    }
    case Kind::Scale:
      return (s * n.scale) * n.children[0];
    default:
      return make_interior(Kind::Scale, {a}, s);
  }
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr();
  const ExprNode& na = a.node();
  const ExprNode& nb = b.node();
  if (na.kind == Kind::Constant && nb.kind == Kind::Constant) return constant(na.constant * nb.constant);
  if (na.kind == Kind::Constant && na.constant.isIdentity(0.0)) return b;
  if (nb.kind == Kind::Constant && nb.constant.isIdentity(0.0)) return a;
  if (is_position_like(na.kind) && is_position_like(nb.kind)) {
    PositionMap f = as_position_map(na), g = as_position_map(nb);
    return make_position([f, g](const Vector3d& r, double t) -> Matrix4d { return f(r, t) * g(r, t); },
                         na.time_dependent || nb.time_dependent);
  }
  if (is_momentum_like(na.kind) && is_momentum_like(nb.kind)) {
    MomentumMap f = as_momentum_map(na), g = as_momentum_map(nb);
    return make_momentum([f, g](const Vector3d& k) -> Matrix4d { return f(k) * g(k); },
                         na.singular || nb.singular);
  }
  if (na.kind == Kind::Scale) return na.scale * (na.children[0] * b);
  if (nb.kind == Kind::Scale) return nb.scale * (a * nb.children[0]);
  std::vector<Expr> children;
  auto push = [&](const Expr& e) {
    if (e.kind() == Kind::Mul)
      for (const auto& c : e.node().children) children.push_back(c);
    else
      children.push_back(e);
  };
  push(a);
  push(b);
  // Fuse adjacent compatible leaves across the seam.
  std::vector<Expr> fused;
  for (const auto& c : children) {
    if (!fused.empty() && fused.back().is_leaf() && c.is_leaf()) {
      const Kind k1 = fused.back().kind(), k2 = c.kind();
      if ((is_position_like(k1) && is_position_like(k2)) ||
          (is_momentum_like(k1) && is_momentum_like(k2))) {
        fused.back() = fused.back() * c;
        continue;
      }
    }
    fused.push_back(c);
  }
  if (fused.size() == 1) return fused[0];
  return make_interior(Kind::Mul, std::move(fused));
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const ExprNode& na = a.node();
  const ExprNode& nb = b.node();
  if (na.kind == Kind::Constant && nb.kind == Kind::Constant) return constant(na.constant + nb.constant);
  if (a.is_leaf() && b.is_leaf()) {
    if (is_position_like(na.kind) && is_position_like(nb.kind)) {
      PositionMap f = as_position_map(na), g = as_position_map(nb);
      return make_position([f, g](const Vector3d& r, double t) -> Matrix4d { return f(r, t) + g(r, t); },
                           na.time_dependent || nb.time_dependent);
    }
    if (is_momentum_like(na.kind) && is_momentum_like(nb.kind)) {
      MomentumMap f = as_momentum_map(na), g = as_momentum_map(nb);
      return make_momentum([f, g](const Vector3d& k) -> Matrix4d { return f(k) + g(k); },
                           na.singular || nb.singular);
    }
  }
  std::vector<Expr> children;
  auto push_one = [&](const Expr& e) {
    if (e.is_leaf()) {
      for (auto& c : children) {
        if (!c.is_leaf()) continue;
        const Kind k1 = c.kind(), k2 = e.kind();
        const bool mixed = (k1 == Kind::PositionDiag && k2 == Kind::MomentumDiag) ||
                           (k1 == Kind::MomentumDiag && k2 == Kind::PositionDiag);
        if (!mixed) {
          c = c + e;
          return;
        }
      }
    }
    children.push_back(e);
  };
  auto push = [&](const Expr& e) {
    if (e.kind() == Kind::Add)
      for (const auto& c : e.node().children) push_one(c);
    else
      push_one(e);
  };
  push(a);
  push(b);
  children.erase(std::remove_if(children.begin(), children.end(),
                                [](const Expr& c) { return c.is_zero(); }),
                 children.end());
  if (children.empty()) return Expr();
  if (children.size() == 1) return children[0];
  return make_interior(Kind::Add, std::move(children));
}

Expr operator-(const Expr& a) { return cdouble(-1) * a; }
Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr commutator(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr();
  return make_interior(Kind::Commutator, {a, b});
}

Expr anticommutator(const Expr& a, const Expr& b) { return a * b + b * a; }

namespace {

Expr build_adjoint(const Expr& a) {
  const ExprNode& n = a.node();
  switch (n.kind) {
    case Kind::Zero:
      return a;
    case Kind::Constant:
      return constant(n.constant.adjoint());
    case Kind::PositionDiag: {
      PositionMap f = n.position;
      return make_position([f](const Vector3d& r, double t) -> Matrix4d { return f(r, t).adjoint(); },
                           n.time_dependent);
    }
    case Kind::MomentumDiag: {
      MomentumMap f = as_momentum_map(n);
      return make_momentum([f](const Vector3d& k) -> Matrix4d { return f(k).adjoint(); }, n.singular);
    }
    case Kind::Add: {
      Expr out;
      for (const auto& c : n.children) out = out + build_adjoint(c);
      return out;
    }
    case Kind::Mul: {
      Expr out = build_adjoint(n.children.back());
      for (int i = int(n.children.size()) - 2; i >= 0; --i) out = out * build_adjoint(n.children[i]);
      return out;
    }
    case Kind::Scale:
      return std::conj(n.scale) * build_adjoint(n.children[0]);
    case Kind::Commutator:
      return commutator(build_adjoint(n.children[1]), build_adjoint(n.children[0]));
    case Kind::Adjoint:
      return n.children[0];
  }
  return Expr();
}

}  // namespace

Expr adjoint(const Expr& a) {
  if (a.is_zero()) return a;
  if (a.kind() == Kind::Adjoint) return a.node().children[0];
  auto n = make_node(Kind::Adjoint);
  n->children = {a};
  n->resolved_adjoint = build_adjoint(a);
  return Expr(n);
}

Expr hermitian_part(const Expr& a) { return 0.5 * (a + adjoint(a)); }
Expr antihermitian_part(const Expr& a) { return 0.5 * (a - adjoint(a)); }

VecExpr operator+(const VecExpr& a, const VecExpr& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
VecExpr operator-(const VecExpr& a, const VecExpr& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
VecExpr operator*(const Expr& s, const VecExpr& v) { return {s * v[0], s * v[1], s * v[2]}; }
VecExpr operator*(const VecExpr& v, const Expr& s) { return {v[0] * s, v[1] * s, v[2] * s}; }
VecExpr operator*(cdouble s, const VecExpr& v) { return {s * v[0], s * v[1], s * v[2]}; }

VecExpr cross(const VecExpr& a, const VecExpr& b) {
  VecExpr out;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    out[i] = a[j] * b[k] - a[k] * b[j];
  }
  return out;
}

Expr dot(const VecExpr& a, const VecExpr& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

VecExpr constant_vec(const std::array<Matrix4d, 3>& m) {
  return {constant(m[0]), constant(m[1]), constant(m[2])};
}

// ---------------------------------------------------------------------------
// Application

namespace {

std::shared_ptr<const std::vector<Matrix4d>> leaf_table(const ExprNode& n, const GridSpec& g,
                                                        const ApplyOptions& opts) {
  if (n.time_dependent || g.points() > opts.cache_point_limit) return nullptr;
  std::lock_guard<std::mutex> lock(n.cache_mutex);
  for (const auto& [grid, table] : n.cache)
    if (grid == g) return table;
  auto table = std::make_shared<std::vector<Matrix4d>>(g.points());
  if (n.kind == Kind::PositionDiag) {
    for (std::size_t i = 0; i < g.points(); ++i) (*table)[i] = n.position(g.position(i), 0.0);
  } else {
    for (std::size_t i = 0; i < g.points(); ++i) (*table)[i] = n.eval_momentum(g.momentum(i));
  }
  n.cache.emplace_back(g, table);
  return table;
}

void apply_leaf(const ExprNode& n, SpinorField& f, double t, const ApplyOptions& opts) {
  if (n.kind == Kind::Constant) {
    const Matrix4d m = n.constant;
    const std::ptrdiff_t np = std::ptrdiff_t(f.points());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < np; ++i) f.spinor(i) = m * f.spinor(i);
    return;
  }
  const bool momentum = n.kind == Kind::MomentumDiag;
  transform_in_place(f, momentum ? Space::Momentum : Space::Position);
  const GridSpec& g = f.grid();
  const std::ptrdiff_t np = std::ptrdiff_t(g.points());
  if (auto table = leaf_table(n, g, opts)) {
    const auto& tab = *table;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < np; ++i) f.spinor(i) = tab[i] * f.spinor(i);
    return;
  }
  if (momentum) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < np; ++i) f.spinor(i) = n.eval_momentum(g.momentum(i)) * f.spinor(i);
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < np; ++i) f.spinor(i) = n.position(g.position(i), t) * f.spinor(i);
  }
}

SpinorField apply_node(const Expr& e, SpinorField f, double t, const ApplyOptions& opts) {
  const ExprNode& n = e.node();
  switch (n.kind) {
    case Kind::Zero: {
      for (auto& v : f.data()) v = 0;
      return f;
    }
    case Kind::Constant:
    case Kind::PositionDiag:
    case Kind::MomentumDiag:
      apply_leaf(n, f, t, opts);
      return f;
    case Kind::Add: {
      SpinorField acc = apply_node(n.children[0], f, t, opts);
      for (std::size_t i = 1; i < n.children.size(); ++i) {
        const bool last = i + 1 == n.children.size();
        acc += last ? apply_node(n.children[i], std::move(f), t, opts)
                    : apply_node(n.children[i], f, t, opts);
      }
      return acc;
    }
    case Kind::Mul: {
      for (auto it = n.children.rbegin(); it != n.children.rend(); ++it)
        f = apply_node(*it, std::move(f), t, opts);
      return f;
    }
    case Kind::Scale: {
      f = apply_node(n.children[0], std::move(f), t, opts);
      f *= n.scale;
      return f;
    }
    case Kind::Commutator: {
      const Expr& a = n.children[0];
      const Expr& b = n.children[1];
      SpinorField ab = apply_node(a, apply_node(b, f, t, opts), t, opts);
      ab -= apply_node(b, apply_node(a, std::move(f), t, opts), t, opts);
      return ab;
    }
    case Kind::Adjoint:
      return apply_node(n.resolved_adjoint, std::move(f), t, opts);
  }
  return f;
}

}  // namespace

SpinorField apply(const Expr& e, const SpinorField& field, double t, const ApplyOptions& opts) {
  if (e.singular_at_zero() && std::isfinite(opts.zero_mode_guard)) {
    const double w = zero_mode_weight(field);
    if (w > opts.zero_mode_guard) {
      std::ostringstream os;
      os << "operator contains 1/|p| or 1/p^2 factors but the state has zero-mode weight "
         << std::scientific << std::setprecision(3) << w << " > guard " << opts.zero_mode_guard;
      throw SingularMomentumError(os.str());
    }
  }
  SpinorField out = apply_node(e, field, t, opts);
  if (opts.check_finite && !out.all_finite())
    throw NumericalError("apply: non-finite values in result");
  return out;
}

cdouble expectation(const Expr& e, const SpinorField& field, double t, const ApplyOptions& opts) {
  return inner(field, apply(e, field, t, opts));
}

double hermiticity_residual(const Expr& e, const std::vector<SpinorField>& states, double t,
                            const ApplyOptions& opts) {
  std::vector<SpinorField> images;
  images.reserve(states.size());
  for (const auto& s : states) images.push_back(apply(e, s, t, opts));
  double worst = 0;
  for (std::size_t a = 0; a < states.size(); ++a) {
    for (std::size_t b = a; b < states.size(); ++b) {
      const cdouble ab = inner(states[a], images[b]);
      const cdouble ba = inner(states[b], images[a]);
      worst = std::max(worst, std::abs(ab - std::conj(ba)));
    }
  }
  return worst;
}

}  // namespace relspin
