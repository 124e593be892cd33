#pragma once

// Periodic grids and four-component spinor fields.
//
// Conventions (golden files depend on these):
//  * N points per active axis, N a power of two >= 8; d = 1 uses axis x only
//    and keeps y = z = 0 for positions and momenta.
//  * Positions r_n = -L/2 + n dx, n = 0..N-1, dx = L/N.
//  * Momenta k_j = (2 pi / L)(j - N/2), j = 0..N-1; the zero mode sits at
//    index N/2.
//  * The transform is unitary per axis:
//      psi_hat_j = N^{-1/2} sum_n psi_n exp(-i k_j r_n)
//    which equals (-1)^(j+n) times the standard DFT kernel for even N/2.
//  * Storage is point-major, four complex components per point; the linear
//    point index of (ix, iy, iz) is (ix N + iy) N + iz.
//  * Inner products carry the cell volume dx^d in both spaces.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "relspin/dirac_algebra.hpp"
#include "relspin/spin_operators.hpp"

namespace relspin {

class GridSpec {
 public:
  GridSpec() = default;
  /// Throws PreconditionError unless dim is 1 or 3, n is a power of two
  /// >= 8 and every active length is positive.
  GridSpec(int dim, int n, std::array<double, 3> length);
  static GridSpec cube(int dim, int n, double length) {
    return GridSpec(dim, n, {length, length, length});
  }

  int dim() const { return dim_; }
  int n() const { return n_; }
  double length(int axis) const { return length_[axis]; }
  double dx(int axis) const { return length_[axis] / n_; }
  double dk(int axis) const;
  std::size_t points() const { return points_; }
  double cell_volume() const;

  std::array<int, 3> coords(std::size_t index) const;
  Vector3d position(std::size_t index) const;
  Vector3d momentum(std::size_t index) const;
  std::size_t zero_mode_index() const;
  /// Nyquist |k| bound along an active axis.
  double k_max(int axis) const { return 3.14159265358979323846 / dx(axis); }

  bool operator==(const GridSpec& o) const {
    return dim_ == o.dim_ && n_ == o.n_ && length_ == o.length_;
  }
  std::string describe() const;

 private:
  int dim_ = 1;
  int n_ = 8;
  std::array<double, 3> length_{1.0, 1.0, 1.0};
  std::size_t points_ = 8;
};

enum class Space : std::uint8_t { Position = 0, Momentum = 1 };

class SpinorField {
 public:
  SpinorField() = default;
  SpinorField(GridSpec grid, Space space);

  const GridSpec& grid() const { return grid_; }
  Space space() const { return space_; }
  std::size_t points() const { return grid_.points(); }

  cdouble& operator()(std::size_t point, int component) { return data_[4 * point + component]; }
  const cdouble& operator()(std::size_t point, int component) const {
    return data_[4 * point + component];
  }
  Eigen::Map<Spinor4d> spinor(std::size_t point) { return Eigen::Map<Spinor4d>(&data_[4 * point]); }
  Eigen::Map<const Spinor4d> spinor(std::size_t point) const {
    return Eigen::Map<const Spinor4d>(&data_[4 * point]);
  }
  std::vector<cdouble>& data() { return data_; }
  const std::vector<cdouble>& data() const { return data_; }

  /// Relabels the storage space without transforming (used by transform()).
  void set_space(Space s) { space_ = s; }

  SpinorField& operator+=(const SpinorField& o);
  SpinorField& operator-=(const SpinorField& o);
  SpinorField& operator*=(cdouble s);
  bool all_finite() const;

 private:
  GridSpec grid_;
  Space space_ = Space::Position;
  std::vector<cdouble> data_;
};

SpinorField operator+(SpinorField a, const SpinorField& b);
SpinorField operator-(SpinorField a, const SpinorField& b);
SpinorField operator*(cdouble s, SpinorField a);

/// Unitary transform to the requested space (no-op if already there).
SpinorField transform(SpinorField field, Space target);
void transform_in_place(SpinorField& field, Space target);

/// dx^d-weighted <a|b>; the fields are brought to a common space first.
cdouble inner(const SpinorField& a, const SpinorField& b);
double norm(const SpinorField& f);

/// |psi_hat(k = 0)|^2 as a fraction of the total norm.
double zero_mode_weight(const SpinorField& f);

/// Fraction of the norm within `shell` of any active boundary (position space).
double boundary_flux(const SpinorField& f, double shell);

enum class EnergyProjection { None, Positive, Negative };

struct PacketSpec {
  Vector3d center = Vector3d::Zero();
  double width = 1.0;                      // sigma: psi ~ exp(-|r - r0|^2 / (2 sigma^2))
  Vector3d momentum = Vector3d::Zero();    // mean momentum k0
  Spinor4d polarization = Spinor4d::UnitX();
  EnergyProjection projection = EnergyProjection::None;
};

/// Normalized Gaussian packet. Requires sigma >= 4 dx and the center at least
/// 4 sigma from every boundary on active axes. When projecting, each momentum
/// mode is projected onto the positive (negative) energy eigenspace of
/// c alpha.k + beta m0 c^2 and the field is renormalized.
SpinorField gaussian_packet(const GridSpec& grid, const PacketSpec& spec,
                            const PhysParamsd& params = {});

/// exp(i k0.r) times a fixed spinor at every point, normalized.
SpinorField plane_wave(const GridSpec& grid, const Vector3d& k0, const Spinor4d& polarization);

/// Deterministic pseudo-random field (uniform amplitudes in [-1,1]^2), normalized.
SpinorField random_field(const GridSpec& grid, std::uint64_t seed);

/// Binary dump. Layout, all little-endian on little-endian hosts (the tag
/// records the writer's byte order):
///   bytes 0-3   magic "RSPF"
///   bytes 4-7   uint32 format version (1)
///   bytes 8-11  uint32 d
///   bytes 12-15 uint32 N
///   bytes 16-39 float64 L[3]
///   byte  40    uint8 space (0 position, 1 momentum)
///   byte  41    uint8 endianness tag (1 little, 2 big)
///   bytes 42-47 zero padding
///   bytes 48-   N^d * 4 complex amplitudes, each (float64 re, float64 im),
///               point-major as in memory.
void write_field(std::ostream& os, const SpinorField& f);
SpinorField read_field(std::istream& is);
void write_field(const std::string& path, const SpinorField& f);
SpinorField read_field(const std::string& path);

}  // namespace relspin
