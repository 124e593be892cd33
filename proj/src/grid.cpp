#include "relspin/grid.hpp"

#include <unsupported/Eigen/FFT>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "relspin/errors.hpp"

namespace relspin {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

GridSpec::GridSpec(int dim, int n, std::array<double, 3> length)
    : dim_(dim), n_(n), length_(length) {
  if (dim != 1 && dim != 3) throw PreconditionError("GridSpec: dimension must be 1 or 3");
  if (n < 8 || (n & (n - 1)) != 0)
    throw PreconditionError("GridSpec: points per axis must be a power of two >= 8");
  for (int a = 0; a < dim; ++a) {
    if (!(length[a] > 0) || !std::isfinite(length[a]))
      throw PreconditionError("GridSpec: box lengths must be positive");
  }
  if (dim == 1) length_[1] = length_[2] = length_[0];
  points_ = dim == 1 ? std::size_t(n) : std::size_t(n) * n * n;
}

double GridSpec::dk(int axis) const { return 2.0 * kPi / length_[axis]; }

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= dx(a);
  return v;
}

std::array<int, 3> GridSpec::coords(std::size_t index) const {
  if (dim_ == 1) return {int(index), 0, 0};
  const int iz = int(index % n_);
  const int iy = int((index / n_) % n_);
  const int ix = int(index / (std::size_t(n_) * n_));
  return {ix, iy, iz};
}

Vector3d GridSpec::position(std::size_t index) const {
  const auto c = coords(index);
  Vector3d r = Vector3d::Zero();
  for (int a = 0; a < dim_; ++a) r(a) = -0.5 * length_[a] + c[a] * dx(a);
  return r;
}

Vector3d GridSpec::momentum(std::size_t index) const {
  const auto c = coords(index);
  Vector3d k = Vector3d::Zero();
  for (int a = 0; a < dim_; ++a) k(a) = dk(a) * (c[a] - n_ / 2);
  return k;
}

std::size_t GridSpec::zero_mode_index() const {
  const std::size_t h = n_ / 2;
  return dim_ == 1 ? h : (h * n_ + h) * n_ + h;
}

std::string GridSpec::describe() const {
  std::ostringstream os;
  os << "d=" << dim_ << " N=" << n_ << " L=" << length_[0];
  if (dim_ == 3) os << "x" << length_[1] << "x" << length_[2];
  return os.str();
}

SpinorField::SpinorField(GridSpec grid, Space space)
    : grid_(grid), space_(space), data_(4 * grid.points(), cdouble(0)) {}

SpinorField& SpinorField::operator+=(const SpinorField& o) {
  if (o.space_ != space_) {
    *this += transform(o, space_);
    return *this;
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

SpinorField& SpinorField::operator-=(const SpinorField& o) {
  if (o.space_ != space_) {
    *this -= transform(o, space_);
    return *this;
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

SpinorField& SpinorField::operator*=(cdouble s) {
  for (auto& v : data_) v *= s;
  return *this;
}

bool SpinorField::all_finite() const {
  for (const auto& v : data_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

SpinorField operator+(SpinorField a, const SpinorField& b) { return a += b; }
SpinorField operator-(SpinorField a, const SpinorField& b) { return a -= b; }
SpinorField operator*(cdouble s, SpinorField a) { return a *= s; }

namespace {

// One unitary 1D transform along `axis` for all lines and components. The
// (-1)^n pre/post factors center the momentum lattice.
void transform_axis(SpinorField& f, int axis, bool forward) {
  thread_local Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  const GridSpec& g = f.grid();
  const int n = g.n();
  const double scale = 1.0 / std::sqrt(double(n));
  std::size_t stride = 1;
  if (g.dim() == 3) stride = axis == 0 ? std::size_t(n) * n : (axis == 1 ? n : 1);
  const std::size_t lines = g.points() / n;

  std::vector<cdouble> in(n), out(n);
  auto& data = f.data();
  for (std::size_t line = 0; line < lines; ++line) {
    // base index of the line: enumerate the other two coordinates
    std::size_t base;
    if (g.dim() == 1) {
      base = 0;
    } else if (axis == 0) {
      base = line;
    } else if (axis == 1) {
      base = (line / n) * std::size_t(n) * n + (line % n);
    } else {
      base = line * n;
    }
    for (int comp = 0; comp < 4; ++comp) {
      for (int j = 0; j < n; ++j) {
        const cdouble v = data[4 * (base + j * stride) + comp];
        in[j] = (j & 1) ? -v : v;
      }
      if (forward)
        fft.fwd(out, in);
      else
        fft.inv(out, in);
      for (int j = 0; j < n; ++j) {
        const cdouble v = out[j] * scale;
        data[4 * (base + j * stride) + comp] = (j & 1) ? -v : v;
      }
    }
  }
}

}  // namespace

void transform_in_place(SpinorField& field, Space target) {
  if (field.space() == target) return;
  const bool forward = target == Space::Momentum;
  for (int axis = 0; axis < field.grid().dim(); ++axis) transform_axis(field, axis, forward);
  field.set_space(target);
}

SpinorField transform(SpinorField field, Space target) {
  transform_in_place(field, target);
  return field;
}

cdouble inner(const SpinorField& a, const SpinorField& b) {
  if (!(a.grid() == b.grid())) throw PreconditionError("inner: grid mismatch");
  if (a.space() != b.space()) return inner(a, transform(b, a.space()));
  cdouble s = 0;
  const auto& da = a.data();
  const auto& db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) s += std::conj(da[i]) * db[i];
  return s * a.grid().cell_volume();
}

double norm(const SpinorField& f) { return std::sqrt(std::max(0.0, inner(f, f).real())); }

double zero_mode_weight(const SpinorField& f) {
  const SpinorField m = transform(f, Space::Momentum);
  double total = 0;
  for (const auto& v : m.data()) total += std::norm(v);
  if (total == 0) return 0.0;
  return m.spinor(m.grid().zero_mode_index()).squaredNorm() / total;
}

double boundary_flux(const SpinorField& f, double shell) {
  const SpinorField p = transform(f, Space::Position);
  const GridSpec& g = p.grid();
  double edge = 0, total = 0;
  for (std::size_t i = 0; i < g.points(); ++i) {
    const double w = p.spinor(i).squaredNorm();
    total += w;
    const Vector3d r = g.position(i);
    for (int a = 0; a < g.dim(); ++a) {
      const double half = 0.5 * g.length(a);
      if (r(a) < -half + shell || r(a) > half - g.dx(a) - shell) {
        edge += w;
        break;
      }
    }
  }
  return total > 0 ? edge / total : 0.0;
}

namespace {

void normalize(SpinorField& f) {
  const double n = norm(f);
  if (!(n > 0)) throw PreconditionError("cannot normalize a zero field");
  f *= cdouble(1.0 / n);
}

}  // namespace

SpinorField gaussian_packet(const GridSpec& grid, const PacketSpec& spec,
                            const PhysParamsd& params) {
  if (!(spec.width > 0)) throw PreconditionError("gaussian_packet: width must be > 0");
  for (int a = 0; a < grid.dim(); ++a) {
    if (spec.width < 4.0 * grid.dx(a) * (1 - 1e-12))
      throw PreconditionError("gaussian_packet: width must be at least 4 grid spacings");
    const double half = 0.5 * grid.length(a);
    const double margin = std::min(spec.center(a) + half, half - spec.center(a));
    if (margin < 4.0 * spec.width * (1 - 1e-12))
      throw PreconditionError("gaussian_packet: center must be at least 4 widths from the boundary");
  }
  if (spec.polarization.norm() == 0)
    throw PreconditionError("gaussian_packet: polarization must be nonzero");
  const Spinor4d chi = spec.polarization.normalized();
  SpinorField f(grid, Space::Position);
  const double inv2s2 = 1.0 / (2.0 * spec.width * spec.width);
  for (std::size_t i = 0; i < grid.points(); ++i) {
    const Vector3d r = grid.position(i);
    const double env = std::exp(-(r - spec.center).squaredNorm() * inv2s2);
    const cdouble phase = std::polar(1.0, spec.momentum.dot(r));
    f.spinor(i) = chi * (env * phase);
  }
  if (spec.projection != EnergyProjection::None) {
    params.validate();
    const double sign = spec.projection == EnergyProjection::Positive ? 1.0 : -1.0;
    transform_in_place(f, Space::Momentum);
    for (std::size_t i = 0; i < grid.points(); ++i) {
      const Vector3d k = grid.momentum(i);
      const Matrix4d h = free_dirac_matrix(k, params);
      const double ek = energy_ep(k, params);
      const Matrix4d proj = 0.5 * (Matrix4d::Identity() + (sign / ek) * h);
      f.spinor(i) = proj * f.spinor(i);
    }
    transform_in_place(f, Space::Position);
  }
  normalize(f);
  return f;
}

SpinorField plane_wave(const GridSpec& grid, const Vector3d& k0, const Spinor4d& polarization) {
  SpinorField f(grid, Space::Position);
  for (std::size_t i = 0; i < grid.points(); ++i)
    f.spinor(i) = polarization * std::polar(1.0, k0.dot(grid.position(i)));
  normalize(f);
  return f;
}

SpinorField random_field(const GridSpec& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SpinorField f(grid, Space::Position);
  for (auto& v : f.data()) {
    const double re = u(rng);
    v = cdouble(re, u(rng));
  }
  normalize(f);
  return f;
}

namespace {

constexpr char kMagic[4] = {'R', 'S', 'P', 'F'};

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw PreconditionError("read_field: truncated header");
  return v;
}

std::uint8_t host_endianness_tag() { return std::endian::native == std::endian::little ? 1 : 2; }

}  // namespace

void write_field(std::ostream& os, const SpinorField& f) {
  os.write(kMagic, 4);
  put<std::uint32_t>(os, 1);
  put<std::uint32_t>(os, std::uint32_t(f.grid().dim()));
  put<std::uint32_t>(os, std::uint32_t(f.grid().n()));
  for (int a = 0; a < 3; ++a) put<double>(os, f.grid().length(a));
  put<std::uint8_t>(os, static_cast<std::uint8_t>(f.space()));
  put<std::uint8_t>(os, host_endianness_tag());
  const char pad[6] = {0, 0, 0, 0, 0, 0};
  os.write(pad, 6);
  os.write(reinterpret_cast<const char*>(f.data().data()),
           std::streamsize(f.data().size() * sizeof(cdouble)));
  if (!os) throw Error("write_field: stream error");
}

SpinorField read_field(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw PreconditionError("read_field: bad magic");
  if (get<std::uint32_t>(is) != 1) throw PreconditionError("read_field: unsupported version");
  const int d = int(get<std::uint32_t>(is));
  const int n = int(get<std::uint32_t>(is));
  std::array<double, 3> len{};
  for (auto& l : len) l = get<double>(is);
  const auto space = get<std::uint8_t>(is);
  const auto tag = get<std::uint8_t>(is);
  char pad[6];
  is.read(pad, 6);
  if (tag != host_endianness_tag())
    throw PreconditionError("read_field: byte order differs from this host");
  if (space > 1) throw PreconditionError("read_field: bad space flag");
  SpinorField f(GridSpec(d, n, len), static_cast<Space>(space));
  is.read(reinterpret_cast<char*>(f.data().data()),
          std::streamsize(f.data().size() * sizeof(cdouble)));
  if (!is) throw PreconditionError("read_field: truncated payload");
  return f;
}

void write_field(const std::string& path, const SpinorField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("write_field: cannot open " + path);
  write_field(os, f);
}

SpinorField read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("read_field: cannot open " + path);
  return read_field(is);
}

}  // namespace relspin
