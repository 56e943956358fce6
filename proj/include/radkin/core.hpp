#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace radkin {

enum class ErrorKind { Domain, Numerical, Guard, Config, Infeasible };

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3() = default;
  constexpr Vec3(double a, double b, double c) : x(a), y(b), z(c) {}

  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

struct Params {
  double eps0 = 0.5;
  double c0_kernel = 1.0;
  double a0 = 1.0;
  double b0 = 1.0;
  double eps_scale = 1.0;
  double tol_newton = 1e-12;
  double tol_conservation = 1e-10;

  /// Throws Domain when an invariant is violated.
  void validate() const;
};

using Field = std::vector<double>;

/// Uniform N^3 tensor grid on [-L, L]^3 with equal (midpoint) weights.
class VelocityGrid {
public:
  VelocityGrid(int n_per_axis, double half_width);

  int n() const { return n_; }
  double half_width() const { return half_width_; }
  double spacing() const { return h_; }
  double cell_volume() const { return h_ * h_ * h_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }

  std::size_t index(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(ix) * n_ + iy) * n_ + iz;
  }
  double coord(int i) const { return -half_width_ + h_ * i; }
  Vec3 node(std::size_t flat) const;
  const std::vector<Vec3>& nodes() const { return nodes_; }
  const Field& speed2() const { return speed2_; }

  /// Flat index of the node reflected through the origin.
  std::size_t mirror(std::size_t flat) const { return size() - 1 - flat; }

private:
  int n_;
  double half_width_;
  double h_;
  std::vector<Vec3> nodes_;
  Field speed2_;
};

/// Antipodally symmetric equal-weight point set on the unit sphere.
class SphereQuadrature {
public:
  /// Supported sizes: 6 (octahedron), 12 (icosahedron), 20 (dodecahedron),
  /// 32 (icosahedron plus dodecahedron, a spherical 5-design).
  explicit SphereQuadrature(int m = 32);
  SphereQuadrature(std::vector<Vec3> nodes, std::vector<double> weights);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<Vec3>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  /// Index of -n for node i, or -1 when the set is not antipodal.
  int antipode(std::size_t i) const { return antipode_[i]; }

private:
  void check_and_index();

  std::vector<Vec3> nodes_;
  std::vector<double> weights_;
  std::vector<int> antipode_;
};

struct Discretization {
  VelocityGrid grid;
  SphereQuadrature sphere;
};

using DiscPtr = std::shared_ptr<const Discretization>;

DiscPtr make_discretization(int n_per_axis, double half_width, int sphere_nodes = 32);

struct FullState {
  DiscPtr disc;
  Field f1, f2, q;

  static FullState zeros(const DiscPtr& disc);
  void check_finite() const;
};

struct ManifoldState {
  DiscPtr disc;
  double lambda = 0.0;
  Field f;
};

struct Remainder {
  DiscPtr disc;
  Field alpha;
  Field theta;

  static Remainder zeros(const DiscPtr& disc);
};

/// Quadrature value of the integral of field * (1+|v|^2)^(k/2), k in 0..4.
double integrate_velocity(const VelocityGrid& grid, const Field& field, int weight_exponent = 0);
double integrate_sphere(const SphereQuadrature& sphere, const Field& field);

/// Weighted L1_k norm (the integral of |f|(1+|v|^2)^(k/2)).
double norm_l1k(const VelocityGrid& grid, const Field& field, int k);

/// (F + alpha, lambda F - alpha, lambda/(1-lambda) + theta).
FullState compose(const ManifoldState& m, const Remainder& w);

/// Norm of X: the L1_2 norm of both gas rows plus the L1 norm of the photon row.
double norm_x(const FullState& s);
double norm_x(const Remainder& w);
double distance_x(const FullState& a, const FullState& b);

void require_finite(const Field& field, const char* what);

}  // namespace radkin
