#include "radkin/core.hpp"

#include <algorithm>
#include <sstream>

namespace radkin {

void Params::validate() const {
  std::ostringstream bad;
  if (!(eps0 > 0.0)) bad << " eps0 must be > 0;";
  if (!(c0_kernel > 0.0)) bad << " c0_kernel must be > 0;";
  if (!(eps_scale > 0.0)) bad << " eps_scale must be > 0;";
  if (!(a0 >= 0.0)) bad << " a0 must be >= 0;";
  if (!(b0 >= 0.0)) bad << " b0 must be >= 0;";
  if (!(tol_newton > 0.0)) bad << " tol_newton must be > 0;";
  if (!(tol_conservation > 0.0)) bad << " tol_conservation must be > 0;";
  if (!bad.str().empty()) throw Error(ErrorKind::Domain, "invalid params:" + bad.str());
}

VelocityGrid::VelocityGrid(int n_per_axis, double half_width)
    : n_(n_per_axis), half_width_(half_width) {
  if (n_per_axis < 2) throw Error(ErrorKind::Domain, "velocity grid needs at least 2 nodes per axis");
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw Error(ErrorKind::Domain, "velocity grid half width must be positive");
  h_ = 2.0 * half_width_ / (n_ - 1);
  nodes_.resize(size());
  speed2_.resize(size());
  for (int ix = 0; ix < n_; ++ix)
    for (int iy = 0; iy < n_; ++iy)
      for (int iz = 0; iz < n_; ++iz) {
        const std::size_t k = index(ix, iy, iz);
        // Symmetric construction keeps v -> -v exact in floating point.
        nodes_[k] = Vec3(h_ * (2 * ix - (n_ - 1)) / 2.0, h_ * (2 * iy - (n_ - 1)) / 2.0,
                         h_ * (2 * iz - (n_ - 1)) / 2.0);
        speed2_[k] = nodes_[k].norm2();
      }
}

Vec3 VelocityGrid::node(std::size_t flat) const { return nodes_[flat]; }

namespace {

std::vector<Vec3> normalized(std::vector<Vec3> pts) {
  for (auto& p : pts) p = p * (1.0 / p.norm());
  return pts;
}

std::vector<Vec3> octahedron() {
  return {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
}

std::vector<Vec3> icosahedron() {
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v;
  for (double a : {-1.0, 1.0})
    for (double b : {-p, p}) {
      v.emplace_back(0.0, a, b);
      v.emplace_back(a, b, 0.0);
      v.emplace_back(b, 0.0, a);
    }
  return normalized(v);
}

std::vector<Vec3> dodecahedron() {
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  const double ip = 1.0 / p;
  std::vector<Vec3> v;
  for (double a : {-1.0, 1.0})
    for (double b : {-1.0, 1.0})
      for (double c : {-1.0, 1.0}) v.emplace_back(a, b, c);
  for (double a : {-ip, ip})
    for (double b : {-p, p}) {
      v.emplace_back(0.0, a, b);
      v.emplace_back(a, b, 0.0);
      v.emplace_back(b, 0.0, a);
    }
  return normalized(v);
}

}  // namespace

SphereQuadrature::SphereQuadrature(int m) {
  switch (m) {
    case 6: nodes_ = octahedron(); break;
    case 12: nodes_ = icosahedron(); break;
    case 20: nodes_ = dodecahedron(); break;
    case 32: {
      nodes_ = icosahedron();
      auto d = dodecahedron();
      nodes_.insert(nodes_.end(), d.begin(), d.end());
      break;
    }
    default:
      throw Error(ErrorKind::Domain,
                  "unsupported sphere quadrature size " + std::to_string(m) + " (use 6, 12, 20 or 32)");
  }
  weights_.assign(nodes_.size(), 1.0 / static_cast<double>(nodes_.size()));
  check_and_index();
}

SphereQuadrature::SphereQuadrature(std::vector<Vec3> nodes, std::vector<double> weights)
    : nodes_(std::move(nodes)), weights_(std::move(weights)) {
  check_and_index();
}

void SphereQuadrature::check_and_index() {
  if (nodes_.empty() || nodes_.size() != weights_.size())
    throw Error(ErrorKind::Domain, "sphere quadrature needs matching non-empty nodes and weights");
  double total = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (std::abs(nodes_[i].norm() - 1.0) > 1e-12)
      throw Error(ErrorKind::Domain, "sphere node " + std::to_string(i) + " is not a unit vector");
    if (!(weights_[i] > 0.0)) throw Error(ErrorKind::Domain, "sphere weights must be positive");
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorKind::Domain, "sphere weights must sum to 1");
  antipode_.assign(nodes_.size(), -1);
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    for (std::size_t j = 0; j < nodes_.size(); ++j)
      if ((nodes_[i] + nodes_[j]).norm() < 1e-12 && std::abs(weights_[i] - weights_[j]) < 1e-15) {
        antipode_[i] = static_cast<int>(j);
        break;
      }
}

DiscPtr make_discretization(int n_per_axis, double half_width, int sphere_nodes) {
  return std::make_shared<const Discretization>(
      Discretization{VelocityGrid(n_per_axis, half_width), SphereQuadrature(sphere_nodes)});
}

FullState FullState::zeros(const DiscPtr& disc) {
  FullState s;
  s.disc = disc;
  s.f1.assign(disc->grid.size(), 0.0);
  s.f2.assign(disc->grid.size(), 0.0);
  s.q.assign(disc->sphere.size(), 0.0);
  return s;
}

void FullState::check_finite() const {
  require_finite(f1, "f1");
  require_finite(f2, "f2");
  require_finite(q, "q");
}

Remainder Remainder::zeros(const DiscPtr& disc) {
  Remainder w;
  w.disc = disc;
  w.alpha.assign(disc->grid.size(), 0.0);
  w.theta.assign(disc->sphere.size(), 0.0);
  return w;
}

void require_finite(const Field& field, const char* what) {
  for (std::size_t i = 0; i < field.size(); ++i)
    if (!std::isfinite(field[i]))
      throw Error(ErrorKind::Numerical,
                  std::string("non-finite value in ") + what + " at index " + std::to_string(i));
}

namespace {

double moment_weight(double v2, int k) {
  switch (k) {
    case 0: return 1.0;
    case 1: return std::sqrt(1.0 + v2);
    case 2: return 1.0 + v2;
    case 3: return (1.0 + v2) * std::sqrt(1.0 + v2);
    case 4: return (1.0 + v2) * (1.0 + v2);
    default: throw Error(ErrorKind::Domain, "moment weight exponent must be in 0..4");
  }
}

}  // namespace

double integrate_velocity(const VelocityGrid& grid, const Field& field, int weight_exponent) {
  if (field.size() != grid.size()) throw Error(ErrorKind::Domain, "field size does not match grid");
  require_finite(field, "velocity field");
  const auto& s2 = grid.speed2();
  double sum = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) sum += field[i] * moment_weight(s2[i], weight_exponent);
  return sum * grid.cell_volume();
}

double integrate_sphere(const SphereQuadrature& sphere, const Field& field) {
  if (field.size() != sphere.size()) throw Error(ErrorKind::Domain, "field size does not match sphere");
  require_finite(field, "sphere field");
  double sum = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) sum += sphere.weights()[i] * field[i];
  return sum;
}

double norm_l1k(const VelocityGrid& grid, const Field& field, int k) {
  Field a(field.size());
  std::transform(field.begin(), field.end(), a.begin(), [](double x) { return std::abs(x); });
  return integrate_velocity(grid, a, k);
}

FullState compose(const ManifoldState& m, const Remainder& w) {
  if (!(m.lambda < 1.0)) throw Error(ErrorKind::Domain, "compose requires lambda < 1");
  const auto& d = *m.disc;
  if (m.f.size() != d.grid.size() || w.alpha.size() != d.grid.size() || w.theta.size() != d.sphere.size())
    throw Error(ErrorKind::Domain, "compose: field sizes do not match the discretization");
  FullState s;
  s.disc = m.disc;
  s.f1.resize(m.f.size());
  s.f2.resize(m.f.size());
  for (std::size_t i = 0; i < m.f.size(); ++i) {
    s.f1[i] = m.f[i] + w.alpha[i];
    s.f2[i] = m.lambda * m.f[i] - w.alpha[i];
  }
  const double qm = m.lambda / (1.0 - m.lambda);
  s.q.resize(w.theta.size());
  for (std::size_t j = 0; j < w.theta.size(); ++j) s.q[j] = qm + w.theta[j];
  return s;
}

namespace {

double sphere_l1(const SphereQuadrature& sphere, const Field& f) {
  double sum = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) sum += sphere.weights()[j] * std::abs(f[j]);
  return sum;
}

}  // namespace

double norm_x(const FullState& s) {
  const auto& d = *s.disc;
  return norm_l1k(d.grid, s.f1, 2) + norm_l1k(d.grid, s.f2, 2) + sphere_l1(d.sphere, s.q);
}

double norm_x(const Remainder& w) {
  const auto& d = *w.disc;
  return 2.0 * norm_l1k(d.grid, w.alpha, 2) + sphere_l1(d.sphere, w.theta);
}

double distance_x(const FullState& a, const FullState& b) {
  FullState diff = a;
  for (std::size_t i = 0; i < diff.f1.size(); ++i) {
    diff.f1[i] -= b.f1[i];
    diff.f2[i] -= b.f2[i];
  }
  for (std::size_t j = 0; j < diff.q.size(); ++j) diff.q[j] -= b.q[j];
  return norm_x(diff);
}

}  // namespace radkin
