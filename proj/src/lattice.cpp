#include "rwre/lattice.hpp"

#include "rwre/errors.hpp"
#include "rwre/random.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <unordered_set>

namespace rwre::lattice {

Site::Site(int dim) : dim_(dim) {
  if (dim < 0 || dim > kMaxDim) throw DimensionError("site dimension out of range");
}

Site::Site(std::initializer_list<std::int64_t> coords)
    : dim_(static_cast<int>(coords.size())) {
  if (dim_ > kMaxDim) throw DimensionError("site dimension out of range");
  int i = 0;
  for (auto v : coords) c_[i++] = v;
}

Site Site::operator+(const Site& o) const {
  Site r(dim_);
  for (int i = 0; i < dim_; ++i) r.c_[i] = c_[i] + o.c_[i];
  return r;
}

Site Site::operator-(const Site& o) const {
  Site r(dim_);
  for (int i = 0; i < dim_; ++i) r.c_[i] = c_[i] - o.c_[i];
  return r;
}

Site Site::operator-() const {
  Site r(dim_);
  for (int i = 0; i < dim_; ++i) r.c_[i] = -c_[i];
  return r;
}

bool Site::operator==(const Site& o) const {
  if (dim_ != o.dim_) return false;
  for (int i = 0; i < dim_; ++i)
    if (c_[i] != o.c_[i]) return false;
  return true;
}

std::int64_t Site::l1_norm() const {
  std::int64_t s = 0;
  for (int i = 0; i < dim_; ++i) s += std::llabs(c_[i]);
  return s;
}

std::int64_t Site::linf_norm() const {
  std::int64_t s = 0;
  for (int i = 0; i < dim_; ++i) s = std::max<std::int64_t>(s, std::llabs(c_[i]));
  return s;
}

double Site::dot(const Eigen::VectorXd& v) const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += static_cast<double>(c_[i]) * v[i];
  return s;
}

Eigen::VectorXd Site::to_vector() const {
  Eigen::VectorXd v(dim_);
  for (int i = 0; i < dim_; ++i) v[i] = static_cast<double>(c_[i]);
  return v;
}

std::string Site::to_string() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < dim_; ++i) os << (i ? "," : "") << c_[i];
  os << ')';
  return os.str();
}

std::size_t SiteHash::operator()(const Site& s) const {
  return static_cast<std::size_t>(
      hash_words(static_cast<std::uint64_t>(s.dim()),
                 std::span<const std::int64_t>(s.data(), static_cast<std::size_t>(s.dim()))));
}

std::string Direction::name() const {
  return (sign() > 0 ? "e" : "-e") + std::to_string(axis() + 1);
}

void require_dimension(int d) {
  if (d < 2) throw DimensionError("dimension must be at least 2, got " + std::to_string(d));
  if (d > kMaxDim)
    throw DimensionError("dimension " + std::to_string(d) + " exceeds supported maximum " +
                         std::to_string(kMaxDim));
}

Site unit_step(int d, int slot) {
  Site s(d);
  s[slot % d] = slot < d ? 1 : -1;
  return s;
}

int slot_of_step(const Site& delta) {
  const int d = delta.dim();
  if (delta.l1_norm() != 1) return -1;
  for (int a = 0; a < d; ++a) {
    if (delta[a] == 1) return a;
    if (delta[a] == -1) return a + d;
  }
  return -1;
}

std::vector<Direction> canonical_directions(int d) {
  require_dimension(d);
  std::vector<Direction> dirs;
  dirs.reserve(2 * d);
  for (int k = 0; k < 2 * d; ++k) dirs.push_back(Direction{k, unit_step(d, k)});
  return dirs;
}

Eigen::MatrixXd build_rotation(const Eigen::VectorXd& l) {
  const auto d = l.size();
  require_dimension(static_cast<int>(d));
  const double norm = l.norm();
  if (!(std::abs(norm - 1.0) <= 1e-9))
    throw ParameterError("rotation direction must be a unit vector (norm " +
                         std::to_string(norm) + ")");
  const Eigen::VectorXd u = l / norm;

  // Householder vector v = e_1 - u, with v_0 = 1 - u_0 computed without
  // cancellation when u is close to e_1.
  Eigen::VectorXd v = -u;
  const double tail2 = u.tail(d - 1).squaredNorm();
  v[0] = u[0] > 0.0 ? tail2 / (1.0 + u[0]) : 1.0 - u[0];
  const double vv = v.squaredNorm();
  if (vv < 1e-300) return Eigen::MatrixXd::Identity(d, d);

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(d, d) - (2.0 / vv) * v * v.transpose();
  // Reflection has determinant -1; flip a column other than the first.
  H.col(1) *= -1.0;
  return H;
}

std::string to_string(ExitSide side) {
  switch (side) {
    case ExitSide::front:
      return "front";
    case ExitSide::back:
      return "back";
    case ExitSide::side:
      return "side";
  }
  return "?";
}

namespace {

void check_box_extent(double L, double L_tilde) {
  if (!(L > 0.0) || !(L_tilde > 0.0)) throw ParameterError("box extents must be positive");
}

}  // namespace

BoxSpec::BoxSpec(const Eigen::VectorXd& l, double L, double L_tilde)
    : l_(l), rotation_(build_rotation(l)), L_(L), L_tilde_(L_tilde) {
  check_box_extent(L, L_tilde);
}

BoxSpec::BoxSpec(const Eigen::MatrixXd& rotation, double L, double L_tilde)
    : l_(rotation.col(0)), rotation_(rotation), L_(L), L_tilde_(L_tilde) {
  check_box_extent(L, L_tilde);
  require_dimension(static_cast<int>(rotation.rows()));
  const auto d = rotation.rows();
  if (rotation.cols() != d ||
      !(rotation.transpose() * rotation).isApprox(Eigen::MatrixXd::Identity(d, d), 1e-10))
    throw ParameterError("box rotation must be orthogonal");
}

bool BoxSpec::contains(const Site& x) const {
  const Eigen::VectorXd r = rotation_.transpose() * x.to_vector();
  if (!(std::abs(r[0]) < L_ - kBoundaryTol)) return false;
  for (Eigen::Index j = 1; j < r.size(); ++j)
    if (!(std::abs(r[j]) < L_tilde_ - kBoundaryTol)) return false;
  return true;
}

ExitSide BoxSpec::classify_exit(const Site& x) const {
  if (contains(x)) throw ContractError("exit classification of a point inside the box " + x.to_string());
  const double along = x.dot(l_);
  if (along >= L_ - kBoundaryTol) return ExitSide::front;
  if (along <= -(L_ - kBoundaryTol)) return ExitSide::back;
  return ExitSide::side;
}

std::vector<Site> BoxSpec::sites() const {
  const int d = dim();
  std::array<std::int64_t, kMaxDim> reach{};
  for (int j = 0; j < d; ++j) {
    double r = std::abs(rotation_(j, 0)) * L_;
    for (int k = 1; k < d; ++k) r += std::abs(rotation_(j, k)) * L_tilde_;
    reach[j] = static_cast<std::int64_t>(std::ceil(r));
  }
  std::vector<Site> out;
  Site x(d);
  for (int j = 0; j < d; ++j) x[j] = -reach[j];
  for (;;) {
    if (contains(x)) out.push_back(x);
    int j = 0;
    while (j < d && x[j] == reach[j]) {
      x[j] = -reach[j];
      ++j;
    }
    if (j == d) break;
    ++x[j];
  }
  return out;
}

std::vector<Site> BoxSpec::outer_boundary() const {
  const int d = dim();
  std::vector<Site> out;
  std::unordered_set<Site, SiteHash> seen;
  for (const Site& x : sites()) {
    for (int k = 0; k < 2 * d; ++k) {
      Site y = x + unit_step(d, k);
      if (!contains(y) && seen.insert(y).second) out.push_back(y);
    }
  }
  return out;
}

Eigen::VectorXd project_P(const Eigen::VectorXd& z, const Eigen::VectorXd& v_hat) {
  if (z.size() != v_hat.size()) throw DimensionError("projection dimension mismatch");
  if (!(v_hat[0] > 0.0)) throw GeometryError("projection requires v_hat . e_1 > 0");
  Eigen::VectorXd p = (z[0] / v_hat[0]) * v_hat;
  p[0] = z[0];
  return p;
}

Eigen::VectorXd project_Q(const Eigen::VectorXd& z, const Eigen::VectorXd& v_hat) {
  Eigen::VectorXd q = z - project_P(z, v_hat);
  q[0] = 0.0;
  return q;
}

void TiltedBoxSpec::validate() const {
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("tilted box beta must lie in (0,1)");
  if (!(L > 0.0) || !(rho > 0.0)) throw ParameterError("tilted box L and rho must be positive");
  if (v_hat.size() != center.dim()) throw DimensionError("tilted box v_hat dimension mismatch");
  if (!(v_hat[0] > 0.0)) throw GeometryError("tilted box requires v_hat . e_1 > 0");
}

bool TiltedBoxSpec::contains(const Site& y) const {
  const Eigen::VectorXd z = (y - center).to_vector();
  const double Lb = std::pow(L, beta);
  if (!(z[0] > -Lb && z[0] < L)) return false;
  return project_Q(z, v_hat).cwiseAbs().maxCoeff() < rho * Lb;
}

bool TiltedBoxSpec::is_front_boundary(const Site& y) const {
  if (contains(y)) return false;
  if (!(static_cast<double>(y[0] - center[0]) >= L)) return false;
  const int d = y.dim();
  for (int k = 0; k < 2 * d; ++k)
    if (contains(y + unit_step(d, k))) return true;
  return false;
}

bool SlabSpec::contains(const Site& x) const {
  const double v = static_cast<double>(x[0]);
  return v > -std::pow(L, beta_prime) && v < L;
}

}  // namespace rwre::lattice
