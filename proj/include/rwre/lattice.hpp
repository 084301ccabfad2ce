#pragma once

// Lattice geometry on Z^d: canonical directions, the (P)_M boxes
// B_{l,L,L~}, tilted boxes, slabs and the projections along the asymptotic
// direction.

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

namespace rwre::lattice {

/// Largest supported lattice dimension.
inline constexpr int kMaxDim = 6;

/// A point of Z^d stored inline as 64-bit coordinates.
class Site {
 public:
  Site() = default;
  explicit Site(int dim);
  Site(std::initializer_list<std::int64_t> coords);

  int dim() const { return dim_; }
  std::int64_t operator[](int axis) const { return c_[axis]; }
  std::int64_t& operator[](int axis) { return c_[axis]; }
  const std::int64_t* data() const { return c_.data(); }

  Site operator+(const Site& o) const;
  Site operator-(const Site& o) const;
  Site operator-() const;
  bool operator==(const Site& o) const;

  std::int64_t l1_norm() const;
  std::int64_t linf_norm() const;
  double dot(const Eigen::VectorXd& v) const;
  Eigen::VectorXd to_vector() const;
  std::string to_string() const;

 private:
  std::array<std::int64_t, kMaxDim> c_{};
  int dim_ = 0;
};

struct SiteHash {
  std::size_t operator()(const Site& s) const;
};

/// Canonical direction e_{k+1}. Slots 0..d-1 are +e_1..+e_d and slot k+d is
/// the negation of slot k.
struct Direction {
  int slot = 0;
  Site vector;

  int axis() const { return vector.dim() == 0 ? 0 : slot % vector.dim(); }
  int sign() const { return slot < vector.dim() ? 1 : -1; }
  /// Name such as "e1" or "-e2".
  std::string name() const;
};

/// Throws DimensionError unless 2 <= d <= kMaxDim.
void require_dimension(int d);

std::vector<Direction> canonical_directions(int d);

/// Unit step for slot k in dimension d.
Site unit_step(int d, int slot);
inline int opposite_slot(int d, int slot) { return (slot + d) % (2 * d); }
inline int slot_of(int d, int axis, int sign) { return sign > 0 ? axis : axis + d; }
/// Slot of the unit step `delta`, or -1 if delta is not a unit step.
int slot_of_step(const Site& delta);

/// Orthogonal matrix with first column l: a Householder reflection sending e_1
/// to l, with the second column negated so the determinant is +1.
Eigen::MatrixXd build_rotation(const Eigen::VectorXd& l);

enum class ExitSide { front, back, side };
std::string to_string(ExitSide side);

/// B_{l,L,L~} = R((-L,L) x (-L~,L~)^{d-1}) intersected with Z^d.
class BoxSpec {
 public:
  BoxSpec(const Eigen::VectorXd& l, double L, double L_tilde);
  /// Uses a caller-supplied rotation; it must be orthogonal with R e_1 = l.
  BoxSpec(const Eigen::MatrixXd& rotation, double L, double L_tilde);

  int dim() const { return static_cast<int>(l_.size()); }
  const Eigen::VectorXd& direction() const { return l_; }
  const Eigen::MatrixXd& rotation() const { return rotation_; }
  double L() const { return L_; }
  double L_tilde() const { return L_tilde_; }

  bool contains(const Site& x) const;
  /// Requires x outside the box; front iff x.l >= L, back iff x.l <= -L.
  ExitSide classify_exit(const Site& x) const;
  /// All lattice points of the box.
  std::vector<Site> sites() const;
  /// Outer boundary: points outside the box with a neighbour inside.
  std::vector<Site> outer_boundary() const;

 private:
  Eigen::VectorXd l_;
  Eigen::MatrixXd rotation_;
  double L_;
  double L_tilde_;
};

/// Boundary tolerance; rotated coordinates within this of +-L count as
/// outside.
inline constexpr double kBoundaryTol = 1e-10;

/// P(z) = (z.e_1 / v.e_1) v. Throws GeometryError unless v.e_1 > 0.
Eigen::VectorXd project_P(const Eigen::VectorXd& z, const Eigen::VectorXd& v_hat);
/// Q(z) = z - P(z).
Eigen::VectorXd project_Q(const Eigen::VectorXd& z, const Eigen::VectorXd& v_hat);

/// B_{beta,L}(x) = {y : -L^beta < (y-x).e_1 < L, |Q(y-x)|_inf < rho L^beta}.
struct TiltedBoxSpec {
  Site center;
  double beta = 0.5;
  double L = 1.0;
  double rho = 1.0;
  Eigen::VectorXd v_hat;

  void validate() const;
  bool contains(const Site& y) const;
  /// Point outside the box, adjacent to it, with (y-x).e_1 >= L.
  bool is_front_boundary(const Site& y) const;
};

/// U_{beta',L} = {x : -L^{beta'} < x.e_1 < L}.
struct SlabSpec {
  double beta_prime = 0.5;
  double L = 1.0;
  bool contains(const Site& x) const;
};

}  // namespace rwre::lattice
