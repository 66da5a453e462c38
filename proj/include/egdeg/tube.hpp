#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "egdeg/types.hpp"

namespace egdeg {

/// Flat subspace gV^H carried by a tube: orthonormal basis and projector.
struct TubeSubspace {
  Eigen::MatrixXd basis;  // d × k
  Mat projector;          // d × d
  int dim() const { return static_cast<int>(basis.cols()); }
};

/// Open ball of the stratum, living in one conjugate subspace.
struct TubeBall {
  int subspace = 0;
  Vec center;
  double radius = 0.0;
};

struct TubeDecomposition {
  int subspace = -1;
  Vec base;    // x, projection onto the nearest conjugate subspace
  Vec normal;  // v = z − x
  double s = 0.0;  // |v|
};

/// Geometry of U and its normal tubes: all conjugate subspaces of a stratum
/// plus the invariant union of stratum balls making up U. Tube radii are
/// supplied per query so one geometry serves U^ε, U^{ε/3} and B^ε.
class TubeGeometry {
 public:
  TubeGeometry(int ambient_dim, std::vector<TubeSubspace> subspaces, std::vector<TubeBall> balls);

  int ambient_dim() const { return dim_; }
  const std::vector<TubeSubspace>& subspaces() const { return subspaces_; }
  const std::vector<TubeBall>& balls() const { return balls_; }
  bool empty() const { return balls_.empty(); }
  int stratum_dim() const { return subspaces_.empty() ? 0 : subspaces_.front().dim(); }

  /// min over balls on subspace j of |p − c| − ρ; negative iff p ∈ U_j.
  double u_signed(int j, const Vec& p) const;

  /// (x, v) with x ∈ U, v ⊥ the nearest conjugate subspace, |v| < r.
  /// Throws AmbiguousProjection when two conjugate subspaces are within r/10
  /// of each other in distance to z and z lies in one of the tubes.
  std::optional<TubeDecomposition> decompose(const Vec& z, double r) const;

  /// Signed margin of the open tube U^r: positive inside (lower bound on
  /// the distance to the complement), negative outside.
  double region_margin(const Vec& z, double r) const;

  /// Distance lower bound to the closed lateral shell B^r over ∂U.
  double wall_distance(const Vec& z, double r) const;

  double min_ball_radius() const;
  double bound_radius(double r) const;

 private:
  int dim_;
  std::vector<TubeSubspace> subspaces_;
  std::vector<TubeBall> balls_;
  std::vector<std::vector<int>> balls_on_;  // ball indices per subspace
};

using TubePtr = std::shared_ptr<const TubeGeometry>;

}  // namespace egdeg
