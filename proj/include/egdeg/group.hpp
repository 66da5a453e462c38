#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "egdeg/types.hpp"

namespace egdeg {

/// An orthogonal d×d matrix, re-orthonormalized once at construction.
class OrthogonalTransform {
 public:
  /// Throws NotOrthogonal if ‖QᵀQ − I‖_max > 1e−9.
  static OrthogonalTransform from_matrix(const Eigen::MatrixXd& q);

  const Mat& matrix() const { return q_; }
  int dim() const { return static_cast<int>(q_.rows()); }
  bool same_as(const OrthogonalTransform& other, double tol = 1e-8) const;

 private:
  explicit OrthogonalTransform(Mat q) : q_(std::move(q)) {}
  Mat q_;
};

/// A finite group of orthogonal matrices with its multiplication table.
/// Element 0 is the identity; mul(a, b) is the index of Q_a Q_b.
class FiniteGroupRep {
 public:
  FiniteGroupRep(std::vector<OrthogonalTransform> elements, std::vector<int> generators);

  int order() const { return static_cast<int>(elements_.size()); }
  int dim() const { return dim_; }
  const OrthogonalTransform& element(int i) const { return elements_[i]; }
  const Mat& matrix(int i) const { return elements_[i].matrix(); }
  int mul(int a, int b) const { return mul_[a * order() + b]; }
  int inv(int a) const { return inv_[a]; }
  const std::vector<int>& generators() const { return generators_; }

  /// Index of the stored element equal to q (max-norm 1e−8), or −1.
  int find(const Mat& q) const;

 private:
  std::vector<OrthogonalTransform> elements_;
  std::vector<int> generators_;
  std::vector<int> mul_;
  std::vector<int> inv_;
  int dim_;
};

/// BFS closure of the generators; deterministic element order (identity
/// first, then discovery order). Throws ClosureOverflow beyond cap.
FiniteGroupRep close_group(const std::vector<OrthogonalTransform>& generators, int dim,
                           int cap = 64);

using SubgroupMask = std::uint64_t;

struct SubgroupRecord {
  SubgroupMask mask = 0;
  std::vector<int> members;  // sorted element indices
  int order = 0;
  std::vector<int> normalizer;
  std::vector<int> weyl_coset_reps;  // one element of NH per coset gH
  Eigen::MatrixXd fixed_basis;       // d × dim V^H, orthonormal columns
  int class_id = -1;
};

struct ConjugacyClass {
  int id = 0;
  int representative = 0;  // subgroup index with lexicographically smallest members
  std::vector<int> subgroups;
  int order = 0;
  std::string name;
};

struct SubgroupLattice {
  std::vector<SubgroupRecord> subgroups;
  std::vector<ConjugacyClass> classes;  // sorted by (order, representative members)
  std::vector<std::vector<char>> leq;   // leq[a][b]: (H_a) ≤ (H_b)

  int find(SubgroupMask mask) const;  // −1 if not a subgroup
  const SubgroupRecord& representative(int class_id) const {
    return subgroups[classes[class_id].representative];
  }

 private:
  friend SubgroupLattice subgroup_lattice(const FiniteGroupRep& g);
  std::unordered_map<SubgroupMask, int> index_;
};

/// Enumerates every subgroup (cyclic closures, then joins to a fixpoint),
/// groups them into conjugacy classes and computes the partial order.
SubgroupLattice subgroup_lattice(const FiniteGroupRep& g);

/// Orthonormal basis of V^H, canonicalized by Gram–Schmidt on the projected
/// standard basis so that downstream labels are reproducible.
Eigen::MatrixXd fixed_subspace(const FiniteGroupRep& g, const SubgroupRecord& h);

/// Group together with its subgroup lattice; immutable and shared.
struct GroupAction {
  FiniteGroupRep rep;
  SubgroupLattice lattice;
  std::string description;

  int dim() const { return rep.dim(); }
  int order() const { return rep.order(); }
};

using GroupPtr = std::shared_ptr<const GroupAction>;

GroupPtr make_action(FiniteGroupRep rep, std::string description = {});

/// Subgroup index of G_x = {g : ‖Q_g x − x‖ ≤ 1e−7(1+‖x‖)}. Throws
/// IsotropyAmbiguous when some residual falls in (1e−7, 1e−5)·(1+‖x‖).
int isotropy(const GroupAction& g, const Vec& x);
const SubgroupRecord& isotropy_record(const GroupAction& g, const Vec& x);

/// Deduplicated orbit {Q_g x}; asserts |orbit|·|G_x| = |G|.
std::vector<Vec> orbit(const GroupAction& g, const Vec& x);

/// Images Q_g x for all g (with repetitions), element order.
std::vector<Vec> orbit_images(const GroupAction& g, const Vec& x);

// Named representations accepted by the configuration.
GroupPtr cyclic_group(int n);      // rotations by 2π/n on ℝ²
GroupPtr dihedral_group(int n);    // rotations and x-axis reflection on ℝ²
GroupPtr symmetric_group(int n);   // permutation matrices on ℝⁿ
GroupPtr antipodal_group(int d);   // {±I_d}
GroupPtr trivial_group(int d);     // {I_d}
GroupPtr group_from_generators(const std::vector<Eigen::MatrixXd>& generators, int dim,
                               int cap = 64);

/// S¹ acting on ℂ^m ⊕ ℝ^t by rotation speeds; only the demo path uses it.
struct CircleRep {
  std::vector<int> weights;
  int trivial_dim = 0;
};

}  // namespace egdeg
