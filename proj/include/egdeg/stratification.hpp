#pragma once

#include <array>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "egdeg/domain.hpp"
#include "egdeg/group.hpp"
#include "egdeg/types.hpp"

namespace egdeg {

struct StrataOptions {
  double h = 0.1;
  double bbox = 2.0;
  bool refine_check = true;
};

/// Iso(Ω) with the maximal-first linear order.
struct OrbitTypeLattice {
  std::vector<int> classes;    // class ids in linear order
  std::vector<Vec> witnesses;  // one witness point per entry of classes
  std::vector<std::string> warnings;

  int position(int class_id) const;  // −1 if absent
};

OrbitTypeLattice iso_types(const GroupAction& g, const DomainExpr& omega, const StrataOptions& opt);

/// Integer grid index; cell n has centre (n + ½)h in stratum coordinates.
using CellIndex = std::array<int, kMaxDim>;

struct CellIndexHash {
  std::size_t operator()(const CellIndex& c) const noexcept;
};

struct Component {
  CellIndex label{};           // lexicographically smallest cell index
  std::vector<CellIndex> cells;  // sorted
  Vec interior;                // centre of the cell with largest clearance
  int quotient = -1;
  int stabilizer = 0;
};

/// Ω_H for one orbit type: V^H, its conjugates, grid components, the
/// WH-action on components and the quotient labels.
class Stratum {
 public:
  int class_id = -1;
  int subgroup = -1;                            // representative subgroup index
  Eigen::MatrixXd basis;                        // d × k
  std::vector<Eigen::MatrixXd> conjugate_bases;  // gV^H, one per distinct subspace
  std::vector<int> conjugate_elements;           // g with gV^H = conjugate_bases[j]
  std::vector<Eigen::MatrixXd> larger;          // projectors (k × k) onto V^K ⊂ V^H, K ⊋ H
  std::vector<Mat> weyl;                        // B^T Q_w B per Weyl coset rep
  double h = 0.0;
  std::vector<Component> components;            // sorted by label
  std::vector<std::vector<int>> weyl_perm;      // [w][component] -> component
  std::vector<int> quotient_reps;               // component index per quotient label

  int dim() const { return static_cast<int>(basis.cols()); }
  int weyl_order() const { return static_cast<int>(weyl.size()); }
  Vec center(const CellIndex& c) const;
  /// Distance from y (stratum coordinates) to the larger-isotropy subspaces.
  double clearance(const Vec& y) const;
  /// Component of y via the nearest kept cell whose centre is reachable from
  /// y without leaving Ω_H; −1 if none within reach.
  int locate_coords(const Vec& y, const DomainExpr& omega) const;
  /// (component, quotient label) of an ambient point; NotInStratum on failure.
  std::pair<int, int> locate(const GroupAction& g, const DomainExpr& omega, const Vec& x) const;

  std::string component_label(int c) const;

 private:
  int nearest_cell(const Vec& y, double reach) const;

  friend Stratum build_stratum(const GroupAction&, const DomainExpr&, int, const StrataOptions&);
  std::unordered_map<CellIndex, int, CellIndexHash> cell_component_;
};

Stratum build_stratum(const GroupAction& g, const DomainExpr& omega, int class_id,
                      const StrataOptions& opt);

/// Distinct subspaces gV^H for the class representative, with one element
/// g per subspace, in element order.
void conjugate_subspaces(const GroupAction& g, int class_id, std::vector<Eigen::MatrixXd>& bases,
                         std::vector<int>& elements);

/// Projectors (d × d) onto V^K for every subgroup K strictly containing H.
std::vector<Eigen::MatrixXd> larger_subspaces(const GroupAction& g, int subgroup);

}  // namespace egdeg
