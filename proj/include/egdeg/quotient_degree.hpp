#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "egdeg/local_map.hpp"
#include "egdeg/numerics.hpp"
#include "egdeg/stratification.hpp"
#include "egdeg/types.hpp"

namespace egdeg {

using Field = std::function<Vec(const Vec&)>;
using Predicate = std::function<bool(const Vec&)>;

struct ZeroRecord {
  Vec point;  // stratum coordinates
  double residual = 0.0;
  int index = 0;  // sign det of the Jacobian; 0 marks a degenerate zero
  int component = -1;
  int quotient = -1;
  int class_id = -1;
};

/// Union of grid cells; cell n covers origin + [n, n + 1)·step coordinatewise.
class GridRegion {
 public:
  GridRegion(Vec origin, Vec step, std::vector<CellIndex> cells);

  int dim() const { return static_cast<int>(origin_.size()); }
  const Vec& origin() const { return origin_; }
  const Vec& step() const { return step_; }
  const std::vector<CellIndex>& cells() const { return cells_; }
  bool contains(const CellIndex& c) const { return set_.count(c) > 0; }
  Vec vertex(const CellIndex& v) const;

 private:
  Vec origin_, step_;
  std::vector<CellIndex> cells_;
  std::unordered_set<CellIndex, CellIndexHash> set_;
};

/// The box [lo, hi] split into n cells per axis.
GridRegion box_region(const Vec& lo, const Vec& hi, int n);

struct KroneckerStats {
  int faces = 0;
  long evaluations = 0;
  double residual = 0.0;
  double min_norm = std::numeric_limits<double>::infinity();
};

/// Brouwer degree of the field over the region from boundary data only:
/// endpoint signs in dim 1, winding number in dim 2, solid-angle sum in
/// dim 3. Throws MarginTooSmall if the field vanishes on the boundary,
/// RefinementOverflow if refinement cannot reach an integer, and
/// DimensionUnsupported above dim 3.
int kronecker_degree(const Field& field, const GridRegion& region, KroneckerStats* stats = nullptr);
int kronecker_box(const Field& field, const Vec& lo, const Vec& hi, KroneckerStats* stats = nullptr);

struct NewtonOptions {
  double tol = 1e-10;
  double zero_thresh = 1e-8;
  int max_iter = 100;
  double max_step = 1.0;
  double dedupe = 1e-3;
};

struct NewtonStats {
  int starts = 0;
  int converged = 0;
  int failed = 0;
};

/// Damped Levenberg–Marquardt from every seed with finite-difference
/// Jacobians; iterates never leave `inside`. Converged points are sorted,
/// deduplicated and given their index.
std::vector<ZeroRecord> solve_zeros(const Field& field, const Predicate& inside,
                                    const std::vector<Vec>& seeds, const NewtonOptions& opt,
                                    NewtonStats* stats = nullptr);

/// Sign of det Df at y, or 0 when the central and both one-sided
/// difference Jacobians do not agree on a nonzero sign.
int zero_index(const Field& field, const Vec& y);

/// Σ indices when every zero is nondegenerate.
std::optional<int> morse_sum(const std::vector<ZeroRecord>& zeros);

/// Zeros in [lo, hi] from a seeds_per_axis^d grid of starts.
std::vector<ZeroRecord> find_zeros_box(const Field& field, const Vec& lo, const Vec& hi,
                                       int seeds_per_axis, const NewtonOptions& opt,
                                       NewtonStats* stats = nullptr);

struct DegreeResult {
  int value = 0;
  std::string method;
  std::optional<int> morse;
  std::optional<int> kronecker;
  int zeros = 0;
  int degenerate = 0;
  nlohmann::json to_json() const;
};

/// Degree with the generic-tilt strategy: adds δu for two deterministic
/// unit vectors, recounts nondegenerate zeros and requires agreement.
int tilt_degree(const Field& field, const Predicate& inside, const std::vector<Vec>& seeds,
                double delta, std::uint64_t seed, const NewtonOptions& opt);

struct ComponentDegree {
  int component = -1;
  DegreeResult degree;
  std::vector<ZeroRecord> zeros;
  int cells = 0;
  int pieces = 0;
  NewtonStats newton;
};

/// Zeros of f restricted to Ω_H and the intersection number on each listed
/// component. The field is integrated over a fine grid of step delta made of
/// cells lying inside D_f ∩ Ω_H.
std::vector<ComponentDegree> stratum_degrees(const LocalGradientMap& f, const DomainExpr& omega,
                                             const Stratum& s, const std::vector<int>& components,
                                             const Numerics& num, double delta);

/// I_quotient = I_C / |Stab(C)| for the representative component.
int quotient_intersection(int component_degree, int stabilizer);

}  // namespace egdeg
