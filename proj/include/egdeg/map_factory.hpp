#pragma once

#include <optional>
#include <string>
#include <vector>

#include "egdeg/domain.hpp"
#include "egdeg/local_map.hpp"
#include "egdeg/numerics.hpp"
#include "egdeg/polynomial.hpp"
#include "egdeg/stratification.hpp"
#include "egdeg/theta.hpp"

namespace egdeg {

/// f(x + v) = v on the ε-balls around the orbit of x: φ = ½|z − c|² for the
/// nearest orbit point c, D_f = O^ε. Throws TubeTooWide unless the balls are
/// pairwise separated, stay away from every V^K with K ⊄ G_x, and lie in Ω.
LocalGradientMap orbit_normal(GroupPtr group, const DomainExpr& omega, const Vec& x, double eps);

/// (H)-normal lift of a WH-invariant stratum potential k: φ(x + v) =
/// k(x) + ½|v|² on U^ε, where U is the invariant union of the stratum balls
/// of radius `radius` around `centers` (stratum coordinates).
LocalGradientMap h_normal_lift(GroupPtr group, const DomainExpr& omega, const Stratum& stratum,
                               const Polynomial& k, const std::vector<Vec>& centers,
                               double radius, double eps);

/// l restricted to D_l \ Y. Throws ZeroOnY if Newton started from samples of
/// Y ∩ D_l finds a zero of l there.
LocalGradientMap restrict_off(const LocalGradientMap& l, const DomainExpr& y, double bbox,
                              double zero_thresh = 1e-8);

struct ExpectedEntry {
  std::string orbit_type;
  std::string component;  // quotient label "q<j>"
  int value = 0;
  std::string provenance;
};

struct CatalogEntry {
  std::string name;
  std::string description;
  nlohmann::json group_spec;
  GroupPtr group;
  DomainExpr omega;
  std::string potential;  // source text of φ
  LocalGradientMap map;
  Numerics numerics;
  std::optional<int> s1_weight;  // set for the S¹ demos; group/map are then the real slice
  std::optional<int> theta11;
  std::string theta11_provenance;
  std::vector<ExpectedEntry> expected;

  /// Expected Θ keyed like the output of compute().
  ThetaVector expected_theta() const;
  ThetaResult compute() const;
  ThetaResult compute(const Numerics& num) const;
  nlohmann::json to_json() const;
};

std::vector<std::string> catalog_names();
/// Throws UnknownName for names outside catalog_names().
CatalogEntry catalog(const std::string& name);

/// Θ key of the stratum component containing x (orbit type, quotient label).
ThetaLabel component_label_of(const ThetaContext& ctx, const Vec& x);

}  // namespace egdeg
