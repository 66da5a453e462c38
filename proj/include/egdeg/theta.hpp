#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "egdeg/local_map.hpp"
#include "egdeg/numerics.hpp"
#include "egdeg/perturbation.hpp"
#include "egdeg/polynomial.hpp"
#include "egdeg/quotient_degree.hpp"
#include "egdeg/stratification.hpp"

namespace egdeg {

/// Key (class_id, quotient label) with the names used for serialization.
struct ThetaKey {
  int class_id = -1;
  int quotient = -1;
  auto operator<=>(const ThetaKey&) const = default;
};

struct ThetaLabel {
  std::string orbit_type;
  std::string component;
};

/// Sparse Θ: integers per (orbit type, quotient component) and the {0,1}
/// slot for the origin when V^G = 0.
class ThetaVector {
 public:
  std::optional<int> theta11;

  void set(ThetaKey key, int value, ThetaLabel label);
  int at(ThetaKey key) const;
  const std::map<ThetaKey, int>& entries() const { return entries_; }
  const ThetaLabel& label(ThetaKey key) const { return labels_.at(key); }

  /// Entries with value 0 removed.
  ThetaVector normalized() const;
  bool is_zero() const;
  /// Compares nonzero entries and theta11 (absent counts as 0).
  bool operator==(const ThetaVector& other) const;

  nlohmann::json to_json() const;
  std::string to_string() const;

 private:
  std::map<ThetaKey, int> entries_;
  std::map<ThetaKey, ThetaLabel> labels_;
};

/// Entrywise sum; theta11 is the max. Throws AdditionUndefined if both
/// theta11 slots equal 1.
ThetaVector theta_add(const ThetaVector& a, const ThetaVector& b);

struct ComponentRecord {
  std::string component;
  int quotient = -1;
  int stabilizer = 1;
  DegreeResult degree;
  int quotient_value = 0;
  std::vector<ZeroRecord> zeros;
  NewtonStats newton;
  int cells = 0;
};

struct StepRecord {
  int step = 0;
  int class_id = -1;
  std::string orbit_type;
  int dim = 0;
  double delta = 0.0;
  std::optional<int> theta11;
  std::vector<ComponentRecord> components;
  std::optional<TubeSpec> tube;
  bool domain_nested = true;  // sampled D_{f_{i+1}} ⊆ D_{f_i}
  nlohmann::json to_json() const;
};

struct RecursionTrace {
  std::vector<std::string> lattice;
  std::vector<std::string> warnings;
  std::vector<StepRecord> steps;
  nlohmann::json to_json() const;
};

/// Lattice and strata of (G, Ω), built once and shared by many Θ runs.
class ThetaContext {
 public:
  ThetaContext(GroupPtr group, DomainExpr omega, Numerics num);

  const GroupAction& group() const { return *group_; }
  const GroupPtr& group_ptr() const { return group_; }
  const DomainExpr& omega() const { return omega_; }
  const Numerics& numerics() const { return num_; }
  const OrbitTypeLattice& lattice() const { return lattice_; }
  /// Stratum of a class with dim V^H ≥ 1.
  const Stratum& stratum(int class_id) const;
  /// (type name, quotient label) for a stratum component.
  ThetaLabel label(int class_id, int quotient) const;

 private:
  GroupPtr group_;
  DomainExpr omega_;
  Numerics num_;
  OrbitTypeLattice lattice_;
  std::map<int, Stratum> strata_;
};

struct ThetaResult {
  ThetaVector theta;
  RecursionTrace trace;
};

/// Runs the recursion f₁ = f, f_{i+1} = (f_i)^c over the orbit types in
/// maximal-first order, recording one quotient intersection number per
/// quotient component that meets the zero set.
ThetaResult theta(const ThetaContext& ctx, const LocalGradientMap& f);

/// Fine-grid step for the boundary degree: below the stratum grid, the
/// smallest perturbation radius and the smallest domain feature.
double region_step(const LocalGradientMap& f, double h);
/// One perturbation step on its own: the tube around the zeros of the orbit
/// type at `position` in the linear order, f_{U,ε} and its split into f^n,
/// f^c and f^a.
struct PerturbationStep {
  int class_id = -1;
  TubeSpec tube;
  PerturbResult perturbed;
  SplitMaps parts;
};
PerturbationStep perturbation_step(const ThetaContext& ctx, const LocalGradientMap& f,
                                   std::size_t position = 0);

ThetaResult theta(GroupPtr group, const DomainExpr& omega, const LocalGradientMap& f,
                  const Numerics& num);

/// Θ for S¹ acting on ℂ with a single weight k and an S¹-invariant potential
/// φ(x1, x2). The orbit space of ℂ \ {0} is the half-line r > 0, so the
/// computation runs on the real line with ±1 acting, where the half-lines
/// r > 0 and r < 0 form one quotient component. Throws UnsupportedRep unless
/// exactly one weight is given.
ThetaResult theta_radial_s1(const std::vector<int>& weights, const Polynomial& phi,
                            bool punctured, const Numerics& num);

}  // namespace egdeg
