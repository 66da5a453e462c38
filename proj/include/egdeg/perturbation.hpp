#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include <nlohmann/json.hpp>

#include "egdeg/local_map.hpp"
#include "egdeg/numerics.hpp"
#include "egdeg/stratification.hpp"
#include "egdeg/tube.hpp"

namespace egdeg {

/// ω(s): ½s² − ε²/9 on [0, ε/3], −½(s − 2ε/3)² on [ε/3, 2ε/3], 0 on [2ε/3, ε].
double well_omega(double s, double eps);
double well_omega_prime(double s, double eps);

/// μ(s): 0 on [0, 2ε/3], then a smoothstep of u = (s − 2ε/3)/(ε/3) rising to
/// 1 at s = ε. Cubic: 3u² − 2u³. Quintic: 6u⁵ − 15u⁴ + 10u³.
double bump_mu(double s, double eps, MuKind kind = MuKind::Cubic);
double bump_mu_prime(double s, double eps, MuKind kind = MuKind::Cubic);

/// The family φ_t over a tube: φ(r_{2t}z) for t ≤ ½, φ(r₁z) + (2t − 1)ω(|v|)
/// for t ≥ ½ on U^ε, and φ elsewhere.
PotentialPtr perturbed_potential(PotentialPtr inner, TubePtr tube, double eps, double t,
                                 MuKind mu);

/// (U, ε) for one orbit type. U is the invariant union of the balls of
/// `geometry`; an empty ball list means U = ∅.
struct TubeSpec {
  int class_id = -1;
  TubePtr geometry;
  std::vector<Vec> zeros;  // G-orbit of the zeros that U must contain
  double epsilon = 0.0;
  double margin = std::numeric_limits<double>::infinity();  // min |∇φ| sampled on B^ε
  double gap = std::numeric_limits<double>::infinity();     // min nearest-subspace gap in U^ε
  int halvings = 0;

  bool empty() const { return !geometry || geometry->empty(); }
  nlohmann::json to_json() const;
};

/// Chooses U around the given zeros (ambient points on V^H) and halves ε
/// from ε₀ until U^ε ⊂ D_f, |∇φ| > 0 on B^ε and the nearest conjugate
/// subspace is unique with gap > ε/10, each on `samples` points.
TubeSpec select_tube(const LocalGradientMap& f, int class_id, const std::vector<Vec>& zeros,
                     const Numerics& num);

/// The otopy t ↦ ∇φ_t from f off B^ε to f_{U,ε}.
struct HomotopyFamily {
  LocalGradientMap base;  // f restricted to D_f \ B^ε
  TubeSpec tube;
  MuKind mu = MuKind::Cubic;

  enum class Region { A, B, C, D, Outside };

  LocalGradientMap section(double t) const;
  Region region(double t, const Vec& z) const;
};

struct PerturbResult {
  LocalGradientMap map;  // f_{U,ε}
  HomotopyFamily family;
};

PerturbResult perturb(const LocalGradientMap& f, const TubeSpec& tube, MuKind mu);

struct SplitMaps {
  LocalGradientMap normal;      // f^n on U^{ε/3}
  LocalGradientMap complement;  // f^c off Ω_(H)
  LocalGradientMap outer;       // f^a off Ω_(H) ∪ cl U^{ε/3}
};

SplitMaps split(const LocalGradientMap& perturbed, const TubeSpec& tube);

struct RegionStats {
  int samples = 0;
  int violations = 0;
  int zero_pairs = 0;  // samples where both sides of the characterization vanish
  int twilight = 0;    // one side below the threshold, the other within 1e3 of it
  double min_norm = std::numeric_limits<double>::infinity();
  double max_defect = 0.0;
};

struct PartitionReport {
  RegionStats a, b, c, d;
  nlohmann::json to_json() const;
};

/// Samples each region of the partition of I × U^ε and checks the zero
/// characterizations. Region C uses t ∈ (½, 1]. Throws PartitionViolation
/// on the first failing sample.
PartitionReport verify_partition(const HomotopyFamily& family, int n_samples,
                                 std::uint64_t seed, double zero_thresh);

}  // namespace egdeg
