#pragma once

#include <cstdint>

namespace egdeg {

enum class MuKind { Cubic, Quintic };

/// Numerical knobs shared by stratification, zero finding and the recursion.
struct Numerics {
  double grid_h = 0.1;        // stratum grid step
  double bbox = 2.0;          // half-width of the working box
  double newton_tol = 1e-10;  // residual target for polishing
  double zero_thresh = 1e-8;  // residual below which a point counts as a zero
  std::uint64_t seed = 1;
  int max_halvings = 20;
  bool refine_check = true;
  MuKind mu_kind = MuKind::Cubic;
  int samples = 500;          // tube validation samples per condition
};

}  // namespace egdeg
