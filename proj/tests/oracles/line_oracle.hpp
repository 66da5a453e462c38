#pragma once

// Brute-force Θ for ±1 acting on a line (and for the radial slice of the
// S¹ demo). Written without the library: the perturbed potential is built
// from the explicit formulas for ω and μ, its derivative is sampled on a
// dense grid and critical points are counted by sign changes, which must
// agree with the boundary-sign degree.

#include <functional>
#include <optional>
#include <vector>

namespace oracle {

using Scalar = std::function<double(double)>;

/// ½s² − ε²/9 on [0, ε/3], −½(s − 2ε/3)² on [ε/3, 2ε/3], 0 beyond.
double omega(double s, double eps);
/// 0 on [0, 2ε/3], cubic smoothstep of (s − 2ε/3)/(ε/3) beyond.
double mu(double s, double eps);

/// ψ(v) = φ(μ(v)·v) + ω(v) on [0, ε), φ(v) beyond: the potential after the
/// perturbation around the origin, restricted to v ≥ 0.
double perturbed(const Scalar& phi, double v, double eps);

struct Crossing {
  double at;
  int sign;  // +1 for a − to + change of ψ′, −1 for + to −
};

struct LineResult {
  std::optional<int> theta11;    // 1 when the origin lies in the domain
  int entry = 0;                 // intersection number on the half-line
  int boundary_degree = 0;       // (sign ψ′(R) − sign ψ′(0⁺)) / 2
  std::vector<Crossing> crossings;
};

/// φ even, zeros of φ′ on (0, R) away from R. When `origin` is set the
/// domain is (−R, R) and the origin is perturbed with tube radius eps;
/// otherwise the domain is (−R, R) \ {0} and φ is used as is.
LineResult line_theta(const Scalar& phi, double radius, bool origin, double eps = 0.1,
                      int samples = 400000);

}  // namespace oracle
