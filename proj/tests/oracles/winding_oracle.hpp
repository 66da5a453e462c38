#pragma once

// Brouwer degree of a vector field on a box from boundary values only,
// implemented independently of the library: endpoint signs in dim 1,
// angle accumulation along a dense boundary polyline in dim 2, and the
// signed solid angle of the image of a uniformly triangulated boundary in
// dim 3. Resolution doubles until the result rounds cleanly.

#include <functional>
#include <vector>

namespace oracle {

using Point = std::vector<double>;
using VectorField = std::function<Point(const Point&)>;

struct DegreeEstimate {
  int degree = 0;
  double raw = 0.0;  // unrounded winding / solid-angle ratio
  int resolution = 0;
};

/// Throws std::runtime_error if the field nearly vanishes on the boundary
/// or no resolution up to the cap gives a clean integer.
DegreeEstimate box_degree(const VectorField& f, const Point& lo, const Point& hi);

}  // namespace oracle
