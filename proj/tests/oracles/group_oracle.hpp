#pragma once

// Brute-force group facts for small matrix groups: closure by repeated
// multiplication, subgroups by testing every subset that contains the
// identity, conjugacy classes of subgroups by explicit conjugation.

#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Matrix = Eigen::MatrixXd;

/// All products of the generators until nothing new appears (max-norm 1e−8).
std::vector<Matrix> brute_closure(const std::vector<Matrix>& generators, int dim, int limit = 200);

struct SubgroupCensus {
  int subgroups = 0;
  std::vector<int> class_orders;  // one entry per conjugacy class, sorted
};

/// Requires at most 16 elements.
SubgroupCensus brute_subgroups(const std::vector<Matrix>& elements);

/// Elements fixing x within tol.
int stabilizer_order(const std::vector<Matrix>& elements, const Eigen::VectorXd& x, double tol = 1e-9);

}  // namespace oracle
