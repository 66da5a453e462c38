#include "group_oracle.hpp"

#include <algorithm>
#include <cstdint>
#include <set>
#include <stdexcept>

namespace oracle {

namespace {

int index_of(const std::vector<Matrix>& list, const Matrix& m) {
  for (std::size_t i = 0; i < list.size(); ++i)
    if ((list[i] - m).cwiseAbs().maxCoeff() <= 1e-8) return static_cast<int>(i);
  return -1;
}

}  // namespace

std::vector<Matrix> brute_closure(const std::vector<Matrix>& generators, int dim, int limit) {
  std::vector<Matrix> out{Matrix::Identity(dim, dim)};
  for (const auto& g : generators)
    if (index_of(out, g) < 0) out.push_back(g);
  bool grew = true;
  while (grew) {
    grew = false;
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const Matrix p = out[i] * out[j];
        if (index_of(out, p) < 0) {
          out.push_back(p);
          grew = true;
          if (static_cast<int>(out.size()) > limit) throw std::runtime_error("closure exceeds limit");
        }
      }
  }
  return out;
}

SubgroupCensus brute_subgroups(const std::vector<Matrix>& elements) {
  const int n = static_cast<int>(elements.size());
  if (n > 16) throw std::invalid_argument("too many elements for subset enumeration");
  const int e = index_of(elements, Matrix::Identity(elements[0].rows(), elements[0].cols()));
  std::vector<std::vector<int>> table(n, std::vector<int>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) table[a][b] = index_of(elements, elements[a] * elements[b]);

  std::vector<std::uint32_t> subgroups;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (!(mask >> e & 1u)) continue;
    bool closed = true;
    for (int a = 0; a < n && closed; ++a)
      if (mask >> a & 1u)
        for (int b = 0; b < n && closed; ++b)
          if (mask >> b & 1u) closed = mask >> table[a][b] & 1u;
    if (closed) subgroups.push_back(mask);
  }

  auto conjugate = [&](std::uint32_t mask, int g) {
    const Matrix gi = elements[g].inverse();
    std::uint32_t out = 0;
    for (int a = 0; a < n; ++a)
      if (mask >> a & 1u) out |= 1u << index_of(elements, elements[g] * elements[a] * gi);
    return out;
  };
  SubgroupCensus census;
  census.subgroups = static_cast<int>(subgroups.size());
  std::set<std::uint32_t> seen;
  for (std::uint32_t h : subgroups) {
    if (seen.count(h)) continue;
    for (int g = 0; g < n; ++g) seen.insert(conjugate(h, g));
    census.class_orders.push_back(__builtin_popcount(h));
  }
  std::sort(census.class_orders.begin(), census.class_orders.end());
  return census;
}

int stabilizer_order(const std::vector<Matrix>& elements, const Eigen::VectorXd& x, double tol) {
  int k = 0;
  for (const auto& m : elements) k += (m * x - x).norm() <= tol * (1.0 + x.norm());
  return k;
}

}  // namespace oracle
