#include "egdeg/group.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <sstream>

#include "egdeg/errors.hpp"

namespace egdeg {
namespace {

constexpr double kOrthoTol = 1e-9;
constexpr double kSameTol = 1e-8;
constexpr double kIsoTight = 1e-7;
constexpr double kIsoLoose = 1e-5;

int popcount(SubgroupMask m) { return __builtin_popcountll(m); }

std::vector<int> mask_members(SubgroupMask m) {
  std::vector<int> out;
  for (int i = 0; i < 64; ++i)
    if (m & (SubgroupMask{1} << i)) out.push_back(i);
  return out;
}

SubgroupMask bit(int i) { return SubgroupMask{1} << i; }

SubgroupMask close_mask(const FiniteGroupRep& g, SubgroupMask seed) {
  SubgroupMask m = seed | bit(0);
  for (;;) {
    SubgroupMask next = m;
    const auto members = mask_members(m);
    for (int a : members)
      for (int b : members) next |= bit(g.mul(a, b));
    if (next == m) return m;
    m = next;
  }
}

SubgroupMask conjugate_mask(const FiniteGroupRep& g, SubgroupMask m, int x) {
  SubgroupMask out = 0;
  const int xi = g.inv(x);
  for (int h : mask_members(m)) out |= bit(g.mul(g.mul(x, h), xi));
  return out;
}

int element_order(const FiniteGroupRep& g, int a) {
  int k = 1;
  for (int p = a; p != 0; p = g.mul(p, a)) ++k;
  return k;
}

}  // namespace

OrthogonalTransform OrthogonalTransform::from_matrix(const Eigen::MatrixXd& q) {
  if (q.rows() != q.cols() || q.rows() < 1 || q.rows() > kMaxDim)
    throw Error(ErrorCode::InvalidArgument, "transform must be square with 1 ≤ d ≤ 8");
  const int d = static_cast<int>(q.rows());
  const double defect =
      (q.transpose() * q - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
  if (defect > kOrthoTol) {
    std::ostringstream os;
    os << "‖QᵀQ − I‖_max = " << defect << " exceeds 1e-9";
    throw Error(ErrorCode::NotOrthogonal, os.str());
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(q, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat polar = svd.matrixU() * svd.matrixV().transpose();
  return OrthogonalTransform(std::move(polar));
}

bool OrthogonalTransform::same_as(const OrthogonalTransform& other, double tol) const {
  return q_.rows() == other.q_.rows() && (q_ - other.q_).cwiseAbs().maxCoeff() <= tol;
}

FiniteGroupRep::FiniteGroupRep(std::vector<OrthogonalTransform> elements,
                               std::vector<int> generators)
    : elements_(std::move(elements)), generators_(std::move(generators)) {
  if (elements_.empty()) throw Error(ErrorCode::InvalidArgument, "empty group");
  dim_ = elements_.front().dim();
  const int n = order();
  mul_.assign(static_cast<std::size_t>(n) * n, -1);
  inv_.assign(n, -1);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const int c = find(matrix(a) * matrix(b));
      if (c < 0) throw Error(ErrorCode::InvalidArgument, "element set is not closed");
      mul_[a * n + b] = c;
      if (c == 0) inv_[a] = b;
    }
  }
}

int FiniteGroupRep::find(const Mat& q) const {
  for (int i = 0; i < order(); ++i)
    if ((elements_[i].matrix() - q).cwiseAbs().maxCoeff() <= kSameTol) return i;
  return -1;
}

FiniteGroupRep close_group(const std::vector<OrthogonalTransform>& generators, int dim,
                           int cap) {
  for (const auto& g : generators)
    if (g.dim() != dim) throw Error(ErrorCode::InvalidArgument, "generator dimension mismatch");
  std::vector<OrthogonalTransform> elems{
      OrthogonalTransform::from_matrix(Eigen::MatrixXd::Identity(dim, dim))};
  auto index_of = [&](const Mat& q) {
    for (std::size_t i = 0; i < elems.size(); ++i)
      if ((elems[i].matrix() - q).cwiseAbs().maxCoeff() <= kSameTol) return static_cast<int>(i);
    return -1;
  };
  std::vector<int> gen_idx;
  for (const auto& g : generators) {
    int i = index_of(g.matrix());
    if (i < 0) {
      elems.push_back(g);
      i = static_cast<int>(elems.size()) - 1;
    }
    gen_idx.push_back(i);
  }
  if (static_cast<int>(elems.size()) > cap)
    throw Error(ErrorCode::ClosureOverflow, "more than " + std::to_string(cap) + " elements");
  for (std::size_t head = 0; head < elems.size(); ++head) {
    for (const auto& g : generators) {
      const Mat p = g.matrix() * elems[head].matrix();
      if (index_of(p) >= 0) continue;
      elems.push_back(OrthogonalTransform::from_matrix(Eigen::MatrixXd(p)));
      if (static_cast<int>(elems.size()) > cap)
        throw Error(ErrorCode::ClosureOverflow, "more than " + std::to_string(cap) + " elements");
    }
  }
  return FiniteGroupRep(std::move(elems), std::move(gen_idx));
}

int SubgroupLattice::find(SubgroupMask mask) const {
  auto it = index_.find(mask);
  return it == index_.end() ? -1 : it->second;
}

Eigen::MatrixXd fixed_subspace(const FiniteGroupRep& g, const SubgroupRecord& h) {
  const int d = g.dim();
  std::vector<int> nontrivial;
  for (int e : h.members)
    if (e != 0) nontrivial.push_back(e);
  if (nontrivial.empty()) return Eigen::MatrixXd::Identity(d, d);

  Eigen::MatrixXd stacked(static_cast<Eigen::Index>(nontrivial.size()) * d, d);
  for (std::size_t k = 0; k < nontrivial.size(); ++k)
    stacked.block(static_cast<Eigen::Index>(k) * d, 0, d, d) =
        g.matrix(nontrivial[k]) - Mat::Identity(d, d);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  std::vector<int> null_cols;
  for (int j = 0; j < d; ++j)
    if (j >= sv.size() || sv[j] <= 1e-9) null_cols.push_back(j);
  if (null_cols.empty()) return Eigen::MatrixXd(d, 0);

  Eigen::MatrixXd null(d, static_cast<Eigen::Index>(null_cols.size()));
  for (std::size_t j = 0; j < null_cols.size(); ++j) null.col(j) = svd.matrixV().col(null_cols[j]);
  const Eigen::MatrixXd proj = null * null.transpose();

  // Canonical basis: Gram–Schmidt on P e_1, P e_2, ...
  Eigen::MatrixXd basis(d, static_cast<Eigen::Index>(null_cols.size()));
  int filled = 0;
  for (int i = 0; i < d && filled < basis.cols(); ++i) {
    Eigen::VectorXd v = proj.col(i);
    for (int j = 0; j < filled; ++j) v -= basis.col(j).dot(v) * basis.col(j);
    for (int j = 0; j < filled; ++j) v -= basis.col(j).dot(v) * basis.col(j);
    const double n = v.norm();
    if (n > 1e-6) basis.col(filled++) = v / n;
  }
  return basis.leftCols(filled);
}

SubgroupLattice subgroup_lattice(const FiniteGroupRep& g) {
  if (g.order() > 64) throw Error(ErrorCode::ClosureOverflow, "group order exceeds 64");
  const int n = g.order();

  std::vector<SubgroupMask> cyclic;
  for (int a = 0; a < n; ++a) {
    const SubgroupMask m = close_mask(g, bit(a));
    if (std::find(cyclic.begin(), cyclic.end(), m) == cyclic.end()) cyclic.push_back(m);
  }
  std::vector<SubgroupMask> all = cyclic;
  std::unordered_map<SubgroupMask, int> seen;
  for (std::size_t i = 0; i < all.size(); ++i) seen.emplace(all[i], static_cast<int>(i));
  for (std::size_t head = 0; head < all.size(); ++head) {
    for (SubgroupMask c : cyclic) {
      if ((all[head] | c) == all[head]) continue;
      const SubgroupMask j = close_mask(g, all[head] | c);
      if (seen.emplace(j, static_cast<int>(all.size())).second) all.push_back(j);
    }
  }

  SubgroupLattice lat;
  lat.subgroups.reserve(all.size());
  for (SubgroupMask m : all) {
    SubgroupRecord r;
    r.mask = m;
    r.members = mask_members(m);
    r.order = popcount(m);
    lat.subgroups.push_back(std::move(r));
  }
  // Deterministic subgroup order: by order, then members lexicographically.
  std::sort(lat.subgroups.begin(), lat.subgroups.end(), [](const auto& a, const auto& b) {
    return a.order != b.order ? a.order < b.order : a.members < b.members;
  });
  for (std::size_t i = 0; i < lat.subgroups.size(); ++i)
    lat.index_.emplace(lat.subgroups[i].mask, static_cast<int>(i));

  // Conjugacy classes: the first subgroup met in sorted order is the
  // lexicographically smallest member of its class among equal orders.
  std::vector<int> cls(lat.subgroups.size(), -1);
  for (std::size_t i = 0; i < lat.subgroups.size(); ++i) {
    if (cls[i] >= 0) continue;
    ConjugacyClass c;
    c.id = static_cast<int>(lat.classes.size());
    c.order = lat.subgroups[i].order;
    for (int x = 0; x < n; ++x) {
      const int j = lat.find(conjugate_mask(g, lat.subgroups[i].mask, x));
      if (cls[j] < 0) {
        cls[j] = c.id;
        c.subgroups.push_back(j);
      }
    }
    std::sort(c.subgroups.begin(), c.subgroups.end());
    c.representative = c.subgroups.front();
    lat.classes.push_back(std::move(c));
  }

  for (std::size_t i = 0; i < lat.subgroups.size(); ++i) {
    auto& r = lat.subgroups[i];
    r.class_id = cls[i];
    for (int x = 0; x < n; ++x)
      if (conjugate_mask(g, r.mask, x) == r.mask) r.normalizer.push_back(x);
    SubgroupMask covered = 0;
    for (int x : r.normalizer) {
      if (covered & bit(x)) continue;
      r.weyl_coset_reps.push_back(x);
      for (int h : r.members) covered |= bit(g.mul(x, h));
    }
    r.fixed_basis = fixed_subspace(g, r);
  }

  // Names: cyclic subgroups are Z<n>, others H<n>; (e) and (G) special;
  // ambiguous names get the class id appended.
  std::vector<std::string> base(lat.classes.size());
  for (auto& c : lat.classes) {
    const auto& rep = lat.subgroups[c.representative];
    if (c.order == 1) {
      base[c.id] = "e";
    } else if (c.order == n) {
      base[c.id] = "G";
    } else {
      bool is_cyclic = false;
      for (int a : rep.members)
        if (element_order(g, a) == c.order) is_cyclic = true;
      base[c.id] = (is_cyclic ? "Z" : "H") + std::to_string(c.order);
    }
  }
  for (auto& c : lat.classes) {
    const auto dup = std::count(base.begin(), base.end(), base[c.id]);
    c.name = "(" + base[c.id] + (dup > 1 ? "#" + std::to_string(c.id) : "") + ")";
  }

  const std::size_t m = lat.classes.size();
  lat.leq.assign(m, std::vector<char>(m, 0));
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      const SubgroupMask kb = lat.subgroups[lat.classes[b].representative].mask;
      for (int s : lat.classes[a].subgroups)
        if ((lat.subgroups[s].mask & ~kb) == 0) lat.leq[a][b] = 1;
    }
  }
  return lat;
}

GroupPtr make_action(FiniteGroupRep rep, std::string description) {
  auto lattice = subgroup_lattice(rep);
  return std::make_shared<const GroupAction>(
      GroupAction{std::move(rep), std::move(lattice), std::move(description)});
}

int isotropy(const GroupAction& g, const Vec& x) {
  const double scale = 1.0 + x.norm();
  SubgroupMask m = 0;
  for (int i = 0; i < g.order(); ++i) {
    const double r = (g.rep.matrix(i) * x - x).norm();
    if (r <= kIsoTight * scale) {
      m |= bit(i);
    } else if (r < kIsoLoose * scale) {
      std::ostringstream os;
      os << "element " << i << " moves the point by " << r << ", inside the ambiguity band";
      throw Error(ErrorCode::IsotropyAmbiguous, os.str());
    }
  }
  const int idx = g.lattice.find(m);
  if (idx < 0) throw Error(ErrorCode::IsotropyAmbiguous, "stabilizer set is not a subgroup");
  return idx;
}

const SubgroupRecord& isotropy_record(const GroupAction& g, const Vec& x) {
  return g.lattice.subgroups[isotropy(g, x)];
}

std::vector<Vec> orbit_images(const GroupAction& g, const Vec& x) {
  std::vector<Vec> out;
  out.reserve(g.order());
  for (int i = 0; i < g.order(); ++i) out.push_back(g.rep.matrix(i) * x);
  return out;
}

std::vector<Vec> orbit(const GroupAction& g, const Vec& x) {
  const int stab = isotropy_record(g, x).order;
  std::vector<Vec> pts;
  for (const Vec& y : orbit_images(g, x)) {
    bool dup = false;
    for (const Vec& p : pts)
      if ((p - y).cwiseAbs().maxCoeff() <= kSameTol) dup = true;
    if (!dup) pts.push_back(y);
  }
  if (static_cast<int>(pts.size()) * stab != g.order())
    throw Error(ErrorCode::IsotropyAmbiguous, "orbit-stabilizer count mismatch");
  return pts;
}

namespace {

Eigen::MatrixXd rotation2(double angle) {
  Eigen::MatrixXd r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

GroupPtr build(const std::vector<Eigen::MatrixXd>& gens, int dim, std::string desc, int cap = 64) {
  std::vector<OrthogonalTransform> ts;
  for (const auto& m : gens) ts.push_back(OrthogonalTransform::from_matrix(m));
  return make_action(close_group(ts, dim, cap), std::move(desc));
}

}  // namespace

GroupPtr cyclic_group(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "cyclic(n) needs n ≥ 1");
  return build({rotation2(2.0 * std::numbers::pi / n)}, 2, "cyclic(" + std::to_string(n) + ")");
}

GroupPtr dihedral_group(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "dihedral(n) needs n ≥ 1");
  Eigen::MatrixXd refl(2, 2);
  refl << 1, 0, 0, -1;
  return build({rotation2(2.0 * std::numbers::pi / n), refl}, 2,
               "dihedral(" + std::to_string(n) + ")");
}

GroupPtr symmetric_group(int n) {
  if (n < 1 || n > kMaxDim) throw Error(ErrorCode::InvalidArgument, "symmetric(n) needs 1 ≤ n ≤ 8");
  std::vector<Eigen::MatrixXd> gens;
  if (n >= 2) {
    Eigen::MatrixXd swap = Eigen::MatrixXd::Identity(n, n);
    swap(0, 0) = swap(1, 1) = 0;
    swap(0, 1) = swap(1, 0) = 1;
    gens.push_back(swap);
  }
  if (n >= 3) {
    Eigen::MatrixXd cycle = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) cycle((i + 1) % n, i) = 1;
    gens.push_back(cycle);
  }
  return build(gens, n, "symmetric(" + std::to_string(n) + ")");
}

GroupPtr antipodal_group(int d) {
  if (d < 1 || d > kMaxDim) throw Error(ErrorCode::InvalidArgument, "antipodal(d) needs 1 ≤ d ≤ 8");
  return build({-Eigen::MatrixXd::Identity(d, d)}, d, "antipodal(" + std::to_string(d) + ")");
}

GroupPtr trivial_group(int d) {
  if (d < 1 || d > kMaxDim) throw Error(ErrorCode::InvalidArgument, "trivial(d) needs 1 ≤ d ≤ 8");
  return build({}, d, "trivial(" + std::to_string(d) + ")");
}

GroupPtr group_from_generators(const std::vector<Eigen::MatrixXd>& generators, int dim, int cap) {
  return build(generators, dim, "generators", cap);
}

}  // namespace egdeg
