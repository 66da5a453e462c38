#include "egdeg/stratification.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "egdeg/errors.hpp"

namespace egdeg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> window_range(double lo, double hi, double h) {
  // Cells n with centre (n + ½)h in [lo, hi].
  const int a = static_cast<int>(std::ceil(lo / h - 0.5));
  const int b = static_cast<int>(std::floor(hi / h - 0.5));
  return {a, b};
}

// Enumerates candidate cells of V^H (basis b) whose centres may lie in Ω and
// in the working box, in lexicographic order.
std::vector<CellIndex> candidate_cells(const Eigen::MatrixXd& b, const DomainExpr& omega,
                                       double h, double bbox) {
  const int d = static_cast<int>(b.rows());
  const int k = static_cast<int>(b.cols());
  const double reach = bbox * std::sqrt(static_cast<double>(d));
  struct Box {
    std::array<int, kMaxDim> lo{}, hi{};
  };
  std::vector<Box> boxes;
  auto add_box = [&](const Vec& yc, double r) {
    Box bx;
    for (int j = 0; j < k; ++j) {
      const auto rg = window_range(std::max(yc[j] - r, -reach), std::min(yc[j] + r, reach), h);
      if (rg[0] > rg[1]) return;
      bx.lo[j] = rg[0];
      bx.hi[j] = rg[1];
    }
    boxes.push_back(bx);
  };
  const auto support = omega.support(d);
  if (!support) {
    add_box(Vec::Zero(k), reach);
  } else {
    for (const auto& ball : *support) {
      const Vec yc = b.transpose() * ball.center;
      const double dist = (ball.center - b * yc).norm();
      if (dist >= ball.radius) continue;
      add_box(yc, std::sqrt(ball.radius * ball.radius - dist * dist));
    }
  }
  std::vector<CellIndex> out;
  for (const auto& bx : boxes) {
    CellIndex c{};
    for (int j = 0; j < k; ++j) c[j] = bx.lo[j];
    for (;;) {
      out.push_back(c);
      int j = k - 1;
      while (j >= 0 && c[j] == bx.hi[j]) {
        c[j] = bx.lo[j];
        --j;
      }
      if (j < 0) break;
      ++c[j];
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Vec cell_center(const CellIndex& c, int k, double h) {
  Vec y(k);
  for (int j = 0; j < k; ++j) y[j] = (c[j] + 0.5) * h;
  return y;
}

bool in_box(const Vec& p, double bbox) { return p.cwiseAbs().maxCoeff() <= bbox; }

double distance_to(const std::vector<Eigen::MatrixXd>& projectors, const Vec& y) {
  double d = kInf;
  for (const auto& p : projectors) d = std::min(d, (y - p * y).norm());
  return d;
}

}  // namespace

std::size_t CellIndexHash::operator()(const CellIndex& c) const noexcept {
  std::size_t h = 0x9e3779b97f4a7c15ULL;
  for (int v : c) h = (h ^ static_cast<std::size_t>(static_cast<unsigned>(v))) * 0x100000001b3ULL;
  return h;
}

int OrbitTypeLattice::position(int class_id) const {
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (classes[i] == class_id) return static_cast<int>(i);
  return -1;
}

std::vector<Eigen::MatrixXd> larger_subspaces(const GroupAction& g, int subgroup) {
  const auto& subs = g.lattice.subgroups;
  const SubgroupMask hm = subs[subgroup].mask;
  std::vector<Eigen::MatrixXd> out;
  for (const auto& k : subs) {
    if (k.mask == hm || (k.mask & hm) != hm) continue;
    const Eigen::MatrixXd p = k.fixed_basis * k.fixed_basis.transpose();
    bool dup = false;
    for (const auto& q : out) dup = dup || (p - q).cwiseAbs().maxCoeff() <= 1e-9;
    if (!dup) out.push_back(p);
  }
  return out;
}

void conjugate_subspaces(const GroupAction& g, int class_id, std::vector<Eigen::MatrixXd>& bases,
                         std::vector<int>& elements) {
  bases.clear();
  elements.clear();
  const auto& b = g.lattice.representative(class_id).fixed_basis;
  std::vector<Eigen::MatrixXd> projectors;
  for (int e = 0; e < g.order(); ++e) {
    const Eigen::MatrixXd gb = g.rep.matrix(e) * b;
    const Eigen::MatrixXd p = gb * gb.transpose();
    bool dup = false;
    for (const auto& q : projectors) dup = dup || (p - q).cwiseAbs().maxCoeff() <= 1e-9;
    if (dup) continue;
    projectors.push_back(p);
    bases.push_back(gb);
    elements.push_back(e);
  }
}

OrbitTypeLattice iso_types(const GroupAction& g, const DomainExpr& omega, const StrataOptions& opt) {
  OrbitTypeLattice out;
  const int d = g.dim();
  std::vector<int> order(g.lattice.classes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return g.lattice.classes[a].order > g.lattice.classes[b].order;
  });
  for (int cid : order) {
    const auto& cls = g.lattice.classes[cid];
    const auto& rep = g.lattice.subgroups[cls.representative];
    const Eigen::MatrixXd& b = rep.fixed_basis;
    const int k = static_cast<int>(b.cols());
    if (k == 0) {
      if (cls.order == g.order() && omega.contains(Vec::Zero(d))) {
        out.classes.push_back(cid);
        out.witnesses.push_back(Vec::Zero(d));
      }
      continue;
    }
    bool found = false;
    for (const auto& c : candidate_cells(b, omega, opt.h, opt.bbox)) {
      const Vec p = b * cell_center(c, k, opt.h);
      if (!in_box(p, opt.bbox) || !omega.contains(p)) continue;
      try {
        if (isotropy(g, p) != cls.representative) continue;
      } catch (const Error&) {
        continue;
      }
      out.classes.push_back(cid);
      out.witnesses.push_back(p);
      found = true;
      break;
    }
    if (!found) {
      bool generic = true;
      for (const auto& p : larger_subspaces(g, cls.representative))
        generic = generic && std::lround(p.trace()) < k;
      if (generic) {
        std::ostringstream os;
        os << to_string(ErrorCode::NoWitness) << ": no grid point of type " << cls.name
           << " found in the domain; class omitted";
        out.warnings.push_back(os.str());
      }
    }
  }
  return out;
}

Vec Stratum::center(const CellIndex& c) const { return cell_center(c, dim(), h); }

double Stratum::clearance(const Vec& y) const { return distance_to(larger, y); }

int Stratum::nearest_cell(const Vec& y, double reach) const {
  const int k = dim();
  const int w = k <= 3 ? 2 : 1;
  CellIndex base{};
  for (int j = 0; j < k; ++j) base[j] = static_cast<int>(std::floor(y[j] / h));
  CellIndex off{};
  for (int j = 0; j < k; ++j) off[j] = -w;
  int best = -1;
  double best_d = kInf;
  for (;;) {
    CellIndex c{};
    for (int j = 0; j < k; ++j) c[j] = base[j] + off[j];
    auto it = cell_component_.find(c);
    if (it != cell_component_.end()) {
      const double dist = (center(c) - y).norm();
      if (dist < best_d) {
        best_d = dist;
        best = it->second;
      }
    }
    int j = k - 1;
    while (j >= 0 && off[j] == w) {
      off[j] = -w;
      --j;
    }
    if (j < 0) break;
    ++off[j];
  }
  return best >= 0 && best_d < reach ? best : -1;
}

int Stratum::locate_coords(const Vec& y, const DomainExpr& omega) const {
  // The ball of radius `reach` around y lies in Ω_H, so a kept cell centre
  // inside it is in the same component. When none is that close, climb the
  // reach function with steps of half the reach; each step stays inside the
  // current ball, so the component never changes.
  auto reach_at = [&](const Vec& p) { return std::min(clearance(p), omega.margin(basis * p)); };
  Vec p = y;
  for (int step = 0; step < 256; ++step) {
    const double reach = reach_at(p);
    if (!(reach > 0.0)) return -1;
    const int c = nearest_cell(p, reach);
    if (c >= 0) return c;
    const double e = 0.05 * reach;
    Vec grad(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      Vec a = p, b = p;
      a[i] += e;
      b[i] -= e;
      grad[i] = reach_at(a) - reach_at(b);
    }
    const double n = grad.norm();
    if (!(n > 1e-12 * reach)) return -1;
    p += (0.5 * reach / n) * grad;
  }
  return -1;
}

std::pair<int, int> Stratum::locate(const GroupAction& g, const DomainExpr& omega, const Vec& x) const {
  const Vec y = basis.transpose() * x;
  if ((x - basis * y).norm() > 1e-8 * (1.0 + x.norm()))
    throw Error(ErrorCode::NotInStratum, "point is not in the fixed subspace");
  int iso = -1;
  try {
    iso = isotropy(g, x);
  } catch (const Error& e) {
    throw Error(ErrorCode::NotInStratum, e.what());
  }
  if (iso != subgroup) throw Error(ErrorCode::NotInStratum, "isotropy differs from the stratum type");
  const int c = locate_coords(y, omega);
  if (c < 0) throw Error(ErrorCode::NotInStratum, "no grid cell of the stratum near the point");
  return {c, components[c].quotient};
}

std::string Stratum::component_label(int c) const {
  std::ostringstream os;
  os << "(";
  for (int j = 0; j < dim(); ++j) os << (j ? "," : "") << components[c].label[j];
  os << ")";
  return os.str();
}

Stratum build_stratum(const GroupAction& g, const DomainExpr& omega, int class_id,
                      const StrataOptions& opt) {
  const auto& cls = g.lattice.classes.at(class_id);
  const auto& rep = g.lattice.subgroups[cls.representative];
  Stratum s;
  s.class_id = class_id;
  s.subgroup = cls.representative;
  s.basis = rep.fixed_basis;
  s.h = opt.h;
  const int k = s.dim();
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "zero-dimensional strata have no grid");
  for (const auto& p : larger_subspaces(g, cls.representative))
    s.larger.push_back(s.basis.transpose() * p * s.basis);
  conjugate_subspaces(g, class_id, s.conjugate_bases, s.conjugate_elements);
  for (int w : rep.weyl_coset_reps) s.weyl.emplace_back(s.basis.transpose() * g.rep.matrix(w) * s.basis);

  // Keep cells whose centre lies in Ω, in the box, and more than h away
  // from every larger-isotropy subspace.
  std::vector<CellIndex> kept;
  for (const auto& c : candidate_cells(s.basis, omega, opt.h, opt.bbox)) {
    const Vec y = s.center(c);
    const Vec p = s.basis * y;
    if (!in_box(p, opt.bbox) || !omega.contains(p) || s.clearance(y) <= opt.h) continue;
    kept.push_back(c);
  }
  std::unordered_map<CellIndex, int, CellIndexHash> visited;
  visited.reserve(kept.size() * 2);
  for (const auto& c : kept) visited.emplace(c, -1);
  for (const auto& c0 : kept) {
    if (visited[c0] >= 0) continue;
    const int id = static_cast<int>(s.components.size());
    Component comp;
    comp.label = c0;
    std::deque<CellIndex> queue{c0};
    visited[c0] = id;
    while (!queue.empty()) {
      const CellIndex c = queue.front();
      queue.pop_front();
      comp.cells.push_back(c);
      for (int j = 0; j < k; ++j)
        for (int step : {-1, 1}) {
          CellIndex n = c;
          n[j] += step;
          auto it = visited.find(n);
          if (it != visited.end() && it->second < 0) {
            it->second = id;
            queue.push_back(n);
          }
        }
    }
    std::sort(comp.cells.begin(), comp.cells.end());
    double best = -kInf;
    for (const auto& c : comp.cells) {
      const Vec y = s.center(c);
      const double score = std::min({s.clearance(y), omega.margin(s.basis * y), opt.bbox - y.norm()});
      if (score > best) {
        best = score;
        comp.interior = y;
      }
    }
    s.components.push_back(std::move(comp));
  }
  s.cell_component_ = std::move(visited);

  const int nc = static_cast<int>(s.components.size());
  for (std::size_t w = 0; w < s.weyl.size(); ++w) {
    std::vector<int> perm(nc);
    std::vector<char> hit(nc, 0);
    for (int c = 0; c < nc; ++c) {
      const int t = s.locate_coords(s.weyl[w] * s.components[c].interior, omega);
      if (t < 0 || hit[t]) {
        std::ostringstream os;
        os << "Weyl image of component " << s.component_label(c) << " of type " << cls.name
           << " could not be matched; refine grid_h";
        throw Error(ErrorCode::ResolutionTooCoarse, os.str());
      }
      hit[t] = 1;
      perm[c] = t;
    }
    s.weyl_perm.push_back(std::move(perm));
  }
  const int wh = s.weyl_order();
  for (int c = 0; c < nc; ++c) {
    if (s.components[c].quotient >= 0) continue;
    const int q = static_cast<int>(s.quotient_reps.size());
    s.quotient_reps.push_back(c);
    std::vector<int> orbit;
    for (int w = 0; w < wh; ++w) orbit.push_back(s.weyl_perm[w][c]);
    std::sort(orbit.begin(), orbit.end());
    orbit.erase(std::unique(orbit.begin(), orbit.end()), orbit.end());
    const int size = static_cast<int>(orbit.size());
    if (wh % size != 0) throw Error(ErrorCode::DivisibilityViolation, "Weyl orbit size does not divide |WH|");
    for (int m : orbit) {
      s.components[m].quotient = q;
      s.components[m].stabilizer = wh / size;
    }
  }

  if (opt.refine_check) {
    StrataOptions fine = opt;
    fine.h = opt.h / 2.0;
    fine.refine_check = false;
    const Stratum f = build_stratum(g, omega, class_id, fine);
    std::vector<int> image(nc, -1);
    for (int c = 0; c < nc; ++c) {
      image[c] = f.locate_coords(s.components[c].interior, omega);
      for (int e = 0; e < c; ++e)
        if (image[c] >= 0 && image[e] == image[c]) {
          std::ostringstream os;
          os << "components " << s.component_label(e) << " and " << s.component_label(c)
             << " of type " << cls.name << " merge at h/2";
          throw Error(ErrorCode::ResolutionTooCoarse, os.str());
        }
    }
    if (f.components.size() < s.components.size())
      throw Error(ErrorCode::ResolutionTooCoarse, "halving h reduced the component count of " + cls.name);
  }
  return s;
}

}  // namespace egdeg
