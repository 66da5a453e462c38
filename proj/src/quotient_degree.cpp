#include "egdeg/quotient_degree.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <numbers>
#include <unordered_map>

#include "egdeg/errors.hpp"
#include "egdeg/parallel.hpp"
#include "egdeg/rng.hpp"

namespace egdeg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinFieldNorm = 1e-13;
constexpr double kRoundingResidual = 0.2;
constexpr int kRefineRounds = 5;
constexpr long kMaxFineCells = 16'000'000;
// Points this close to a larger-isotropy subspace belong to that stratum.
constexpr double kOnLargerTol = 1e-7;

CellIndex offset(CellIndex c, int axis, int delta) {
  c[axis] += delta;
  return c;
}

void check_boundary_value(const Vec& v, KroneckerStats& st) {
  const double n = v.norm();
  if (!std::isfinite(n) || n < kMinFieldNorm)
    throw Error(ErrorCode::MarginTooSmall, "field vanishes on the region boundary");
  st.min_norm = std::min(st.min_norm, n);
}

struct Facet {
  CellIndex cell;
  int axis;
  int sign;
};

std::vector<Facet> boundary_facets(const GridRegion& r) {
  std::vector<Facet> out;
  const int d = r.dim();
  for (const auto& c : r.cells())
    for (int a = 0; a < d; ++a)
      for (int s : {-1, 1})
        if (!r.contains(offset(c, a, s))) out.push_back({c, a, s});
  return out;
}

double degree_1d(const Field& field, const GridRegion& r, KroneckerStats& st) {
  const auto facets = boundary_facets(r);
  std::vector<double> contrib(facets.size());
  std::vector<Vec> values(facets.size());
  parallel_for(facets.size(), [&](std::size_t i) {
    const auto& f = facets[i];
    const CellIndex v = f.sign > 0 ? offset(f.cell, 0, 1) : f.cell;
    values[i] = field(r.vertex(v));
  });
  double total = 0.0;
  for (std::size_t i = 0; i < facets.size(); ++i) {
    check_boundary_value(values[i], st);
    total += 0.5 * facets[i].sign * (values[i][0] > 0 ? 1.0 : -1.0);
  }
  st.faces = static_cast<int>(facets.size());
  st.evaluations += static_cast<long>(facets.size());
  return total;
}

// Signed angle from a to b in the plane.
double turn(const Vec& a, const Vec& b) {
  return std::atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1]);
}

struct EdgeWalk {
  const Field& field;
  double threshold;
  long evals = 0;
  double min_norm = kInf;
  bool overflow = false;

  double run(const Vec& pa, const Vec& fa, const Vec& pb, const Vec& fb, int depth) {
    const double ang = turn(fa, fb);
    if (std::abs(ang) < threshold) return ang;
    if (depth >= 40) {
      overflow = true;
      return ang;
    }
    const Vec pm = 0.5 * (pa + pb);
    const Vec fm = field(pm);
    ++evals;
    const double n = fm.norm();
    if (!std::isfinite(n) || n < kMinFieldNorm)
      throw Error(ErrorCode::MarginTooSmall, "field vanishes on the region boundary");
    min_norm = std::min(min_norm, n);
    return run(pa, fa, pm, fm, depth + 1) + run(pm, fm, pb, fb, depth + 1);
  }
};

// Vertex values shared by all boundary facets, evaluated once.
struct VertexTable {
  std::unordered_map<CellIndex, std::size_t, CellIndexHash> slot;
  std::vector<CellIndex> keys;
  std::vector<Vec> values;

  std::size_t add(const CellIndex& v) {
    auto [it, fresh] = slot.emplace(v, keys.size());
    if (fresh) keys.push_back(v);
    return it->second;
  }
  void evaluate(const Field& field, const GridRegion& r, KroneckerStats& st) {
    values.resize(keys.size());
    parallel_for(keys.size(), [&](std::size_t i) { values[i] = field(r.vertex(keys[i])); });
    for (const auto& v : values) check_boundary_value(v, st);
    st.evaluations += static_cast<long>(keys.size());
  }
};

double degree_2d(const Field& field, const GridRegion& r, KroneckerStats& st) {
  const auto facets = boundary_facets(r);
  VertexTable table;
  std::vector<std::array<std::size_t, 2>> edges(facets.size());
  for (std::size_t i = 0; i < facets.size(); ++i) {
    const auto& f = facets[i];
    const CellIndex c = f.cell;
    const CellIndex c10 = offset(c, 0, 1), c01 = offset(c, 1, 1), c11 = offset(c10, 1, 1);
    CellIndex a, b;
    if (f.axis == 0 && f.sign > 0) { a = c10; b = c11; }
    else if (f.axis == 1 && f.sign > 0) { a = c11; b = c01; }
    else if (f.axis == 0) { a = c01; b = c; }
    else { a = c; b = c10; }
    edges[i] = {table.add(a), table.add(b)};
  }
  table.evaluate(field, r, st);
  st.faces = static_cast<int>(facets.size());

  double threshold = kPi / 4;
  for (int round = 0; round < kRefineRounds; ++round, threshold /= 2) {
    std::vector<double> angle(edges.size());
    std::vector<long> evals(edges.size());
    std::vector<double> mins(edges.size());
    std::vector<char> over(edges.size());
    parallel_for(edges.size(), [&](std::size_t i) {
      EdgeWalk w{field, threshold};
      const auto [ia, ib] = edges[i];
      angle[i] = w.run(r.vertex(table.keys[ia]), table.values[ia], r.vertex(table.keys[ib]),
                       table.values[ib], 0);
      evals[i] = w.evals;
      mins[i] = w.min_norm;
      over[i] = w.overflow;
    });
    double total = 0.0;
    bool overflow = false;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      total += angle[i];
      st.evaluations += evals[i];
      st.min_norm = std::min(st.min_norm, mins[i]);
      overflow = overflow || over[i];
    }
    const double w = total / (2 * kPi);
    st.residual = std::abs(w - std::round(w));
    if (!overflow && st.residual <= kRoundingResidual) return w;
  }
  throw Error(ErrorCode::RefinementOverflow, "winding number did not settle");
}

double angle_between(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

// Van Oosterom–Strackee solid angle of the spherical triangle a, b, c.
double solid_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                   const Eigen::Vector3d& c) {
  const Eigen::Vector3d u = a.normalized(), v = b.normalized(), w = c.normalized();
  const double num = u.dot(v.cross(w));
  const double den = 1.0 + u.dot(v) + v.dot(w) + w.dot(u);
  return 2.0 * std::atan2(num, den);
}

// Guards against refinement chasing a near-singular boundary point.
constexpr int kMaxTriangleDepth = 160;
constexpr long kMaxTriangleEvals = 200000;

struct Node3 {
  Eigen::Vector3d p;
  Eigen::Vector3d f;
};

// Edge-based conforming refinement: whether an edge splits depends only on
// its endpoints, so neighbouring triangles always agree.
struct TriangleWalk {
  const Field& field;
  double threshold;
  double min_len;
  long evals = 0;
  double min_norm = kInf;
  bool overflow = false;

  bool splits(const Node3& a, const Node3& b) {
    if (angle_between(a.f, b.f) <= threshold) return false;
    if ((a.p - b.p).norm() < min_len) {
      overflow = true;
      return false;
    }
    return true;
  }
  Node3 mid(const Node3& a, const Node3& b) {
    Node3 m;
    m.p = 0.5 * (a.p + b.p);
    Vec pv = m.p;
    const Vec fv = field(pv);
    ++evals;
    const double n = fv.norm();
    if (!std::isfinite(n) || n < kMinFieldNorm)
      throw Error(ErrorCode::MarginTooSmall, "field vanishes on the region boundary");
    min_norm = std::min(min_norm, n);
    m.f = fv;
    return m;
  }
  double run(const Node3& a, const Node3& b, const Node3& c, int depth = 0) {
    if (overflow) return 0.0;
    if (depth > kMaxTriangleDepth || evals > kMaxTriangleEvals) {
      overflow = true;
      return 0.0;
    }
    const bool sab = splits(a, b), sbc = splits(b, c), sca = splits(c, a);
    const int n = sab + sbc + sca;
    if (n == 0) return solid_angle(a.f, b.f, c.f);
    const int next = depth + 1;
    if (n == 1) {
      if (sbc) return run(b, c, a, depth);
      if (sca) return run(c, a, b, depth);
      const Node3 m = mid(a, b);
      return run(a, m, c, next) + run(m, b, c, next);
    }
    if (n == 2) {
      if (!sab) return run(b, c, a, depth);
      if (!sbc) return run(c, a, b, depth);
      const Node3 mab = mid(a, b), mbc = mid(b, c);
      return run(a, mab, c, next) + run(mab, b, mbc, next) + run(mab, mbc, c, next);
    }
    const Node3 mab = mid(a, b), mbc = mid(b, c), mca = mid(c, a);
    return run(a, mab, mca, next) + run(mab, b, mbc, next) + run(mca, mbc, c, next) +
           run(mab, mbc, mca, next);
  }
};

double degree_3d(const Field& field, const GridRegion& r, KroneckerStats& st) {
  static constexpr int kPlane[3][2] = {{1, 2}, {2, 0}, {0, 1}};
  const auto facets = boundary_facets(r);
  VertexTable table;
  std::vector<std::array<std::size_t, 4>> quads(facets.size());
  for (std::size_t i = 0; i < facets.size(); ++i) {
    const auto& f = facets[i];
    const int p = kPlane[f.axis][0], q = kPlane[f.axis][1];
    const CellIndex base = f.sign > 0 ? offset(f.cell, f.axis, 1) : f.cell;
    std::array<CellIndex, 4> corner = {base, offset(base, p, 1), offset(offset(base, p, 1), q, 1),
                                       offset(base, q, 1)};
    if (f.sign < 0) std::swap(corner[1], corner[3]);
    for (int j = 0; j < 4; ++j) quads[i][j] = table.add(corner[j]);
  }
  table.evaluate(field, r, st);
  st.faces = static_cast<int>(facets.size());
  const double min_len = r.step().minCoeff() * std::ldexp(1.0, -16);

  double threshold = kPi / 6;
  for (int round = 0; round < kRefineRounds; ++round, threshold /= 2) {
    std::vector<double> omega(quads.size());
    std::vector<long> evals(quads.size());
    std::vector<double> mins(quads.size());
    std::vector<char> over(quads.size());
    parallel_for(quads.size(), [&](std::size_t i) {
      TriangleWalk w{field, threshold, min_len};
      std::array<Node3, 4> n;
      for (int j = 0; j < 4; ++j) {
        n[j].p = r.vertex(table.keys[quads[i][j]]);
        n[j].f = table.values[quads[i][j]];
      }
      omega[i] = w.run(n[0], n[1], n[2]) + w.run(n[0], n[2], n[3]);
      evals[i] = w.evals;
      mins[i] = w.min_norm;
      over[i] = w.overflow;
    });
    double total = 0.0;
    bool overflow = false;
    for (std::size_t i = 0; i < quads.size(); ++i) {
      total += omega[i];
      st.evaluations += evals[i];
      st.min_norm = std::min(st.min_norm, mins[i]);
      overflow = overflow || over[i];
    }
    const double deg = total / (4 * kPi);
    st.residual = std::abs(deg - std::round(deg));
    if (!overflow && st.residual <= kRoundingResidual) return deg;
  }
  throw Error(ErrorCode::RefinementOverflow, "solid-angle sum did not settle");
}

Mat fd_jacobian(const Field& field, const Vec& y, double eta, int mode) {
  // mode 0: central, +1: forward, −1: backward.
  const int k = static_cast<int>(y.size());
  Mat J(k, k);
  const Vec f0 = mode != 0 ? field(y) : Vec();
  for (int j = 0; j < k; ++j) {
    const double hj = eta * std::max(1.0, std::abs(y[j]));
    Vec yp = y, ym = y;
    yp[j] += hj;
    ym[j] -= hj;
    if (mode == 0) J.col(j) = (field(yp) - field(ym)) / (2 * hj);
    else if (mode > 0) J.col(j) = (field(yp) - f0) / hj;
    else J.col(j) = (f0 - field(ym)) / hj;
  }
  return J;
}

std::optional<Vec> newton_from(const Field& field, const Predicate& inside, Vec y,
                               const NewtonOptions& opt) {
  if (!inside(y)) return std::nullopt;
  const int k = static_cast<int>(y.size());
  Vec r = field(y);
  double rn = r.norm();
  double lambda = 1e-6;
  for (int it = 0; it < opt.max_iter && rn > opt.tol; ++it) {
    const Mat J = fd_jacobian(field, y, 1e-7, 0);
    const Mat JtJ = J.transpose() * J;
    const Vec Jtr = J.transpose() * r;
    const double scale = std::max(JtJ.diagonal().maxCoeff(), 1e-300);
    bool accepted = false;
    for (int tries = 0; tries < 12; ++tries) {
      const Mat A = JtJ + (lambda * scale) * Mat::Identity(k, k);
      Vec step = -A.ldlt().solve(Jtr);
      if (!step.allFinite()) {
        lambda *= 10;
        continue;
      }
      const double sn = step.norm();
      if (sn > opt.max_step) step *= opt.max_step / sn;
      const Vec yn = y + step;
      if (inside(yn)) {
        const Vec rnew = field(yn);
        const double nn = rnew.norm();
        if (nn < rn) {
          y = yn;
          r = rnew;
          rn = nn;
          lambda = std::max(lambda / 10, 1e-12);
          accepted = true;
          break;
        }
      }
      lambda *= 10;
    }
    if (!accepted) break;
  }
  if (rn > opt.zero_thresh) return std::nullopt;
  return y;
}

bool lex_less(const Vec& a, const Vec& b) {
  for (int i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return a[i] < b[i];
  return false;
}

}  // namespace

GridRegion::GridRegion(Vec origin, Vec step, std::vector<CellIndex> cells)
    : origin_(std::move(origin)), step_(std::move(step)), cells_(std::move(cells)) {
  std::sort(cells_.begin(), cells_.end());
  cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
  set_.reserve(cells_.size() * 2);
  for (const auto& c : cells_) set_.insert(c);
}

Vec GridRegion::vertex(const CellIndex& v) const {
  Vec p(dim());
  for (int i = 0; i < dim(); ++i) p[i] = origin_[i] + v[i] * step_[i];
  return p;
}

GridRegion box_region(const Vec& lo, const Vec& hi, int n) {
  const int d = static_cast<int>(lo.size());
  if (n < 1 || d < 1 || d > kMaxDim || hi.size() != d || (hi - lo).minCoeff() <= 0)
    throw Error(ErrorCode::InvalidArgument, "degenerate box");
  std::vector<CellIndex> cells;
  CellIndex c{};
  for (;;) {
    cells.push_back(c);
    int j = d - 1;
    while (j >= 0 && c[j] == n - 1) c[j--] = 0;
    if (j < 0) break;
    ++c[j];
  }
  return GridRegion(lo, (hi - lo) / n, std::move(cells));
}

int kronecker_degree(const Field& field, const GridRegion& region, KroneckerStats* stats) {
  KroneckerStats local;
  KroneckerStats& st = stats ? *stats : local;
  st = KroneckerStats{};
  const int d = region.dim();
  if (d > 3) throw Error(ErrorCode::DimensionUnsupported, "boundary degree needs dim ≤ 3");
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "boundary degree needs dim ≥ 1");
  if (region.cells().empty()) return 0;
  double value = 0.0;
  if (d == 1) value = degree_1d(field, region, st);
  else if (d == 2) value = degree_2d(field, region, st);
  else value = degree_3d(field, region, st);
  return static_cast<int>(std::lround(value));
}

int kronecker_box(const Field& field, const Vec& lo, const Vec& hi, KroneckerStats* stats) {
  const int n = lo.size() == 3 ? 6 : 8;
  return kronecker_degree(field, box_region(lo, hi, n), stats);
}

int zero_index(const Field& field, const Vec& y) {
  // The central Jacobian must agree in sign with Jacobians taken just off the
  // zero in every ± axis direction; this exposes kinks in any orientation.
  const int k = static_cast<int>(y.size());
  constexpr double eta = 1e-5;
  const Mat Jc = fd_jacobian(field, y, eta, 0);
  const double dc = Jc.determinant();
  const double scale = std::pow(std::max(1.0, Jc.cwiseAbs().maxCoeff()), k);
  if (!std::isfinite(dc) || std::abs(dc) <= 1e-10 * scale) return 0;
  const int s = dc > 0 ? 1 : -1;
  for (int j = 0; j < k; ++j)
    for (int sgn : {-1, 1}) {
      Vec yp = y;
      yp[j] += sgn * eta * std::max(1.0, std::abs(y[j]));
      const Mat J = fd_jacobian(field, yp, eta / 16, 0);
      const double dm = J.determinant();
      if (!(dm * s > 1e-3 * std::abs(dc))) return 0;
    }
  // Near a kink the residual can be tiny on a flat side while the true zero
  // sits on the crease; a small boundary degree settles the local index.
  if (k <= 3) {
    const Vec r = Vec::Constant(k, 1e-3 * std::max(1.0, y.cwiseAbs().maxCoeff()));
    try {
      if (kronecker_degree(field, box_region(y - r, y + r, 2)) != s) return 0;
    } catch (const Error&) {
      return 0;
    }
  }
  return s;
}

std::vector<ZeroRecord> solve_zeros(const Field& field, const Predicate& inside,
                                    const std::vector<Vec>& seeds, const NewtonOptions& opt,
                                    NewtonStats* stats) {
  std::vector<std::optional<Vec>> found(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) { found[i] = newton_from(field, inside, seeds[i], opt); });
  std::vector<Vec> pts;
  for (const auto& f : found)
    if (f) pts.push_back(*f);
  if (stats) {
    stats->starts += static_cast<int>(seeds.size());
    stats->converged += static_cast<int>(pts.size());
    stats->failed += static_cast<int>(seeds.size() - pts.size());
  }
  std::sort(pts.begin(), pts.end(), lex_less);
  std::vector<Vec> kept;
  for (const auto& p : pts) {
    bool dup = false;
    for (const auto& q : kept)
      if ((p - q).norm() <= opt.dedupe) {
        dup = true;
        break;
      }
    if (!dup) kept.push_back(p);
  }
  std::vector<ZeroRecord> out(kept.size());
  parallel_for(kept.size(), [&](std::size_t i) {
    out[i].point = kept[i];
    out[i].residual = field(kept[i]).norm();
    out[i].index = zero_index(field, kept[i]);
  });
  return out;
}

std::optional<int> morse_sum(const std::vector<ZeroRecord>& zeros) {
  int total = 0;
  for (const auto& z : zeros) {
    if (z.index == 0) return std::nullopt;
    total += z.index;
  }
  return total;
}

std::vector<ZeroRecord> find_zeros_box(const Field& field, const Vec& lo, const Vec& hi,
                                       int seeds_per_axis, const NewtonOptions& opt,
                                       NewtonStats* stats) {
  const int d = static_cast<int>(lo.size());
  const GridRegion grid = box_region(lo, hi, seeds_per_axis);
  std::vector<Vec> seeds;
  seeds.reserve(grid.cells().size());
  for (const auto& c : grid.cells()) seeds.push_back(grid.vertex(c) + 0.5 * grid.step());
  const Predicate inside = [&](const Vec& y) {
    for (int i = 0; i < d; ++i)
      if (y[i] <= lo[i] || y[i] >= hi[i]) return false;
    return true;
  };
  NewtonOptions o = opt;
  o.max_step = std::min(opt.max_step, 2.0 * grid.step().maxCoeff());
  return solve_zeros(field, inside, seeds, o, stats);
}

nlohmann::json DegreeResult::to_json() const {
  nlohmann::json j;
  j["value"] = value;
  j["method"] = method;
  j["morse"] = morse ? nlohmann::json(*morse) : nlohmann::json(nullptr);
  j["kronecker"] = kronecker ? nlohmann::json(*kronecker) : nlohmann::json(nullptr);
  j["zeros"] = zeros;
  j["degenerate"] = degenerate;
  return j;
}

int tilt_degree(const Field& field, const Predicate& inside, const std::vector<Vec>& seeds,
                double delta, std::uint64_t seed, const NewtonOptions& opt) {
  if (seeds.empty()) return 0;
  const int k = static_cast<int>(seeds.front().size());
  std::optional<int> first;
  for (std::uint64_t r = 0; r < 2; ++r) {
    Rng rng(seed, 0x74696c7400ULL + r);
    const Vec u = rng.direction(k);
    const Field tilted = [&](const Vec& y) -> Vec { return field(y) + delta * u; };
    const auto zeros = solve_zeros(tilted, inside, seeds, opt);
    const auto m = morse_sum(zeros);
    if (!m) throw Error(ErrorCode::DegenerateUnresolved, "tilted field still has degenerate zeros");
    if (first && *first != *m)
      throw Error(ErrorCode::DegenerateUnresolved, "tilt directions disagree");
    first = m;
  }
  return *first;
}

int quotient_intersection(int component_degree, int stabilizer) {
  if (stabilizer <= 0) throw Error(ErrorCode::InvalidArgument, "stabilizer order must be positive");
  if (component_degree % stabilizer != 0)
    throw Error(ErrorCode::DivisibilityViolation,
                "component degree " + std::to_string(component_degree) +
                    " not divisible by stabilizer order " + std::to_string(stabilizer));
  return component_degree / stabilizer;
}

// ---------------------------------------------------------------------------
// Stratum degrees

namespace {

struct FineScan {
  Vec origin;
  double delta = 0.0;
  std::array<int, kMaxDim> lo{}, extent{};
  int k = 0;

  Vec center(const CellIndex& c) const {
    Vec y(k);
    for (int j = 0; j < k; ++j) y[j] = origin[j] + (c[j] + 0.5) * delta;
    return y;
  }
  bool on_edge(const CellIndex& c) const {
    for (int j = 0; j < k; ++j)
      if (c[j] == lo[j] || c[j] == lo[j] + extent[j] - 1) return true;
    return false;
  }
};

// Raised when a piece of the target component reaches the edge of the scan
// box; the caller retries with a larger box.
struct ScanTooSmall {};

struct Piece {
  std::vector<long> cells;  // flat indices, ascending
  int component = -1;
  bool touches_edge = false;
};

ComponentDegree degree_on_component(const LocalGradientMap& f, const DomainExpr& omega,
                                    const Stratum& s, int comp, const Numerics& num, double delta,
                                    double shift, double grow) {
  const int k = s.dim();
  const int d = f.dim();
  const Eigen::MatrixXd& B = s.basis;
  const StratumField sf(f, B);
  const Field g = [&sf](const Vec& y) -> Vec { return sf.gradient(y); };
  const double circ = delta * std::sqrt(static_cast<double>(k)) / 2;
  const auto& C = s.components.at(comp);

  // Scan box: the component's coarse cells grown by a margin, clipped to the
  // projected support of D_f.
  Vec lo = Vec::Constant(k, kInf), hi = Vec::Constant(k, -kInf);
  for (const auto& c : C.cells) {
    const Vec y = s.center(c);
    lo = lo.cwiseMin(y);
    hi = hi.cwiseMax(y);
  }
  lo.array() -= grow;
  hi.array() += grow;
  const double reach = num.bbox * std::sqrt(static_cast<double>(d)) + delta;
  lo = lo.cwiseMax(Vec::Constant(k, -reach));
  hi = hi.cwiseMin(Vec::Constant(k, reach));
  if (const auto support = f.domain().support(d)) {
    Vec slo = Vec::Constant(k, kInf), shi = Vec::Constant(k, -kInf);
    for (const auto& ball : *support) {
      const Vec yc = B.transpose() * ball.center;
      const double dist = (ball.center - B * yc).norm();
      if (dist >= ball.radius) continue;
      const double r = std::sqrt(ball.radius * ball.radius - dist * dist) + delta;
      slo = slo.cwiseMin((yc.array() - r).matrix());
      shi = shi.cwiseMax((yc.array() + r).matrix());
    }
    lo = lo.cwiseMax(slo);
    hi = hi.cwiseMin(shi);
  }

  ComponentDegree out;
  out.component = comp;
  out.degree.method = k <= 3 ? "kronecker" : "morse";
  if ((hi - lo).minCoeff() <= 0) {
    out.degree.kronecker = 0;
    out.degree.morse = 0;
    return out;
  }

  FineScan scan;
  scan.k = k;
  scan.delta = delta;
  scan.origin = Vec::Constant(k, shift * delta);
  for (int j = 0; j < k; ++j) {
    scan.lo[j] = static_cast<int>(std::floor((lo[j] - scan.origin[j]) / delta)) - 1;
    const int top = static_cast<int>(std::ceil((hi[j] - scan.origin[j]) / delta)) + 1;
    scan.extent[j] = top - scan.lo[j] + 1;
  }

  auto margin_at = [&](const Vec& y) {
    const Vec p = B * y;
    double m = num.bbox - p.cwiseAbs().maxCoeff();
    m = std::min(m, s.clearance(y));
    m = std::min(m, omega.margin(p));
    return std::min(m, f.domain().margin(p));
  };
  // Centre and half-diagonal of the cells first..last (offsets into the scan).
  auto block_ball = [&](const std::array<int, kMaxDim>& first, const std::array<int, kMaxDim>& last,
                        Vec& mid) {
    double reach = 0.0;
    for (int j = 0; j < k; ++j) {
      mid[j] = scan.origin[j] + (scan.lo[j] + 0.5 * (first[j] + last[j]) + 0.5) * delta;
      const double half = 0.5 * (last[j] - first[j]) * delta;
      reach += half * half;
    }
    return std::sqrt(reach);
  };

  // Storage is allocated per block of kBlock^k cells and only for blocks the
  // margin test does not rule out as a whole. Every margin is 1-Lipschitz,
  // so a block is decided from its centre when the margin clears its reach.
  constexpr int kBlock = 16;
  std::array<int, kMaxDim> nblk{};
  std::size_t nblocks = 1;
  long bvol = 1;
  for (int j = 0; j < k; ++j) {
    nblk[j] = (scan.extent[j] + kBlock - 1) / kBlock;
    nblocks *= static_cast<std::size_t>(nblk[j]);
    bvol *= kBlock;
  }
  auto block_range = [&](std::size_t b, std::array<int, kMaxDim>& first, std::array<int, kMaxDim>& last) {
    std::size_t rest = b;
    for (int j = k - 1; j >= 0; --j) {
      const int bj = static_cast<int>(rest % nblk[j]);
      rest /= nblk[j];
      first[j] = bj * kBlock;
      last[j] = std::min(first[j] + kBlock, scan.extent[j]) - 1;
    }
  };
  std::vector<char> needed(nblocks);
  parallel_for(nblocks, [&](std::size_t b) {
    std::array<int, kMaxDim> first{}, last{};
    block_range(b, first, last);
    Vec mid(k);
    const double reach = block_ball(first, last, mid);
    needed[b] = margin_at(mid) + reach > circ;
  });
  std::vector<int> slot(nblocks, -1);
  std::vector<std::size_t> block_of;
  for (std::size_t b = 0; b < nblocks; ++b)
    if (needed[b]) {
      slot[b] = static_cast<int>(block_of.size());
      block_of.push_back(b);
    }
  const std::size_t n = block_of.size() * static_cast<std::size_t>(bvol);
  if (n > static_cast<std::size_t>(kMaxFineCells))
    throw Error(ErrorCode::RefinementOverflow,
                "fine grid for " + s.component_label(comp) + " exceeds the cell budget");

  // Storage index of a cell, or −1 outside the scan or in an unstored block.
  auto storage = [&](const CellIndex& c) -> long {
    std::size_t b = 0;
    long local = 0;
    for (int j = 0; j < k; ++j) {
      const int o = c[j] - scan.lo[j];
      if (o < 0 || o >= scan.extent[j]) return -1;
      b = b * static_cast<std::size_t>(nblk[j]) + static_cast<std::size_t>(o / kBlock);
      local = local * kBlock + o % kBlock;
    }
    return slot[b] < 0 ? -1 : static_cast<long>(slot[b]) * bvol + local;
  };
  auto cell_of = [&](long idx) {
    std::array<int, kMaxDim> first{}, last{};
    block_range(block_of[static_cast<std::size_t>(idx / bvol)], first, last);
    long local = idx % bvol;
    CellIndex c{};
    for (int j = k - 1; j >= 0; --j) {
      c[j] = scan.lo[j] + first[j] + static_cast<int>(local % kBlock);
      local /= kBlock;
    }
    return c;
  };

  std::vector<float> score(n, -std::numeric_limits<float>::infinity());
  std::vector<char> in(n, 0);
  // Blocks are split recursively until they are decided or a single cell.
  std::function<void(std::array<int, kMaxDim>, std::array<int, kMaxDim>)> classify =
      [&](std::array<int, kMaxDim> first, std::array<int, kMaxDim> last) {
        Vec mid(k);
        const double reach = block_ball(first, last, mid);
        int widest = 0;
        for (int j = 0; j < k; ++j) widest = std::max(widest, last[j] - first[j] + 1);
        const double mb = margin_at(mid);
        const int decided = mb - reach > circ ? 1 : (mb + reach <= circ ? 0 : -1);
        if (decided < 0 && widest > 1) {
          // Split every axis longer than one cell into two halves.
          std::array<int, kMaxDim> cut{};
          for (int j = 0; j < k; ++j) cut[j] = (first[j] + last[j]) / 2;
          for (int mask = 0; mask < (1 << k); ++mask) {
            std::array<int, kMaxDim> f2 = first, l2 = last;
            bool empty = false;
            for (int j = 0; j < k; ++j) {
              if (mask >> j & 1) {
                f2[j] = cut[j] + 1;
                empty = empty || f2[j] > last[j];
              } else {
                l2[j] = cut[j];
              }
            }
            if (!empty) classify(f2, l2);
          }
          return;
        }
        const char flag = static_cast<char>(decided < 0 ? mb > circ : decided);
        if (!flag) return;
        const float sc = static_cast<float>(decided < 0 ? mb : mb - reach);
        CellIndex o{};
        for (int j = 0; j < k; ++j) o[j] = first[j];
        for (;;) {
          CellIndex c{};
          for (int j = 0; j < k; ++j) c[j] = scan.lo[j] + o[j];
          const long idx = storage(c);
          in[idx] = 1;
          score[idx] = sc;
          int j = k - 1;
          while (j >= 0 && o[j] == last[j]) {
            o[j] = first[j];
            --j;
          }
          if (j < 0) break;
          ++o[j];
        }
      };
  parallel_for(block_of.size(), [&](std::size_t i) {
    std::array<int, kMaxDim> first{}, last{};
    block_range(block_of[i], first, last);
    classify(first, last);
  });

  // Pieces by face adjacency, discovered in storage order.
  std::vector<int> piece_of(n, -1);
  std::vector<Piece> pieces;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in[i] || piece_of[i] >= 0) continue;
    Piece pc;
    std::deque<long> queue{static_cast<long>(i)};
    piece_of[i] = static_cast<int>(pieces.size());
    while (!queue.empty()) {
      const long cur = queue.front();
      queue.pop_front();
      pc.cells.push_back(cur);
      const CellIndex c = cell_of(cur);
      if (scan.on_edge(c)) pc.touches_edge = true;
      for (int a = 0; a < k; ++a)
        for (int sgn : {-1, 1}) {
          const long nb = storage(offset(c, a, sgn));
          if (nb < 0 || !in[nb] || piece_of[nb] >= 0) continue;
          piece_of[nb] = static_cast<int>(pieces.size());
          queue.push_back(nb);
        }
    }
    std::sort(pc.cells.begin(), pc.cells.end());
    pieces.push_back(std::move(pc));
  }

  // Each piece belongs to the coarse component of its best-cleared cells.
  for (auto& pc : pieces) {
    std::vector<long> order = pc.cells;
    std::stable_sort(order.begin(), order.end(),
                     [&](long a, long b) { return score[a] > score[b]; });
    const std::size_t tries = std::min<std::size_t>(order.size(), 64);
    for (std::size_t t = 0; t < tries && pc.component < 0; ++t)
      pc.component = s.locate_coords(scan.center(cell_of(order[t])), omega);
  }

  auto region_of = [&](const Piece& pc) {
    std::vector<CellIndex> cells;
    cells.reserve(pc.cells.size());
    for (long i : pc.cells) cells.push_back(cell_of(i));
    return GridRegion(scan.origin, Vec::Constant(k, delta), std::move(cells));
  };

  int kron = 0;
  std::vector<long> target_cells;
  for (const auto& pc : pieces) {
    const bool target = pc.component == comp;
    if (!target && pc.component >= 0) continue;
    int deg = 0;
    if (k <= 3) deg = kronecker_degree(g, region_of(pc));
    if (target) {
      if (pc.touches_edge) throw ScanTooSmall{};
      kron += deg;
      ++out.pieces;
      target_cells.insert(target_cells.end(), pc.cells.begin(), pc.cells.end());
    } else {
      throw Error(ErrorCode::ResolutionTooCoarse,
                  "region piece (degree " + std::to_string(deg) +
                      ") could not be assigned to a component");
    }
  }
  std::sort(target_cells.begin(), target_cells.end());
  out.cells = static_cast<int>(target_cells.size());

  // Seeds: local minima of |g| over the target cells.
  std::vector<double> gnorm(target_cells.size());
  parallel_for(target_cells.size(), [&](std::size_t i) {
    gnorm[i] = g(scan.center(cell_of(target_cells[i]))).norm();
  });
  std::unordered_map<long, std::size_t> pos;
  pos.reserve(target_cells.size() * 2);
  for (std::size_t i = 0; i < target_cells.size(); ++i) pos.emplace(target_cells[i], i);
  std::vector<std::pair<double, long>> minima;
  for (std::size_t i = 0; i < target_cells.size(); ++i) {
    const CellIndex c = cell_of(target_cells[i]);
    bool is_min = true;
    for (int a = 0; a < k && is_min; ++a)
      for (int sgn : {-1, 1}) {
        const auto it = pos.find(storage(offset(c, a, sgn)));
        if (it != pos.end() && gnorm[it->second] < gnorm[i]) {
          is_min = false;
          break;
        }
      }
    if (is_min) minima.emplace_back(gnorm[i], target_cells[i]);
  }
  std::sort(minima.begin(), minima.end());
  if (minima.size() > 2000) minima.resize(2000);
  std::vector<Vec> seeds;
  for (const auto& [v, idx] : minima) seeds.push_back(scan.center(cell_of(idx)));

  const Predicate inside = [&](const Vec& y) {
    const Vec p = B * y;
    return p.cwiseAbs().maxCoeff() < num.bbox && omega.contains(p) && f.domain().contains(p) &&
           s.clearance(y) > kOnLargerTol * (1.0 + y.norm());
  };
  NewtonOptions opt;
  opt.tol = num.newton_tol;
  opt.zero_thresh = num.zero_thresh;
  opt.max_step = s.h;
  opt.dedupe = 1e-3 * s.h;
  auto zeros = solve_zeros(g, inside, seeds, opt, &out.newton);
  std::vector<char> in_target(n, 0);
  for (long i : target_cells) in_target[i] = 1;
  for (auto& z : zeros) {
    CellIndex c{};
    for (int j = 0; j < k; ++j)
      c[j] = static_cast<int>(std::floor((z.point[j] - scan.origin[j]) / delta));
    const long idx = storage(c);
    if (idx >= 0 && in_target[idx]) {
      z.component = comp;
      z.quotient = C.quotient;
      z.class_id = s.class_id;
      out.zeros.push_back(z);
    } else if (s.locate_coords(z.point, omega) == comp) {
      throw Error(ErrorCode::ResolutionTooCoarse,
                  "zero of " + s.component_label(comp) + " lies within the region margin");
    }
  }

  auto& res = out.degree;
  res.zeros = static_cast<int>(out.zeros.size());
  for (const auto& z : out.zeros) res.degenerate += z.index == 0;
  res.morse = morse_sum(out.zeros);
  if (k <= 3) {
    res.kronecker = kron;
    res.value = kron;
    res.method = "kronecker";
  } else if (res.morse) {
    res.value = *res.morse;
    res.method = "morse";
  } else {
    res.value = tilt_degree(g, inside, seeds, 1e-4, num.seed, opt);
    res.method = "tilt";
  }
  return out;
}

ComponentDegree degree_high_dim(const LocalGradientMap& f, const DomainExpr& omega,
                                const Stratum& s, int comp, const Numerics& num) {
  const Eigen::MatrixXd& B = s.basis;
  const StratumField sf(f, B);
  const Field g = [&sf](const Vec& y) -> Vec { return sf.gradient(y); };
  const auto& C = s.components.at(comp);
  std::vector<Vec> seeds;
  for (const auto& c : C.cells) {
    const Vec y = s.center(c);
    if (sf.in_domain(y)) seeds.push_back(y);
  }
  const Predicate inside = [&](const Vec& y) {
    const Vec p = B * y;
    return p.cwiseAbs().maxCoeff() < num.bbox && omega.contains(p) && f.domain().contains(p) &&
           s.clearance(y) > kOnLargerTol * (1.0 + y.norm());
  };
  NewtonOptions opt;
  opt.tol = num.newton_tol;
  opt.zero_thresh = num.zero_thresh;
  opt.max_step = s.h;
  opt.dedupe = 1e-3 * s.h;
  ComponentDegree out;
  out.component = comp;
  for (auto& z : solve_zeros(g, inside, seeds, opt, &out.newton)) {
    if (s.locate_coords(z.point, omega) != comp) continue;
    z.component = comp;
    z.quotient = C.quotient;
    z.class_id = s.class_id;
    out.zeros.push_back(z);
  }
  auto& res = out.degree;
  res.zeros = static_cast<int>(out.zeros.size());
  for (const auto& z : out.zeros) res.degenerate += z.index == 0;
  res.morse = morse_sum(out.zeros);
  if (res.morse) {
    res.value = *res.morse;
    res.method = "morse";
  } else {
    res.value = tilt_degree(g, inside, seeds, 1e-4, num.seed, opt);
    res.method = "tilt";
  }
  return out;
}

}  // namespace

std::vector<ComponentDegree> stratum_degrees(const LocalGradientMap& f, const DomainExpr& omega,
                                             const Stratum& s, const std::vector<int>& components,
                                             const Numerics& num, double delta) {
  if (s.dim() == 0) throw Error(ErrorCode::InvalidArgument, "zero-dimensional stratum");
  std::vector<ComponentDegree> out;
  for (int comp : components) {
    if (s.dim() > 3) {
      out.push_back(degree_high_dim(f, omega, s, comp, num));
      continue;
    }
    // Irrational-looking offsets keep grid vertices off symmetric points.
    static constexpr double kShifts[] = {0.3183098861837907, 0.5772156649015329,
                                         0.1415926535897932, 0.7182818284590452};
    double grow = 4.0 * s.h + 2.0 * delta;
    for (std::size_t attempt = 0;;) {
      try {
        out.push_back(degree_on_component(f, omega, s, comp, num, delta, kShifts[attempt], grow));
        break;
      } catch (const ScanTooSmall&) {
        grow *= 2.0;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::MarginTooSmall || ++attempt == std::size(kShifts)) throw;
      }
    }
  }
  return out;
}

}  // namespace egdeg
