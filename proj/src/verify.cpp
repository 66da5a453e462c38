#include "egdeg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <utility>

#include "egdeg/errors.hpp"
#include "egdeg/map_factory.hpp"
#include "egdeg/parallel.hpp"
#include "egdeg/rng.hpp"
#include "egdeg/theta.hpp"

namespace egdeg {

nlohmann::json CriterionResult::to_json() const {
  return {{"id", id}, {"name", name}, {"pass", pass()}, {"checks", checks},
          {"failures", failures}, {"cases", cases}};
}

bool SuiteReport::pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const auto& c) { return c.pass(); });
}

nlohmann::json SuiteReport::to_json() const {
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : criteria) cs.push_back(c.to_json());
  return {{"schema", "egdeg/1"}, {"suite", suite}, {"seed", seed}, {"pass", pass()}, {"criteria", cs}};
}

namespace {

void record(CriterionResult& r, nlohmann::json c, bool ok) {
  c["pass"] = ok;
  ++r.checks;
  if (!ok) ++r.failures;
  r.cases.push_back(std::move(c));
}

// Runs one case; an Error counts as a failure and its message is kept.
void run_case(CriterionResult& r, nlohmann::json c, const std::function<bool(nlohmann::json&)>& body) {
  bool ok = false;
  try {
    ok = body(c);
  } catch (const Error& e) {
    c["error"] = e.what();
  }
  record(r, std::move(c), ok);
}

nlohmann::json vec_json(const Vec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

struct Setting {
  std::string name;
  GroupPtr group;
  DomainExpr omega;
  Numerics num;
};

Numerics coarse_3d() {
  Numerics n;
  n.grid_h = 0.2;
  n.bbox = 1.5;
  return n;
}

GroupPtr swap_group() {
  Eigen::MatrixXd s(2, 2);
  s << 0.0, 1.0, 1.0, 0.0;
  return group_from_generators({s}, 2);
}

int top_class(const GroupAction& g) {
  for (const auto& c : g.lattice.classes)
    if (c.order == g.order()) return c.id;
  return -1;
}

bool has_zero_fixed_space(const GroupAction& g) {
  return g.lattice.representative(top_class(g)).fixed_basis.cols() == 0;
}

int class_dim(const GroupAction& g, int cid) {
  return static_cast<int>(g.lattice.representative(cid).fixed_basis.cols());
}

// A point of Ω_H with quotient label q, at least `gap` away from larger
// isotropy and from ∂Ω.
std::optional<Vec> sample_in_label(const ThetaContext& ctx, int cid, int q, Rng& rng, double gap) {
  const GroupAction& g = ctx.group();
  const Stratum& s = ctx.stratum(cid);
  for (int i = 0; i < 4000; ++i) {
    const Vec y = rng.in_ball(s.dim(), ctx.numerics().bbox);
    const Vec x = s.basis * y;
    if (ctx.omega().margin(x) < gap || s.clearance(y) < gap) continue;
    try {
      if (g.lattice.subgroups[isotropy(g, x)].class_id != cid) continue;
      if (s.locate(g, ctx.omega(), x).second == q) return x;
    } catch (const Error&) {
    }
  }
  return std::nullopt;
}

LocalGradientMap fitted_orbit_normal(const ThetaContext& ctx, const Vec& x, double& eps) {
  for (int i = 0;; ++i) {
    try {
      return orbit_normal(ctx.group_ptr(), ctx.omega(), x, eps);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TubeTooWide || i >= 6) throw;
      eps /= 2.0;
    }
  }
}

ThetaVector unit_vector(const ThetaContext& ctx, int cid, int q) {
  ThetaVector v;
  if (has_zero_fixed_space(ctx.group())) v.theta11 = 0;
  v.set({cid, q}, 1, ctx.label(cid, q));
  return v;
}

Polynomial square(const Polynomial& p) { return p * p; }

std::vector<Vec> ambient_zeros(const Polynomial& phi, double r, int seeds) {
  const int d = phi.nvars();
  const Field grad = [&phi](const Vec& x) {
    Vec g;
    phi.value_gradient(x, g);
    return g;
  };
  NewtonOptions opt;
  opt.max_step = 0.5;
  std::vector<Vec> out;
  for (const auto& z : find_zeros_box(grad, Vec::Constant(d, -r), Vec::Constant(d, r), seeds, opt))
    out.push_back(z.point);
  return out;
}

// ---------------------------------------------------------------------------
// 1. Normalization

std::vector<Setting> normalization_settings() {
  Numerics n2;
  return {{"antipodal(1)", antipodal_group(1), DomainExpr::ball(2.0), n2},
          {"antipodal(2)", antipodal_group(2), DomainExpr::ball(2.0), n2},
          {"dihedral(3)", dihedral_group(3), DomainExpr::ball(2.0), n2},
          {"symmetric(3)", symmetric_group(3), DomainExpr::ball(1.2), coarse_3d()},
          {"cyclic(4)", cyclic_group(4), DomainExpr::ball(2.0), n2}};
}

// ---------------------------------------------------------------------------
// 2. Additivity

// A factory map together with ambient balls that cover its domain.
struct Generated {
  LocalGradientMap map;
  std::vector<std::pair<Vec, double>> cover;
  nlohmann::json desc;
};

std::vector<std::pair<Vec, double>> orbit_cover(const GroupAction& g, const Vec& x, double r) {
  std::vector<std::pair<Vec, double>> out;
  for (const auto& p : orbit(g, x)) out.emplace_back(p, r);
  return out;
}

// Invariant stratum potential with a nondegenerate critical point at y and
// at its Weyl images, with the signs chosen by `signs`.
std::optional<Polynomial> lift_potential(const Stratum& s, const Vec& y, int signs) {
  const int k = s.dim();
  const double s1 = (signs & 1) ? -1.0 : 1.0;
  const double s2 = (signs & 2) ? -1.0 : 1.0;
  if (s.weyl_order() == 1) {
    Polynomial p(k);
    for (int i = 0; i < k; ++i) {
      const Polynomial t = Polynomial::variable(k, i) - Polynomial::constant(k, y[i]);
      p = p + square(t) * (0.5 * (i == 0 ? s1 : s2));
    }
    return p;
  }
  // Weyl group {±1} on the stratum: a double well along y.
  if (s.weyl_order() == 2 && (s.weyl[1] + Mat::Identity(k, k)).norm() < 1e-9 && k <= 2) {
    const double c = y.norm();
    Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(k, k);
    if (k == 2) {
      const Vec u = y / c;
      rot << u[0], u[1], -u[1], u[0];
    }
    const Polynomial u1 = Polynomial::variable(k, 0).compose_linear(rot);
    Polynomial p = square(u1 * u1 - Polynomial::constant(k, c * c)) * (s1 / (4.0 * c * c));
    if (k == 2) {
      const Polynomial u2 = Polynomial::variable(k, 1).compose_linear(rot);
      p = p + u2 * u2 * (0.5 * s2);
    }
    return p;
  }
  return std::nullopt;
}

std::optional<Generated> random_factory_map(const ThetaContext& ctx, Rng& rng) {
  const GroupAction& g = ctx.group();
  std::vector<int> classes;
  for (int cid : ctx.lattice().classes)
    if (class_dim(g, cid) >= 1) classes.push_back(cid);
  if (classes.empty()) return std::nullopt;
  const int cid = classes[rng.below(static_cast<int>(classes.size()))];
  const Stratum& s = ctx.stratum(cid);
  const int q = rng.below(static_cast<int>(s.quotient_reps.size()));
  const bool lift = rng.uniform() < 0.4;
  const auto x = sample_in_label(ctx, cid, q, rng, 0.3);
  if (!x) return std::nullopt;
  try {
    if (lift) {
      const Vec y = s.basis.transpose() * *x;
      const int signs = rng.below(4);
      const auto k = lift_potential(s, y, signs);
      if (k) {
        const double radius = 0.12, eps = 0.08;
        LocalGradientMap f = h_normal_lift(ctx.group_ptr(), ctx.omega(), s, *k, {y}, radius, eps);
        return Generated{std::move(f), orbit_cover(g, *x, radius + eps),
                         {{"kind", "h_normal_lift"}, {"orbit_type", g.lattice.classes[cid].name},
                          {"center", vec_json(*x)}, {"signs", signs}}};
      }
    }
    double eps = rng.uniform(0.08, 0.2);
    LocalGradientMap f = fitted_orbit_normal(ctx, *x, eps);
    return Generated{std::move(f), orbit_cover(g, *x, eps),
                     {{"kind", "orbit_normal"}, {"orbit_type", g.lattice.classes[cid].name},
                      {"point", vec_json(*x)}, {"epsilon", eps}}};
  } catch (const Error& e) {
    if (e.code() == ErrorCode::TubeTooWide) return std::nullopt;
    throw;
  }
}

bool covers_disjoint(const Generated& a, const Generated& b) {
  for (const auto& [ca, ra] : a.cover)
    for (const auto& [cb, rb] : b.cover)
      if ((ca - cb).norm() < ra + rb + 0.02) return false;
  return true;
}

// ---------------------------------------------------------------------------
// 8. Quotient division

Polynomial reynolds(const Polynomial& p, const GroupAction& g) {
  Polynomial acc(p.nvars());
  for (int i = 0; i < g.order(); ++i) acc = acc + p.compose_linear(g.rep.matrix(i));
  return acc * (1.0 / g.order());
}

// Random plane polynomial of even degree with a coercive |x|^degree term.
Polynomial random_plane_poly(int degree, Rng& rng) {
  Polynomial p(2);
  Polynomial::Exponents e{};
  for (int a = 0; a <= degree; ++a)
    for (int b = 0; a + b <= degree; ++b) {
      if (a + b == 0) continue;
      e[0] = static_cast<std::uint8_t>(a);
      e[1] = static_cast<std::uint8_t>(b);
      p.add_term(e, 0.6 * rng.normal());
    }
  const Polynomial r2 = Polynomial::variable(2, 0) * Polynomial::variable(2, 0) +
                        Polynomial::variable(2, 1) * Polynomial::variable(2, 1);
  Polynomial lead = r2;
  for (int i = 2; i < degree; i += 2) lead = lead * r2;
  return p + lead * 0.4;
}

}  // namespace

// ---------------------------------------------------------------------------

CriterionResult verify_normalization(const VerifyOptions& opt) {
  CriterionResult r{1, "normalization"};
  for (const auto& st : normalization_settings()) {
    const ThetaContext ctx(st.group, st.omega, st.num);
    const GroupAction& g = ctx.group();
    for (int cid : ctx.lattice().classes) {
      if (class_dim(g, cid) < 1) continue;
      const Stratum& s = ctx.stratum(cid);
      for (int q = 0; q < static_cast<int>(s.quotient_reps.size()); ++q) {
        nlohmann::json c{{"group", st.name}, {"orbit_type", g.lattice.classes[cid].name},
                         {"component", "q" + std::to_string(q)}};
        run_case(r, c, [&](nlohmann::json& c) {
          Rng rng(opt.seed, 0x100 + 64 * static_cast<std::uint64_t>(cid) + q);
          const auto x = sample_in_label(ctx, cid, q, rng, 0.2);
          if (!x) {
            c["error"] = "no sample point found";
            return false;
          }
          double eps = 0.25;
          const LocalGradientMap f = fitted_orbit_normal(ctx, *x, eps);
          const ThetaVector got = theta(ctx, f).theta;
          const ThetaVector want = unit_vector(ctx, cid, q);
          c["point"] = vec_json(*x);
          c["epsilon"] = eps;
          c["theta"] = got.to_json();
          c["expected"] = want.to_json();
          return got == want;
        });
      }
    }
  }
  return r;
}

CriterionResult verify_additivity(const VerifyOptions& opt) {
  CriterionResult r{2, "additivity"};
  const Numerics num;
  std::vector<Setting> settings = {{"antipodal(1)", antipodal_group(1), DomainExpr::ball(2.0), num},
                                   {"antipodal(2)", antipodal_group(2), DomainExpr::ball(2.0), num},
                                   {"dihedral(3)", dihedral_group(3), DomainExpr::ball(2.0), num},
                                   {"cyclic(4)", cyclic_group(4), DomainExpr::ball(2.0), num}};
  std::vector<ThetaContext> ctxs;
  for (const auto& st : settings) ctxs.emplace_back(st.group, st.omega, st.num);

  for (int i = 0; i < 20; ++i) {
    const std::size_t which = static_cast<std::size_t>(i) % ctxs.size();
    const ThetaContext& ctx = ctxs[which];
    nlohmann::json c{{"pair", i}, {"group", settings[which].name}};
    run_case(r, c, [&](nlohmann::json& c) {
      Rng rng(opt.seed, 0x200 + static_cast<std::uint64_t>(i));
      for (int attempt = 0; attempt < 60; ++attempt) {
        auto a = random_factory_map(ctx, rng);
        auto b = random_factory_map(ctx, rng);
        if (!a || !b || !covers_disjoint(*a, *b)) continue;
        const LocalGradientMap u = disjoint_union(a->map, b->map);
        const ThetaVector ta = theta(ctx, a->map).theta;
        const ThetaVector tb = theta(ctx, b->map).theta;
        const ThetaVector tu = theta(ctx, u).theta;
        const ThetaVector sum = theta_add(ta, tb);
        c["f"] = a->desc;
        c["g"] = b->desc;
        c["theta_f"] = ta.to_json();
        c["theta_g"] = tb.to_json();
        c["theta_union"] = tu.to_json();
        return tu == sum;
      }
      c["error"] = "no disjoint pair found";
      return false;
    });
  }
  return r;
}

CriterionResult verify_vanishing(const VerifyOptions& /*opt*/) {
  CriterionResult r{3, "vanishing"};
  const Numerics num;
  const std::vector<Setting> groups = {{"antipodal(1)", antipodal_group(1), DomainExpr::ball(2.0), num},
                                       {"antipodal(2)", antipodal_group(2), DomainExpr::ball(2.0), num},
                                       {"dihedral(3)", dihedral_group(3), DomainExpr::ball(2.0), num},
                                       {"cyclic(4)", cyclic_group(4), DomainExpr::ball(2.0), num},
                                       {"symmetric(3)", symmetric_group(3), DomainExpr::ball(1.2), coarse_3d()}};
  for (const auto& st : groups) {
    run_case(r, {{"map", "empty"}, {"group", st.name}}, [&](nlohmann::json& c) {
      const ThetaVector t = theta(st.group, st.omega, empty_map(st.group), st.num).theta;
      c["theta"] = t.to_json();
      return t.is_zero();
    });
  }

  struct ZeroFree {
    std::string group_name;
    GroupPtr group;
    DomainExpr omega;
    std::string phi;
    Numerics num;
  };
  const std::vector<ZeroFree> maps = {
      {"antipodal(1)", antipodal_group(1), DomainExpr::ball(2.0), "x1^2/2", num},
      {"antipodal(1)", antipodal_group(1), DomainExpr::ball(2.0), "x1^4/4 - x1^2/2", num},
      {"antipodal(2)", antipodal_group(2), DomainExpr::ball(1.8), "(x1^2-1)^2 + x2^2", num},
      {"antipodal(2)", antipodal_group(2), DomainExpr::annulus(0.4, 1.6), "(x1^2+x2^2)/2", num},
      {"antipodal(2)", antipodal_group(2), DomainExpr::ball(1.8),
       "x1^4/4 - x1^2/2 + x2^4/4 - x2^2/2 + x1*x2/4", num},
      {"dihedral(3)", dihedral_group(3), DomainExpr::ball(1.8), "(x1^2+x2^2)/2 - (x1^3-3*x1*x2^2)/3", num},
      {"dihedral(3)", dihedral_group(3), DomainExpr::annulus(0.5, 1.5), "(x1^2+x2^2)/2", num},
      {"cyclic(4)", cyclic_group(4), DomainExpr::ball(1.5), "x1^4 + x2^4 - (x1^2+x2^2)", num},
      {"trivial(2)", trivial_group(2), DomainExpr::ball(1.5), "x1^2/2 - x2^2/2 + x1^3", num},
      {"symmetric(3)", symmetric_group(3), DomainExpr::annulus(0.4, 1.2), "(x1^2+x2^2+x3^2)/2",
       coarse_3d()},
  };
  for (const auto& m : maps) {
    run_case(r, {{"map", m.phi}, {"group", m.group_name}}, [&](nlohmann::json& c) {
      const int d = m.group->dim();
      const Polynomial phi = parse_polynomial(m.phi, d);
      std::vector<Vec> centers;
      for (const auto& z : ambient_zeros(phi, m.num.bbox, d == 3 ? 9 : (d == 2 ? 15 : 40)))
        for (const auto& p : orbit(*m.group, z))
          if (std::none_of(centers.begin(), centers.end(),
                           [&](const Vec& w) { return (w - p).norm() < 1e-6; }))
            centers.push_back(p);
      DomainExpr omega = m.omega;
      if (!centers.empty())
        omega = DomainExpr::difference(m.omega, DomainExpr::orbit_balls(centers, 0.15));
      const LocalGradientMap f = make_map(m.group, omega, phi, m.num.bbox);
      const ThetaVector t = theta(m.group, m.omega, f, m.num).theta;
      c["removed_zeros"] = centers.size();
      c["theta"] = t.to_json();
      return t.is_zero();
    });
  }
  return r;
}

CriterionResult verify_split_consistency(const VerifyOptions& /*opt*/) {
  CriterionResult r{4, "split_consistency"};
  for (const auto& name : catalog_names()) {
    const CatalogEntry e = catalog(name);
    const ThetaContext ctx(e.group, e.omega, e.numerics);
    std::optional<ThetaVector> base;
    run_case(r, {{"entry", name}, {"check", "expected"}}, [&](nlohmann::json& c) {
      base = theta(ctx, e.map).theta;
      c["theta"] = base->to_json();
      return *base == e.expected_theta();
    });
    if (!base) continue;
    run_case(r, {{"entry", name}, {"check", "split"}}, [&](nlohmann::json& c) {
      const PerturbationStep step = perturbation_step(ctx, e.map, 0);
      const ThetaVector tn = theta(ctx, step.parts.normal).theta;
      const ThetaVector ta = theta(ctx, step.parts.outer).theta;
      c["tube"] = step.tube.to_json();
      c["theta_normal"] = tn.to_json();
      c["theta_outer"] = ta.to_json();
      return theta_add(tn, ta) == *base;
    });
    for (double lambda : {0.5, 2.0, 7.0}) {
      run_case(r, {{"entry", name}, {"check", "scale"}, {"lambda", lambda}}, [&](nlohmann::json& c) {
        const ThetaVector t = theta(ctx, e.map.scaled(lambda)).theta;
        c["theta"] = t.to_json();
        return t == *base;
      });
    }
    run_case(r, {{"entry", name}, {"check", "mu_quintic"}}, [&](nlohmann::json& c) {
      Numerics q = e.numerics;
      q.mu_kind = MuKind::Quintic;
      const ThetaVector t = theta(ThetaContext(e.group, e.omega, q), e.map).theta;
      c["theta"] = t.to_json();
      return t == *base;
    });
  }
  return r;
}

CriterionResult verify_z2_line(const VerifyOptions& /*opt*/) {
  CriterionResult r{5, "z2_line"};
  for (const char* name : {"z2_line_min", "z2_line_max"}) {
    run_case(r, {{"entry", name}}, [&](nlohmann::json& c) {
      const CatalogEntry e = catalog(name);
      const ThetaVector t = e.compute().theta;
      c["theta"] = t.to_json();
      c["expected"] = e.expected_theta().to_json();
      return t == e.expected_theta() && t.theta11 == e.theta11;
    });
  }
  return r;
}

CriterionResult verify_s1_demo(const VerifyOptions& /*opt*/) {
  CriterionResult r{6, "s1_dancer"};
  struct Demo {
    std::string phi;
    bool punctured;
    std::optional<int> theta11;
    int value;
  };
  const std::vector<Demo> demos = {{"(x1^2+x2^2)/2", false, 1, 0},
                                   {"-(x1^2+x2^2)/2", false, 1, -1},
                                   {"((x1^2+x2^2)-1)^2/4", true, std::nullopt, 1}};
  for (const auto& d : demos) {
    run_case(r, {{"potential", d.phi}, {"punctured", d.punctured}}, [&](nlohmann::json& c) {
      Numerics num;
      const ThetaVector t = theta_radial_s1({1}, parse_polynomial(d.phi, 2), d.punctured, num).theta;
      ThetaVector want;
      want.theta11 = d.theta11;
      want.set({0, 0}, d.value, {"(Z_1)", "q0"});
      c["theta"] = t.to_json();
      c["expected"] = want.to_json();
      return t == want && t.theta11 == want.theta11;
    });
  }
  return r;
}

CriterionResult verify_degree_oracle(const VerifyOptions& opt) {
  CriterionResult r{7, "degree_oracle"};
  for (int d = 1; d <= 3; ++d) {
    Rng rng(opt.seed, 0x700 + static_cast<std::uint64_t>(d));
    const int seeds = d == 1 ? 60 : (d == 2 ? 24 : 12);
    const Vec lo = Vec::Constant(d, -2.5), hi = Vec::Constant(d, 2.5);
    int made = 0;
    for (int attempt = 0; made < 25 && attempt < 1000; ++attempt) {
      Vec s(d), b(d);
      Mat a(d, d);
      for (int i = 0; i < d; ++i) s[i] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.5);
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) a(i, j) = a(j, i) = 1.2 * rng.normal();
      for (int i = 0; i < d; ++i) b[i] = 0.8 * rng.normal();
      const Field field = [s, a, b](const Vec& x) -> Vec {
        return (s.array() * x.array().cube()).matrix() + a * x + b;
      };
      NewtonOptions nopt;
      nopt.max_step = 0.5;
      const auto zeros = find_zeros_box(field, lo, hi, seeds, nopt);
      // Nondegenerate zeros well inside the box only.
      bool usable = true;
      for (const auto& z : zeros) {
        const Mat jac = Mat((3.0 * s.array() * z.point.array().square()).matrix().asDiagonal()) + a;
        if (z.point.cwiseAbs().maxCoeff() > 2.3 || std::abs(jac.determinant()) < 1e-2) usable = false;
      }
      if (!usable) continue;
      const int index = made++;
      nlohmann::json c{{"dim", d}, {"field", index}, {"attempt", attempt}, {"s", vec_json(s)},
                       {"b", vec_json(b)}};
      nlohmann::json am = nlohmann::json::array();
      for (int i = 0; i < d; ++i) am.push_back(vec_json(a.row(i).transpose()));
      c["A"] = am;
      run_case(r, c, [&](nlohmann::json& c) {
        const auto morse = morse_sum(zeros);
        const int kron = kronecker_box(field, lo, hi);
        c["zeros"] = zeros.size();
        c["morse"] = morse ? nlohmann::json(*morse) : nlohmann::json();
        c["kronecker"] = kron;
        return morse && *morse == kron;
      });
    }
    if (made < 25) record(r, {{"dim", d}, {"error", "too few usable fields"}}, false);
  }
  return r;
}

CriterionResult verify_quotient_division(const VerifyOptions& opt) {
  CriterionResult r{8, "quotient_division"};
  Numerics num;
  struct Example {
    std::string name;
    GroupPtr group;
    DomainExpr omega;
    int degree = 4;
  };
  const DomainExpr ann = DomainExpr::annulus(0.3, 1.8);
  const std::vector<Example> examples = {
      {"antipodal(2)", antipodal_group(2), ann}, {"antipodal(2)", antipodal_group(2), ann},
      {"antipodal(2)", antipodal_group(2), ann}, {"cyclic(4)", cyclic_group(4), ann},
      {"cyclic(4)", cyclic_group(4), ann},       {"cyclic(3)", cyclic_group(3), ann},
      {"cyclic(3)", cyclic_group(3), ann},       {"swap", swap_group(), DomainExpr::ball(1.8)},
      {"swap", swap_group(), DomainExpr::ball(1.8)}, {"dihedral(3)", dihedral_group(3), ann, 6}};

  for (std::size_t ex = 0; ex < examples.size(); ++ex) {
    const auto& e = examples[ex];
    const GroupAction& g = *e.group;
    const ThetaContext ctx(e.group, e.omega, num);
    int cid = -1;
    for (const auto& cl : g.lattice.classes)
      if (cl.order == 1) cid = cl.id;
    const Stratum& s = ctx.stratum(cid);

    Rng rng(opt.seed, 0x800 + ex);
    std::optional<Polynomial> phi;
    std::vector<Vec> free_zeros;
    int attempt = 0;
    for (; attempt < 200 && !phi; ++attempt) {
      const Polynomial p = reynolds(random_plane_poly(e.degree, rng), g);
      std::vector<Vec> zs;
      bool ok = true;
      for (const auto& z : ambient_zeros(p, 2.0, 20)) {
        if (!e.omega.contains(z)) continue;
        if (g.lattice.subgroups[isotropy(g, z)].class_id != cid) continue;
        const Vec y = s.basis.transpose() * z;
        const Eigen::SelfAdjointEigenSolver<Mat> es(p.hessian(z));
        if (e.omega.margin(z) < 0.12 || s.clearance(y) < 0.12 ||
            es.eigenvalues().cwiseAbs().minCoeff() < 0.05)
          ok = false;
        zs.push_back(z);
      }
      if (ok && !zs.empty()) {
        phi = p;
        free_zeros = std::move(zs);
      }
    }
    nlohmann::json base{{"example", static_cast<int>(ex)}, {"group", e.name}, {"attempt", attempt - 1}};
    if (!phi) {
      base["error"] = "no admissible potential";
      record(r, base, false);
      continue;
    }
    base["potential"] = phi->to_string();
    run_case(r, base, [&](nlohmann::json& c) {
      const LocalGradientMap f = make_map(e.group, e.omega, *phi, num.bbox);
      const double delta = std::min(num.grid_h / 2, e.omega.min_feature() / 5);
      const auto degrees = stratum_degrees(f, e.omega, s, s.quotient_reps, num, delta);

      // Explicit orbit counting: group the Newton zeros into G-orbits.
      const int nq = static_cast<int>(s.quotient_reps.size());
      std::vector<int> orbits(nq, 0), iq(nq, 0), in_c(nq, 0);
      std::vector<char> used(free_zeros.size(), 0);
      int unmatched = 0;
      for (std::size_t i = 0; i < free_zeros.size(); ++i) {
        if (used[i]) continue;
        const auto orb = orbit(g, free_zeros[i]);
        for (const auto& p : orb) {
          bool found = false;
          for (std::size_t j = 0; j < free_zeros.size(); ++j)
            if (!used[j] && (free_zeros[j] - p).norm() < 1e-6) {
              used[j] = 1;
              found = true;
            }
          if (!found) ++unmatched;
        }
        const int q = s.locate(g, e.omega, free_zeros[i]).second;
        const Field sg = [&](const Vec& y) -> Vec { return s.basis.transpose() * f.gradient(s.basis * y); };
        ++orbits[q];
        iq[q] += zero_index(sg, s.basis.transpose() * free_zeros[i]);
        for (const auto& p : orb)
          if (s.locate(g, e.omega, p).first == s.quotient_reps[q]) ++in_c[q];
      }
      bool ok = unmatched == 0;
      nlohmann::json comps = nlohmann::json::array();
      for (int q = 0; q < nq; ++q) {
        const int stab = s.components[s.quotient_reps[q]].stabilizer;
        const int ic = degrees[q].degree.value;
        const bool good = ic == stab * iq[q] && in_c[q] == stab * orbits[q] &&
                          quotient_intersection(ic, stab) == iq[q];
        ok = ok && good;
        comps.push_back({{"quotient", "q" + std::to_string(q)}, {"stabilizer", stab}, {"I_C", ic},
                         {"orbits", orbits[q]}, {"zeros_in_C", in_c[q]}, {"I_quotient", iq[q]}});
      }
      c["zeros"] = free_zeros.size();
      c["unmatched_orbit_points"] = unmatched;
      c["components"] = comps;
      return ok;
    });
  }
  return r;
}

CriterionResult verify_partition_suite(const VerifyOptions& opt) {
  CriterionResult r{9, "partition"};
  for (const char* name : {"z2_line_max", "z2_plane_doublewell"}) {
    run_case(r, {{"entry", name}}, [&](nlohmann::json& c) {
      const CatalogEntry e = catalog(name);
      const ThetaContext ctx(e.group, e.omega, e.numerics);
      const PerturbationStep step = perturbation_step(ctx, e.map, 0);
      const PartitionReport rep =
          verify_partition(step.perturbed.family, 1000, opt.seed, e.numerics.zero_thresh);
      c["tube"] = step.tube.to_json();
      c["regions"] = rep.to_json();
      const int violations = rep.a.violations + rep.b.violations + rep.c.violations + rep.d.violations;
      const bool sampled = rep.a.samples == 1000 && rep.b.samples == 1000 && rep.c.samples == 1000 &&
                           rep.d.samples == 1000;
      return violations == 0 && sampled && rep.c.min_norm > 0.0;
    });
  }
  return r;
}

CriterionResult verify_determinism(const VerifyOptions& opt) {
  CriterionResult r{10, "determinism"};
  run_case(r, {{"suite", "axioms"}, {"workers", {1, 4}}}, [&](nlohmann::json& c) {
    set_worker_count(1);
    const std::string one = run_suite("axioms", opt).to_json().dump(2);
    set_worker_count(4);
    const std::string four = run_suite("axioms", opt).to_json().dump(2);
    set_worker_count(0);
    c["bytes"] = {one.size(), four.size()};
    if (one != four) {
      const auto diff = std::mismatch(one.begin(), one.end(), four.begin(), four.end());
      c["first_difference"] = diff.first - one.begin();
    }
    return one == four;
  });
  return r;
}

std::vector<std::string> suite_names() { return {"all", "axioms", "degree", "partition"}; }

SuiteReport run_suite(const std::string& suite, const VerifyOptions& opt) {
  using Fn = CriterionResult (*)(const VerifyOptions&);
  const std::map<int, Fn> all = {{1, verify_normalization},    {2, verify_additivity},
                                 {3, verify_vanishing},        {4, verify_split_consistency},
                                 {5, verify_z2_line},          {6, verify_s1_demo},
                                 {7, verify_degree_oracle},    {8, verify_quotient_division},
                                 {9, verify_partition_suite},  {10, verify_determinism}};
  std::vector<int> ids;
  if (suite == "axioms") ids = {1, 2, 3, 4, 5, 6, 8};
  else if (suite == "degree") ids = {7};
  else if (suite == "partition") ids = {9};
  else if (suite == "all") ids = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  else throw Error(ErrorCode::UnknownName, "unknown suite '" + suite + "'");
  SuiteReport rep{suite, opt.seed, {}};
  for (int id : ids) rep.criteria.push_back(all.at(id)(opt));
  return rep;
}

}  // namespace egdeg
