#include "egdeg/map_factory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "egdeg/errors.hpp"
#include "egdeg/quotient_degree.hpp"
#include "egdeg/rng.hpp"

namespace egdeg {

namespace {

bool is_subset(const std::vector<int>& a, const std::vector<int>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::string point_text(const Vec& x) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

}  // namespace

LocalGradientMap orbit_normal(GroupPtr group, const DomainExpr& omega, const Vec& x, double eps) {
  const GroupAction& g = *group;
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "tube radius must be positive");
  const auto pts = orbit(g, x);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if ((pts[i] - pts[j]).norm() <= 2.0 * eps)
        throw Error(ErrorCode::TubeTooWide, "orbit points of " + point_text(x) + " closer than 2ε");
  const auto& gx = isotropy_record(g, x);
  for (const auto& k : g.lattice.subgroups) {
    if (is_subset(k.members, gx.members)) continue;
    const Eigen::MatrixXd& b = k.fixed_basis;
    const Vec proj = b * (b.transpose() * x);
    if ((x - proj).norm() <= 2.0 * eps)
      throw Error(ErrorCode::TubeTooWide,
                  "ball around " + point_text(x) + " reaches a larger isotropy subspace");
  }
  for (const auto& p : pts)
    if (omega.margin(p) < eps)
      throw Error(ErrorCode::TubeTooWide, "ball around " + point_text(p) + " leaves Ω");
  return LocalGradientMap(group, DomainExpr::orbit_balls(pts, eps), orbit_normal_potential(pts));
}

LocalGradientMap h_normal_lift(GroupPtr group, const DomainExpr& omega, const Stratum& stratum,
                               const Polynomial& k, const std::vector<Vec>& centers,
                               double radius, double eps) {
  const GroupAction& g = *group;
  const int d = g.dim();
  const int kd = stratum.dim();
  if (kd == 0) throw Error(ErrorCode::InvalidArgument, "lift needs a stratum of positive dimension");
  if (k.nvars() != kd) throw Error(ErrorCode::InvalidArgument, "stratum potential has wrong arity");
  if (!(radius > 0.0) || !(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "radii must be positive");

  // k must be invariant under the Weyl group acting on V^H.
  Rng rng(0x6c696674, static_cast<std::uint64_t>(stratum.class_id));
  for (int i = 0; i < 200; ++i) {
    const Vec y = rng.in_ball(kd, 2.0);
    const double v = k.value(y);
    for (const auto& w : stratum.weyl)
      if (std::abs(k.value(w * y) - v) > 1e-8 * (1.0 + std::abs(v)))
        throw Error(ErrorCode::NotInvariant, "stratum potential is not Weyl invariant");
  }

  std::vector<Eigen::MatrixXd> bases;
  std::vector<int> elements;
  conjugate_subspaces(g, stratum.class_id, bases, elements);
  std::vector<TubeSubspace> subs;
  std::vector<Eigen::MatrixXd> to_stratum;
  for (std::size_t j = 0; j < bases.size(); ++j) {
    subs.push_back({bases[j], Mat(bases[j] * bases[j].transpose())});
    to_stratum.push_back(stratum.basis.transpose() * g.rep.matrix(elements[j]).transpose());
  }

  std::vector<TubeBall> balls;
  for (const auto& y : centers) {
    if (y.size() != kd) throw Error(ErrorCode::InvalidArgument, "center has wrong dimension");
    if (stratum.clearance(y) <= radius + 2.0 * eps)
      throw Error(ErrorCode::TubeTooWide, "stratum ball reaches a larger isotropy subspace");
    const Vec c = stratum.basis * y;
    for (int e = 0; e < g.order(); ++e) {
      const Vec p = g.rep.matrix(e) * c;
      int j = -1;
      for (std::size_t i = 0; i < subs.size() && j < 0; ++i)
        if ((p - subs[i].projector * p).norm() <= 1e-8 * (1.0 + p.norm())) j = static_cast<int>(i);
      if (j < 0) throw Error(ErrorCode::InvalidArgument, "center image lies on no conjugate subspace");
      bool dup = false;
      for (const auto& b : balls) dup = dup || (b.subspace == j && (b.center - p).norm() <= 1e-9);
      if (!dup) balls.push_back({j, p, radius});
    }
  }
  for (std::size_t a = 0; a < balls.size(); ++a) {
    if (omega.margin(balls[a].center) < radius + eps)
      throw Error(ErrorCode::TubeTooWide, "tube leaves Ω");
    for (std::size_t b = a + 1; b < balls.size(); ++b)
      if ((balls[a].center - balls[b].center).norm() <= 2.0 * (radius + eps))
        throw Error(ErrorCode::TubeTooWide, "stratum balls overlap");
  }
  auto tube = std::make_shared<const TubeGeometry>(d, std::move(subs), std::move(balls));
  return LocalGradientMap(group, DomainExpr::tube(tube, eps),
                          normal_lift_potential(tube, eps, std::move(to_stratum), k));
}

LocalGradientMap restrict_off(const LocalGradientMap& l, const DomainExpr& y, double bbox,
                              double zero_thresh) {
  const int d = l.dim();
  if (y.kind() == DomainExpr::Kind::Empty) return l;
  std::vector<Vec> seeds;
  for (std::uint64_t i = 0; i < 4000 && seeds.size() < 400; ++i) {
    const Vec x = (halton(i + 1, d).array() * 2.0 - 1.0).matrix() * bbox;
    if (y.contains(x) && l.domain().contains(x)) seeds.push_back(x);
  }
  if (const auto support = y.support(d))
    for (const auto& b : *support)
      if (l.domain().contains(b.center) && y.contains(b.center)) seeds.push_back(b.center);
  // Y is closed: accept zeros up to a thin layer outside its open description.
  const Predicate inside = [&](const Vec& x) {
    return l.domain().contains(x) && y.margin(x) > -1e-6;
  };
  const Field field = [&](const Vec& x) -> Vec { return l.gradient(x); };
  NewtonOptions opt;
  opt.zero_thresh = zero_thresh;
  opt.max_step = 0.1 * bbox;
  const auto zeros = solve_zeros(field, inside, seeds, opt);
  if (!zeros.empty())
    throw Error(ErrorCode::ZeroOnY, "zero at " + point_text(zeros.front().point) + " lies in Y");
  return l.with_domain(DomainExpr::difference(l.domain(), y));
}

ThetaLabel component_label_of(const ThetaContext& ctx, const Vec& x) {
  const GroupAction& g = ctx.group();
  const int sub = isotropy(g, x);
  const int cid = g.lattice.subgroups[sub].class_id;
  // Move x onto the representative subspace before locating it.
  Vec xr = x;
  for (int e = 0; e < g.order(); ++e) {
    const Vec p = g.rep.matrix(e) * x;
    if (isotropy(g, p) == g.lattice.classes[cid].representative) {
      xr = p;
      break;
    }
  }
  return ctx.label(cid, ctx.stratum(cid).locate(g, ctx.omega(), xr).second);
}

// ---------------------------------------------------------------------------
// Catalog

ThetaVector CatalogEntry::expected_theta() const {
  ThetaVector out;
  out.theta11 = theta11;
  for (const auto& e : expected) {
    int cid = -1;
    if (s1_weight) {
      cid = 0;
    } else {
      for (const auto& c : group->lattice.classes)
        if (c.name == e.orbit_type) cid = c.id;
    }
    if (cid < 0) throw Error(ErrorCode::UnknownName, "no orbit type " + e.orbit_type);
    const int q = std::stoi(e.component.substr(1));
    out.set({cid, q}, e.value, {e.orbit_type, e.component});
  }
  return out;
}

ThetaResult CatalogEntry::compute() const { return compute(numerics); }

ThetaResult CatalogEntry::compute(const Numerics& num) const {
  if (s1_weight) {
    const bool punctured = omega.kind() == DomainExpr::Kind::Punctured;
    return theta_radial_s1({*s1_weight}, parse_polynomial(potential, 2), punctured, num);
  }
  return theta(group, omega, map, num);
}

nlohmann::json CatalogEntry::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["description"] = description;
  j["group"] = group_spec;
  j["potential"] = potential;
  j["theta11"] = theta11 ? nlohmann::json(*theta11) : nlohmann::json(nullptr);
  j["theta11_provenance"] = theta11_provenance;
  j["expected"] = nlohmann::json::array();
  for (const auto& e : expected)
    j["expected"].push_back({{"orbit_type", e.orbit_type},
                             {"component", e.component},
                             {"value", e.value},
                             {"provenance", e.provenance}});
  return j;
}

std::vector<std::string> catalog_names() {
  return {"z2_line_min",     "z2_line_max",     "z2_plane_doublewell", "d3_axis_orbit_normal",
          "s3_perm_radial",  "s1_dancer_plus",  "s1_dancer_minus",     "trivial_identity"};
}

namespace {

constexpr const char* kLineOracle = "[DERIVED: tests/oracles/line_oracle]";

CatalogEntry polynomial_entry(std::string name, std::string description, nlohmann::json spec,
                              GroupPtr g, DomainExpr omega, std::string phi, Numerics num) {
  LocalGradientMap f = make_map(g, omega, parse_polynomial(phi, g->dim()), num.bbox);
  return CatalogEntry{std::move(name), std::move(description), std::move(spec), std::move(g),
                      std::move(omega), std::move(phi), std::move(f), num, std::nullopt,
                      std::nullopt, "", {}};
}

CatalogEntry s1_entry(std::string name, std::string description, std::string phi, bool punctured) {
  Numerics num;
  // The computation runs on the real slice x2 = 0 with x ↦ −x.
  GroupPtr g = antipodal_group(1);
  const DomainExpr omega = punctured ? DomainExpr::punctured() : DomainExpr::full();
  Eigen::MatrixXd slice(2, 1);
  slice << 1.0, 0.0;
  const Polynomial line = parse_polynomial(phi, 2).compose_linear(slice);
  CatalogEntry e{std::move(name), std::move(description),
                 {{"kind", "circle"}, {"weights", {1}}}, g, omega, std::move(phi),
                 make_map(g, omega, line, num.bbox), num, 1, std::nullopt, "", {}};
  return e;
}

}  // namespace

CatalogEntry catalog(const std::string& name) {
  Numerics num;
  if (name == "z2_line_min" || name == "z2_line_max") {
    const bool min = name == "z2_line_min";
    auto e = polynomial_entry(name, min ? "x ↦ −x on the line, φ = x²/2" : "x ↦ −x on the line, φ = −x²/2",
                              {{"kind", "antipodal"}, {"dim", 1}}, antipodal_group(1),
                              DomainExpr::full(), min ? "x1^2/2" : "-x1^2/2", num);
    e.theta11 = 1;
    e.theta11_provenance = "[PAPER: 0 in D_f]";
    e.expected = {{"(e)", "q0", min ? 0 : -1, kLineOracle}};
    return e;
  }
  if (name == "z2_plane_doublewell") {
    auto e = polynomial_entry(name, "±I on the plane, φ = (x1² − 1)² + x2² on the ball of radius 1.8",
                              {{"kind", "antipodal"}, {"dim", 2}}, antipodal_group(2),
                              DomainExpr::ball(1.8), "(x1^2-1)^2+x2^2", num);
    e.theta11 = 1;
    e.theta11_provenance = "[PAPER: 0 in D_f]";
    // Total degree 1 on the ball, of which the perturbed origin carries +1.
    e.expected = {{"(e)", "q0", 0, "[DERIVED: tests/oracles/winding_oracle, degree 1 minus origin index 1]"}};
    return e;
  }
  if (name == "d3_axis_orbit_normal") {
    GroupPtr g = dihedral_group(3);
    const DomainExpr omega = DomainExpr::punctured();
    Vec x(2);
    x << 1.0, 0.0;
    LocalGradientMap f = orbit_normal(g, omega, x, 0.2);
    CatalogEntry e{name, "D3 on the plane, orbit-normal map around the orbit of (1, 0), ε = 0.2",
                   {{"kind", "dihedral"}, {"n", 3}}, g, omega, "orbit_normal((1,0), 0.2)", f,
                   num, std::nullopt, std::nullopt, "", {}};
    const ThetaContext ctx(g, omega, num);
    const ThetaLabel l = component_label_of(ctx, x);
    e.expected = {{l.orbit_type, l.component, 1, "[PAPER: orbit-normal normalization]"}};
    return e;
  }
  if (name == "s3_perm_radial") {
    num.grid_h = 0.2;
    auto e = polynomial_entry(name, "S3 permuting coordinates of R³, φ = |x|²/2 on the ball of radius 1.2",
                              {{"kind", "symmetric"}, {"n", 3}}, symmetric_group(3),
                              DomainExpr::ball(1.2), "(x1^2+x2^2+x3^2)/2", num);
    e.expected = {{"(G)", "q0", 1, "[PAPER: orbit-normal normalization around the fixed point 0]"}};
    return e;
  }
  if (name == "s1_dancer_plus" || name == "s1_dancer_minus") {
    const bool plus = name == "s1_dancer_plus";
    auto e = s1_entry(name, plus ? "S¹ on ℂ with weight 1, φ = r²/2" : "S¹ on ℂ with weight 1, φ = −r²/2",
                      plus ? "(x1^2+x2^2)/2" : "-(x1^2+x2^2)/2", false);
    e.theta11 = 1;
    e.theta11_provenance = "[PAPER: 0 in D_f]";
    e.expected = {{"(Z_1)", "q0", plus ? 0 : -1, kLineOracle}};
    return e;
  }
  if (name == "trivial_identity") {
    auto e = polynomial_entry(name, "trivial group on the plane, φ = |x|²/2 on the ball of radius 1.5",
                              {{"kind", "trivial"}, {"dim", 2}}, trivial_group(2),
                              DomainExpr::ball(1.5), "(x1^2+x2^2)/2", num);
    e.expected = {{"(e)", "q0", 1, "[TRIVIAL: source]"}};
    return e;
  }
  throw Error(ErrorCode::UnknownName, "unknown catalog entry '" + name + "'");
}

}  // namespace egdeg
