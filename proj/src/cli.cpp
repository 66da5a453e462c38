#include "egdeg/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "egdeg/quotient_degree.hpp"
#include "egdeg/stratification.hpp"
#include "egdeg/theta.hpp"
#include "egdeg/verify.hpp"

namespace egdeg {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

void expect_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) config_error(where + " must be an object");
  for (const auto& [key, _] : j.items())
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      config_error("unknown key '" + key + "' in " + where);
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) config_error(where + " needs '" + key + "'");
  return j.at(key);
}

int integer(const json& j, const char* key, const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_number_integer()) config_error(where + "." + key + " must be an integer");
  return v.get<int>();
}

double positive(const json& v, const std::string& what) {
  if (!v.is_number()) config_error(what + " must be a number");
  const double x = v.get<double>();
  if (!(x > 0.0) || !std::isfinite(x)) config_error(what + " must be positive");
  return x;
}

Vec vector_of(const json& v, int dim, const std::string& what) {
  if (!v.is_array() || static_cast<int>(v.size()) != dim)
    config_error(what + " must be an array of " + std::to_string(dim) + " numbers");
  Vec out(dim);
  for (int i = 0; i < dim; ++i) {
    if (!v[i].is_number()) config_error(what + " must contain numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

std::string text(const json& v, const std::string& what) {
  if (!v.is_string()) config_error(what + " must be a string");
  return v.get<std::string>();
}

GroupPtr parse_group(const json& j, std::vector<int>& weights) {
  const std::string where = "group block";
  const std::string kind = text(require(j, "kind", where), "group.kind");
  if (kind == "cyclic" || kind == "dihedral" || kind == "symmetric") {
    expect_keys(j, {"kind", "n"}, where);
    const int n = integer(j, "n", where);
    if (n < 1 || n > 12) config_error("group.n must be in 1..12");
    if (kind == "cyclic") return cyclic_group(n);
    if (kind == "dihedral") return dihedral_group(n);
    if (n > 4) config_error("symmetric groups are limited to n <= 4");
    return symmetric_group(n);
  }
  if (kind == "antipodal" || kind == "trivial") {
    expect_keys(j, {"kind", "dim"}, where);
    const int d = integer(j, "dim", where);
    if (d < 1 || d > kMaxDim) config_error("group.dim must be in 1.." + std::to_string(kMaxDim));
    return kind == "antipodal" ? antipodal_group(d) : trivial_group(d);
  }
  if (kind == "generators") {
    expect_keys(j, {"kind", "dim", "matrices", "cap"}, where);
    const int d = integer(j, "dim", where);
    if (d < 1 || d > kMaxDim) config_error("group.dim must be in 1.." + std::to_string(kMaxDim));
    const int cap = j.contains("cap") ? integer(j, "cap", where) : 64;
    if (cap < 1 || cap > 64) config_error("group.cap must be in 1..64");
    const json& ms = require(j, "matrices", where);
    if (!ms.is_array()) config_error("group.matrices must be an array");
    std::vector<Eigen::MatrixXd> gens;
    for (const auto& m : ms) {
      if (!m.is_array() || static_cast<int>(m.size()) != d)
        config_error("each generator must have " + std::to_string(d) + " rows");
      Eigen::MatrixXd q(d, d);
      for (int r = 0; r < d; ++r) q.row(r) = vector_of(m[r], d, "generator row").transpose();
      gens.push_back(q);
    }
    return group_from_generators(gens, d, cap);
  }
  if (kind == "circle") {
    expect_keys(j, {"kind", "weights"}, where);
    const json& w = require(j, "weights", where);
    if (!w.is_array() || w.empty()) config_error("group.weights must be a non-empty array");
    for (const auto& x : w) {
      if (!x.is_number_integer() || x.get<int>() < 1) config_error("group.weights must be positive integers");
      weights.push_back(x.get<int>());
    }
    if (weights.size() != 1)
      throw Error(ErrorCode::UnsupportedRep, "circle groups are supported with exactly one weight");
    return nullptr;
  }
  config_error("unknown group kind '" + kind + "'");
}

void parse_numerics(const json& j, Numerics& num) {
  expect_keys(j, {"grid_h", "bbox", "newton_tol", "zero_thresh", "seed", "max_halvings", "mu", "samples"},
              "numerics block");
  if (j.contains("grid_h")) num.grid_h = positive(j["grid_h"], "numerics.grid_h");
  if (j.contains("bbox")) num.bbox = positive(j["bbox"], "numerics.bbox");
  if (j.contains("newton_tol")) num.newton_tol = positive(j["newton_tol"], "numerics.newton_tol");
  if (j.contains("zero_thresh")) num.zero_thresh = positive(j["zero_thresh"], "numerics.zero_thresh");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) config_error("numerics.seed must be a non-negative integer");
    num.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("max_halvings")) {
    const int m = integer(j, "max_halvings", "numerics");
    if (m < 0 || m > 60) config_error("numerics.max_halvings must be in 0..60");
    num.max_halvings = m;
  }
  if (j.contains("samples")) {
    const int s = integer(j, "samples", "numerics");
    if (s < 1) config_error("numerics.samples must be positive");
    num.samples = s;
  }
  if (j.contains("mu")) {
    const std::string mu = text(j["mu"], "numerics.mu");
    if (mu == "cubic") num.mu_kind = MuKind::Cubic;
    else if (mu == "quintic") num.mu_kind = MuKind::Quintic;
    else config_error("numerics.mu must be 'cubic' or 'quintic'");
  }
}

void validate_potential(const json& p, int dim, bool circle) {
  const std::string where = "potential block";
  const std::string kind = text(require(p, "kind", where), "potential.kind");
  if (kind == "polynomial") {
    expect_keys(p, {"kind", "expr"}, where);
    parse_polynomial(text(require(p, "expr", where), "potential.expr"), dim);
  } else if (kind == "orbit_normal") {
    if (circle) config_error("orbit_normal potentials need a finite group");
    expect_keys(p, {"kind", "point", "epsilon"}, where);
    vector_of(require(p, "point", where), dim, "potential.point");
    positive(require(p, "epsilon", where), "potential.epsilon");
  } else if (kind == "empty") {
    expect_keys(p, {"kind"}, where);
  } else {
    config_error("unknown potential kind '" + kind + "'");
  }
}

json error_report(const std::string& command, const Error& e) {
  return {{"schema", kSchema},
          {"command", command},
          {"error", {{"code", to_string(e.code())}, {"message", e.what()}}}};
}

json header(const std::string& command, const RunConfig& cfg) {
  return {{"schema", kSchema},
          {"command", command},
          {"group", cfg.group_spec},
          {"domain", cfg.domain.to_json()},
          {"potential", cfg.potential_spec}};
}

// Non-invariant domains are validation errors; the report carries the point.
std::optional<CommandResult> domain_check(const std::string& command, const RunConfig& cfg) {
  if (cfg.is_circle() || cfg.catalog_entry) return std::nullopt;
  const auto w = cfg.domain.invariance_witness(*cfg.group, cfg.numerics.bbox);
  if (!w) return std::nullopt;
  json r = error_report(command, Error(ErrorCode::NotInvariant, "domain is not invariant under the group"));
  r["error"]["witness"] = vec_to_json(*w);
  return CommandResult{kExitValidation, r};
}

json zeros_json(const std::vector<ZeroRecord>& zs) {
  json out = json::array();
  for (const auto& z : zs)
    out.push_back({{"point", vec_to_json(z.point)}, {"index", z.index}, {"residual", z.residual}});
  return out;
}

json newton_json(const NewtonStats& s) {
  return {{"starts", s.starts}, {"converged", s.converged}, {"failed", s.failed}};
}

void require_finite_group(const RunConfig& cfg, const std::string& command) {
  if (cfg.is_circle())
    throw Error(ErrorCode::UnsupportedRep, command + " needs a finite group; circle groups support theta only");
}

}  // namespace

int RunConfig::dim() const { return is_circle() ? 2 : group->dim(); }

RunConfig RunConfig::from_json(const json& j) {
  expect_keys(j, {"group", "domain", "potential", "numerics", "box", "output"}, "config");
  RunConfig cfg;
  const json& pot = require(j, "potential", "config");
  if (!pot.is_object()) config_error("potential block must be an object");
  cfg.potential_spec = pot;

  if (pot.value("kind", "") == "catalog") {
    expect_keys(pot, {"kind", "name"}, "potential block");
    if (j.contains("group") || j.contains("domain"))
      config_error("catalog potentials bring their own group and domain");
    CatalogEntry e = catalog(text(require(pot, "name", "potential block"), "potential.name"));
    cfg.group_spec = e.group_spec;
    cfg.domain = e.omega;
    cfg.numerics = e.numerics;
    if (e.s1_weight) cfg.circle_weights = {*e.s1_weight};
    else cfg.group = e.group;
    cfg.catalog_entry = std::move(e);
  } else {
    cfg.group_spec = require(j, "group", "config");
    cfg.group = parse_group(cfg.group_spec, cfg.circle_weights);
    if (j.contains("domain")) cfg.domain = DomainExpr::from_json(j["domain"], cfg.dim());
    if (cfg.is_circle()) {
      const auto k = cfg.domain.kind();
      if (k != DomainExpr::Kind::Full && k != DomainExpr::Kind::Punctured)
        config_error("circle groups take the domain 'full' or 'punctured'");
    }
    validate_potential(pot, cfg.dim(), cfg.is_circle());
  }

  if (j.contains("numerics")) parse_numerics(j["numerics"], cfg.numerics);
  if (j.contains("box")) {
    const json& b = j["box"];
    expect_keys(b, {"lo", "hi"}, "box block");
    Vec lo = vector_of(require(b, "lo", "box block"), cfg.dim(), "box.lo");
    Vec hi = vector_of(require(b, "hi", "box block"), cfg.dim(), "box.hi");
    if (!(lo.array() < hi.array()).all()) config_error("box.lo must be below box.hi in every coordinate");
    cfg.box = std::make_pair(std::move(lo), std::move(hi));
  }
  if (j.contains("output")) cfg.output = text(j["output"], "output");
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    config_error("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

LocalGradientMap build_map(const RunConfig& cfg) {
  if (cfg.catalog_entry) return cfg.catalog_entry->map;
  const json& p = cfg.potential_spec;
  const std::string kind = p.at("kind").get<std::string>();
  // Circle configs reuse the plane with the trivial action for box degrees.
  const GroupPtr g = cfg.is_circle() ? trivial_group(2) : cfg.group;
  if (!cfg.is_circle())
    if (auto w = cfg.domain.invariance_witness(*g, cfg.numerics.bbox)) {
      std::ostringstream os;
      os << "domain is not invariant; witness point " << vec_to_json(*w).dump();
      throw Error(ErrorCode::NotInvariant, os.str());
    }
  if (kind == "empty") return empty_map(g);
  if (kind == "orbit_normal")
    return orbit_normal(g, cfg.domain, vec_from_json(p.at("point")), p.at("epsilon").get<double>());
  return make_map(g, cfg.domain, parse_polynomial(p.at("expr").get<std::string>(), cfg.dim()),
                  cfg.numerics.bbox);
}

int exit_code_for(const Error& e) { return is_numerics_error(e.code()) ? kExitNumerics : kExitValidation; }

CommandResult guarded(const std::string& command, const std::function<CommandResult()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    return {exit_code_for(e), error_report(command, e)};
  } catch (const json::exception& e) {
    return {kExitValidation, error_report(command, Error(ErrorCode::ConfigError, e.what()))};
  }
}

CommandResult run_strata(const RunConfig& cfg) {
  return guarded("strata", [&] {
    require_finite_group(cfg, "strata");
    if (auto bad = domain_check("strata", cfg)) return *bad;
    const ThetaContext ctx(cfg.group, cfg.domain, cfg.numerics);
    const GroupAction& g = ctx.group();
    const OrbitTypeLattice& lat = ctx.lattice();

    json r = header("strata", cfg);
    r["group_order"] = g.order();
    json types = json::array();
    json strata = json::array();
    for (std::size_t i = 0; i < lat.classes.size(); ++i) {
      const int cid = lat.classes[i];
      const auto& cls = g.lattice.classes[cid];
      const int dim = static_cast<int>(g.lattice.representative(cid).fixed_basis.cols());
      types.push_back({{"position", i},
                       {"orbit_type", cls.name},
                       {"class_id", cid},
                       {"order", cls.order},
                       {"dim", dim},
                       {"witness", vec_to_json(lat.witnesses[i])}});
      if (dim == 0) continue;
      const Stratum& s = ctx.stratum(cid);
      json comps = json::array();
      for (int c = 0; c < static_cast<int>(s.components.size()); ++c) {
        const Component& comp = s.components[c];
        comps.push_back({{"label", s.component_label(c)},
                         {"cells", comp.cells.size()},
                         {"quotient", "q" + std::to_string(comp.quotient)},
                         {"stabilizer", comp.stabilizer}});
      }
      json quots = json::array();
      for (int q = 0; q < static_cast<int>(s.quotient_reps.size()); ++q) {
        const int c = s.quotient_reps[q];
        quots.push_back({{"label", "q" + std::to_string(q)},
                         {"representative", s.component_label(c)},
                         {"stabilizer", s.components[c].stabilizer}});
      }
      strata.push_back({{"orbit_type", cls.name},
                        {"dim", dim},
                        {"weyl_order", s.weyl_order()},
                        {"components", comps},
                        {"quotient_labels", quots}});
    }
    r["lattice"] = types;
    r["warnings"] = lat.warnings;
    r["strata"] = strata;
    return CommandResult{kExitOk, r};
  });
}

CommandResult run_theta(const RunConfig& cfg) {
  return guarded("theta", [&] {
    if (auto bad = domain_check("theta", cfg)) return *bad;
    ThetaResult res;
    if (cfg.catalog_entry) {
      res = cfg.catalog_entry->compute(cfg.numerics);
    } else if (cfg.is_circle()) {
      const std::string kind = cfg.potential_spec.at("kind").get<std::string>();
      if (kind != "polynomial") config_error("circle groups take a polynomial potential");
      res = theta_radial_s1(cfg.circle_weights,
                            parse_polynomial(cfg.potential_spec.at("expr").get<std::string>(), 2),
                            cfg.domain.kind() == DomainExpr::Kind::Punctured, cfg.numerics);
    } else {
      const ThetaContext ctx(cfg.group, cfg.domain, cfg.numerics);
      res = theta(ctx, build_map(cfg));
    }
    json r = header("theta", cfg);
    const json t = res.theta.to_json();
    r["theta11"] = t["theta11"];
    r["entries"] = t["entries"];
    r["trace"] = res.trace.to_json();
    if (cfg.catalog_entry) {
      const ThetaVector want = cfg.catalog_entry->expected_theta();
      r["expected"] = want.to_json();
      r["matches_expected"] = res.theta == want;
    }
    return CommandResult{kExitOk, r};
  });
}

CommandResult run_degree(const RunConfig& cfg) {
  return guarded("degree", [&] {
    if (auto bad = domain_check("degree", cfg)) return *bad;
    const LocalGradientMap f = build_map(cfg);
    const Numerics& num = cfg.numerics;
    json r = header("degree", cfg);

    if (cfg.box) {
      const auto& [lo, hi] = *cfg.box;
      const int d = f.dim();
      // The closed box has to sit inside D_f; check a lattice of points.
      const GridRegion probe = box_region(lo, hi, 8);
      for (const auto& c : probe.cells())
        for (int corner = 0; corner < (1 << d); ++corner) {
          Vec p = probe.vertex(c);
          for (int i = 0; i < d; ++i)
            if (corner >> i & 1) p[i] += probe.step()[i];
          if (!f.domain().contains(p))
            throw Error(ErrorCode::InvalidArgument, "box leaves the domain at " + vec_to_json(p).dump());
        }
      const Field field = [&](const Vec& x) { return f.gradient(x); };
      NewtonOptions opt;
      opt.tol = num.newton_tol;
      opt.zero_thresh = num.zero_thresh;
      NewtonStats ns;
      const int per_axis = d == 1 ? 40 : d == 2 ? 15 : d == 3 ? 9 : 5;
      const auto zeros = find_zeros_box(field, lo, hi, per_axis, opt, &ns);
      DegreeResult res;
      res.zeros = static_cast<int>(zeros.size());
      for (const auto& z : zeros) res.degenerate += z.index == 0;
      res.morse = morse_sum(zeros);
      json kstats;
      if (d <= 3) {
        KroneckerStats ks;
        res.kronecker = kronecker_box(field, lo, hi, &ks);
        res.value = *res.kronecker;
        res.method = "kronecker";
        kstats = {{"faces", ks.faces}, {"evaluations", ks.evaluations},
                  {"residual", ks.residual}, {"min_norm", ks.min_norm}};
      } else if (res.morse) {
        res.value = *res.morse;
        res.method = "morse";
      } else {
        throw Error(ErrorCode::DegenerateUnresolved, "degenerate zeros in a box above dimension 3");
      }
      r["box"] = {{"lo", vec_to_json(lo)}, {"hi", vec_to_json(hi)}};
      r["degree"] = res.value;
      r["result"] = res.to_json();
      r["kronecker_stats"] = kstats;
      r["zeros"] = zeros_json(zeros);
      r["newton"] = newton_json(ns);
      return CommandResult{kExitOk, r};
    }

    // Without a box: intersection numbers on every stratum component.
    require_finite_group(cfg, "degree without a box");
    const ThetaContext ctx(cfg.group, cfg.domain, num);
    const double delta = region_step(f, num.grid_h);
    json comps = json::array();
    for (int cid : ctx.lattice().classes) {
      if (ctx.group().lattice.representative(cid).fixed_basis.cols() == 0) continue;
      const Stratum& s = ctx.stratum(cid);
      std::vector<int> all(s.components.size());
      for (std::size_t c = 0; c < all.size(); ++c) all[c] = static_cast<int>(c);
      for (const auto& cd : stratum_degrees(f, cfg.domain, s, all, num, delta)) {
        const Component& comp = s.components[cd.component];
        comps.push_back({{"orbit_type", ctx.group().lattice.classes[cid].name},
                         {"component", s.component_label(cd.component)},
                         {"quotient", "q" + std::to_string(comp.quotient)},
                         {"stabilizer", comp.stabilizer},
                         {"intersection_number", cd.degree.value},
                         {"degree", cd.degree.to_json()},
                         {"zeros", zeros_json(cd.zeros)},
                         {"newton", newton_json(cd.newton)}});
      }
    }
    r["delta"] = delta;
    r["components"] = comps;
    return CommandResult{kExitOk, r};
  });
}

CommandResult run_perturb_trace(const RunConfig& cfg) {
  return guarded("perturb-trace", [&] {
    require_finite_group(cfg, "perturb-trace");
    if (auto bad = domain_check("perturb-trace", cfg)) return *bad;
    const ThetaContext ctx(cfg.group, cfg.domain, cfg.numerics);
    const Numerics& num = cfg.numerics;
    LocalGradientMap fi = build_map(cfg);
    json layers = json::array();
    const auto& order = ctx.lattice().classes;
    for (std::size_t i = 0; i < order.size(); ++i) {
      PerturbationStep step = perturbation_step(ctx, fi, i);
      const PartitionReport rep = verify_partition(step.perturbed.family, num.samples, num.seed, num.zero_thresh);
      layers.push_back({{"position", i},
                        {"orbit_type", ctx.group().lattice.classes[step.class_id].name},
                        {"tube", step.tube.to_json()},
                        {"partition", rep.to_json()}});
      fi = step.parts.complement;
    }
    json r = header("perturb-trace", cfg);
    r["layers"] = layers;
    return CommandResult{kExitOk, r};
  });
}

CommandResult run_verify(const std::string& suite, std::uint64_t seed) {
  return guarded("verify", [&] {
    VerifyOptions opt;
    opt.seed = seed;
    const SuiteReport rep = run_suite(suite, opt);
    return CommandResult{rep.pass() ? kExitOk : kExitVerify, rep.to_json()};
  });
}

}  // namespace egdeg
