#include "egdeg/theta.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "egdeg/errors.hpp"
#include "egdeg/rng.hpp"

namespace egdeg {

void ThetaVector::set(ThetaKey key, int value, ThetaLabel label) {
  entries_[key] = value;
  labels_[key] = std::move(label);
}

int ThetaVector::at(ThetaKey key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second;
}

ThetaVector ThetaVector::normalized() const {
  ThetaVector out;
  out.theta11 = theta11;
  for (const auto& [k, v] : entries_)
    if (v != 0) out.set(k, v, labels_.at(k));
  return out;
}

bool ThetaVector::is_zero() const { return theta11.value_or(0) == 0 && normalized().entries_.empty(); }

bool ThetaVector::operator==(const ThetaVector& other) const {
  return theta11.value_or(0) == other.theta11.value_or(0) &&
         normalized().entries_ == other.normalized().entries_;
}

nlohmann::json ThetaVector::to_json() const {
  nlohmann::json j;
  j["theta11"] = theta11 ? nlohmann::json(*theta11) : nlohmann::json(nullptr);
  j["entries"] = nlohmann::json::array();
  for (const auto& [k, v] : entries_) {
    const auto& l = labels_.at(k);
    j["entries"].push_back({{"orbit_type", l.orbit_type}, {"component", l.component}, {"value", v}});
  }
  return j;
}

std::string ThetaVector::to_string() const {
  std::ostringstream os;
  os << "{theta11=" << (theta11 ? std::to_string(*theta11) : "none");
  for (const auto& [k, v] : entries_) {
    const auto& l = labels_.at(k);
    os << ", " << l.orbit_type << "/" << l.component << "=" << v;
  }
  os << "}";
  return os.str();
}

ThetaVector theta_add(const ThetaVector& a, const ThetaVector& b) {
  ThetaVector out;
  if (a.theta11 && b.theta11) {
    if (*a.theta11 == 1 && *b.theta11 == 1)
      throw Error(ErrorCode::AdditionUndefined, "theta11 = 1 on both summands");
    out.theta11 = std::max(*a.theta11, *b.theta11);
  } else {
    out.theta11 = a.theta11 ? a.theta11 : b.theta11;
  }
  for (const auto* v : {&a, &b})
    for (const auto& [k, x] : v->entries()) out.set(k, out.at(k) + x, v->label(k));
  return out;
}

nlohmann::json StepRecord::to_json() const {
  nlohmann::json j;
  j["step"] = step;
  j["orbit_type"] = orbit_type;
  j["dim"] = dim;
  j["grid_delta"] = delta;
  if (theta11) j["theta11"] = *theta11;
  j["components"] = nlohmann::json::array();
  for (const auto& c : components) {
    nlohmann::json cj;
    cj["component"] = c.component;
    cj["quotient"] = "q" + std::to_string(c.quotient);
    cj["stabilizer"] = c.stabilizer;
    cj["intersection"] = c.degree.to_json();
    cj["quotient_value"] = c.quotient_value;
    cj["region_cells"] = c.cells;
    cj["newton"] = {{"starts", c.newton.starts},
                    {"converged", c.newton.converged},
                    {"failed", c.newton.failed}};
    nlohmann::json zs = nlohmann::json::array();
    for (const auto& z : c.zeros) {
      nlohmann::json p = nlohmann::json::array();
      for (int i = 0; i < z.point.size(); ++i) p.push_back(z.point[i]);
      zs.push_back({{"point", p}, {"index", z.index}});
    }
    cj["zeros"] = zs;
    j["components"].push_back(cj);
  }
  j["tube"] = tube ? tube->to_json() : nlohmann::json(nullptr);
  j["domain_nested"] = domain_nested;
  return j;
}

nlohmann::json RecursionTrace::to_json() const {
  nlohmann::json j;
  j["lattice"] = lattice;
  j["warnings"] = warnings;
  j["steps"] = nlohmann::json::array();
  for (const auto& s : steps) j["steps"].push_back(s.to_json());
  return j;
}

ThetaContext::ThetaContext(GroupPtr group, DomainExpr omega, Numerics num)
    : group_(std::move(group)), omega_(std::move(omega)), num_(num) {
  const StrataOptions opt{num_.grid_h, num_.bbox, num_.refine_check};
  lattice_ = iso_types(*group_, omega_, opt);
  for (int cid : lattice_.classes) {
    if (group_->lattice.representative(cid).fixed_basis.cols() == 0) continue;
    strata_.emplace(cid, build_stratum(*group_, omega_, cid, opt));
  }
}

const Stratum& ThetaContext::stratum(int class_id) const {
  const auto it = strata_.find(class_id);
  if (it == strata_.end()) throw Error(ErrorCode::InvalidArgument, "no stratum grid for class");
  return it->second;
}

ThetaLabel ThetaContext::label(int class_id, int quotient) const {
  return {group_->lattice.classes[class_id].name, "q" + std::to_string(quotient)};
}

namespace {

std::string strip_code(const Error& e) {
  const std::string what = e.what();
  const auto pos = what.find(": ");
  return pos == std::string::npos ? what : what.substr(pos + 2);
}

bool nested(const DomainExpr& later, const DomainExpr& earlier, int d, double bbox) {
  for (std::uint64_t i = 0; i < 400; ++i) {
    const Vec x = (halton(i + 17, d).array() * 2.0 - 1.0).matrix() * bbox;
    if (later.contains(x) && !earlier.contains(x)) return false;
  }
  return true;
}

}  // namespace

double region_step(const LocalGradientMap& f, double h) {
  double delta = h / 2;
  const double eps = f.min_epsilon();
  if (std::isfinite(eps)) delta = std::min(delta, eps / 5);
  const double feature = f.domain().min_feature();
  if (std::isfinite(feature)) delta = std::min(delta, feature / 5);
  return delta;
}

ThetaResult theta(const ThetaContext& ctx, const LocalGradientMap& f) {
  const GroupAction& g = ctx.group();
  const Numerics& num = ctx.numerics();
  const auto& order = ctx.lattice().classes;
  const int d = g.dim();
  ThetaResult out;
  for (int cid : order) out.trace.lattice.push_back(g.lattice.classes[cid].name);
  out.trace.warnings = ctx.lattice().warnings;

  LocalGradientMap fi = f;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const int cid = order[pos];
    const auto& cls = g.lattice.classes[cid];
    StepRecord rec;
    rec.step = static_cast<int>(pos) + 1;
    rec.class_id = cid;
    rec.orbit_type = cls.name;
    const int k = static_cast<int>(g.lattice.representative(cid).fixed_basis.cols());
    rec.dim = k;
    try {
      std::vector<Vec> zeros;
      if (k == 0) {
        const bool inside = fi.domain().contains(Vec::Zero(d));
        rec.theta11 = f.domain().contains(Vec::Zero(d)) ? 1 : 0;
        out.theta.theta11 = rec.theta11;
        if (inside) zeros.push_back(Vec::Zero(d));
      } else {
        const Stratum& s = ctx.stratum(cid);
        rec.delta = region_step(fi, num.grid_h);
        const auto degrees = stratum_degrees(fi, ctx.omega(), s, s.quotient_reps, num, rec.delta);
        for (std::size_t q = 0; q < degrees.size(); ++q) {
          const auto& cd = degrees[q];
          const auto& comp = s.components[cd.component];
          ComponentRecord cr;
          cr.component = s.component_label(cd.component);
          cr.quotient = static_cast<int>(q);
          cr.stabilizer = comp.stabilizer;
          cr.degree = cd.degree;
          cr.zeros = cd.zeros;
          cr.newton = cd.newton;
          cr.cells = cd.cells;
          cr.quotient_value = quotient_intersection(cd.degree.value, comp.stabilizer);
          if (!cd.zeros.empty() || cr.quotient_value != 0)
            out.theta.set({cid, static_cast<int>(q)}, cr.quotient_value,
                          ctx.label(cid, static_cast<int>(q)));
          for (const auto& z : cd.zeros) zeros.push_back(s.basis * z.point);
          rec.components.push_back(std::move(cr));
        }
      }
      if (pos + 1 < order.size()) {
        const TubeSpec tube = select_tube(fi, cid, zeros, num);
        const PerturbResult pr = perturb(fi, tube, num.mu_kind);
        LocalGradientMap next = split(pr.map, tube).complement;
        rec.domain_nested = nested(next.domain(), fi.domain(), d, num.bbox);
        rec.tube = tube;
        fi = std::move(next);
      }
    } catch (const Error& e) {
      throw Error(e.code(), "step " + std::to_string(pos + 1) + " " + cls.name + ": " + strip_code(e));
    }
    out.trace.steps.push_back(std::move(rec));
  }
  return out;
}

PerturbationStep perturbation_step(const ThetaContext& ctx, const LocalGradientMap& f,
                                   std::size_t position) {
  const auto& order = ctx.lattice().classes;
  if (position >= order.size()) throw Error(ErrorCode::OutOfRange, "no orbit type at that position");
  const GroupAction& g = ctx.group();
  const Numerics& num = ctx.numerics();
  const int cid = order[position];
  std::vector<Vec> zeros;
  if (g.lattice.representative(cid).fixed_basis.cols() == 0) {
    if (f.domain().contains(Vec::Zero(g.dim()))) zeros.push_back(Vec::Zero(g.dim()));
  } else {
    const Stratum& s = ctx.stratum(cid);
    for (const auto& cd : stratum_degrees(f, ctx.omega(), s, s.quotient_reps, num,
                                          region_step(f, num.grid_h)))
      for (const auto& z : cd.zeros) zeros.push_back(s.basis * z.point);
  }
  TubeSpec tube = select_tube(f, cid, zeros, num);
  PerturbResult pr = perturb(f, tube, num.mu_kind);
  SplitMaps parts = split(pr.map, tube);
  return {cid, std::move(tube), std::move(pr), std::move(parts)};
}

ThetaResult theta(GroupPtr group, const DomainExpr& omega, const LocalGradientMap& f,
                  const Numerics& num) {
  return theta(ThetaContext(std::move(group), omega, num), f);
}

ThetaResult theta_radial_s1(const std::vector<int>& weights, const Polynomial& phi,
                            bool punctured, const Numerics& num) {
  if (weights.size() != 1)
    throw Error(ErrorCode::UnsupportedRep, "the S^1 demo takes exactly one weight");
  const int k = weights[0];
  if (k < 1) throw Error(ErrorCode::UnsupportedRep, "weight must be a positive integer");
  if (phi.nvars() != 2) throw Error(ErrorCode::InvalidArgument, "potential must use x1, x2");

  // S¹-invariance on sampled points and angles.
  Rng rng(num.seed, 0x5331);
  for (int i = 0; i < 200; ++i) {
    Vec z(2);
    z << rng.uniform(-num.bbox, num.bbox), rng.uniform(-num.bbox, num.bbox);
    const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
    Vec w(2);
    w << std::cos(a) * z[0] - std::sin(a) * z[1], std::sin(a) * z[0] + std::cos(a) * z[1];
    const double u = phi.value(z), v = phi.value(w);
    if (std::abs(u - v) > 1e-8 * (1.0 + std::abs(u)))
      throw Error(ErrorCode::NotInvariant, "potential is not rotation invariant");
  }

  // The real axis is a slice: φ(x, 0) with x ↦ −x generated by the rotation by π.
  Eigen::MatrixXd slice(2, 1);
  slice << 1.0, 0.0;
  const Polynomial line = phi.compose_linear(slice);
  GroupPtr z2 = antipodal_group(1);
  const DomainExpr omega = punctured ? DomainExpr::punctured() : DomainExpr::full();
  const LocalGradientMap f = make_map(z2, omega, line, num.bbox);
  ThetaResult line_result = theta(z2, omega, f, num);

  ThetaResult out;
  out.trace = std::move(line_result.trace);
  out.theta.theta11 = line_result.theta.theta11;
  const std::string name = "(Z_" + std::to_string(k) + ")";
  for (const auto& [key, v] : line_result.theta.entries()) {
    if (z2->lattice.representative(key.class_id).fixed_basis.cols() == 0) continue;
    out.theta.set({0, key.quotient}, v, {name, "q" + std::to_string(key.quotient)});
  }
  return out;
}

}  // namespace egdeg
