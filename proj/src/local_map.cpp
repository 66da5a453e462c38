#include "egdeg/local_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "egdeg/errors.hpp"
#include "egdeg/perturbation.hpp"
#include "egdeg/rng.hpp"

namespace egdeg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFdStep = 1e-6;

class PolynomialPotential final : public Potential {
 public:
  explicit PolynomialPotential(Polynomial p) : p_(std::move(p)) {}
  int dim() const override { return p_.nvars(); }
  double eval(const Vec& z, Vec* grad) const override {
    if (grad) return p_.value_gradient(z, *grad);
    return p_.value(z);
  }
  Mat hessian(const Vec& z) const override { return p_.hessian(z); }
  nlohmann::json to_json() const override { return {{"kind", "polynomial"}, {"poly", p_.to_json()}}; }
  const Polynomial& polynomial() const { return p_; }

 private:
  Polynomial p_;
};

class OrbitNormalPotential final : public Potential {
 public:
  explicit OrbitNormalPotential(std::vector<Vec> centers) : centers_(std::move(centers)) {
    if (centers_.empty()) throw Error(ErrorCode::InvalidArgument, "orbit-normal potential needs centers");
  }
  int dim() const override { return static_cast<int>(centers_.front().size()); }
  double eval(const Vec& z, Vec* grad) const override {
    const Vec* best = &centers_.front();
    double bd = kInf;
    for (const auto& c : centers_) {
      const double d = (z - c).squaredNorm();
      if (d < bd) {
        bd = d;
        best = &c;
      }
    }
    if (grad) *grad = z - *best;
    return 0.5 * bd;
  }
  Mat hessian(const Vec& z) const override { return Mat::Identity(z.size(), z.size()); }
  nlohmann::json to_json() const override {
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : centers_) cs.push_back(vec_to_json(c));
    return {{"kind", "orbit_normal"}, {"centers", cs}};
  }

 private:
  std::vector<Vec> centers_;
};

class NormalLiftPotential final : public Potential {
 public:
  NormalLiftPotential(TubePtr tube, double radius, std::vector<Eigen::MatrixXd> to_stratum,
                      Polynomial k)
      : tube_(std::move(tube)), radius_(radius), to_stratum_(std::move(to_stratum)), k_(std::move(k)) {
    if (to_stratum_.size() != tube_->subspaces().size())
      throw Error(ErrorCode::InvalidArgument, "one stratum chart per conjugate subspace required");
  }
  int dim() const override { return tube_->ambient_dim(); }
  double eval(const Vec& z, Vec* grad) const override {
    int j = 0;
    double best = kInf;
    const auto& subs = tube_->subspaces();
    for (std::size_t i = 0; i < subs.size(); ++i) {
      const double d = (z - subs[i].projector * z).squaredNorm();
      if (d < best) {
        best = d;
        j = static_cast<int>(i);
      }
    }
    const Vec x = subs[j].projector * z;
    const Vec v = z - x;
    const Vec y = to_stratum_[j] * x;
    Vec gk;
    const double kv = k_.value_gradient(y, gk);
    if (grad) *grad = to_stratum_[j].transpose() * gk + v;
    return kv + 0.5 * v.squaredNorm();
  }
  nlohmann::json to_json() const override {
    nlohmann::json ts = nlohmann::json::array();
    for (const auto& t : to_stratum_) ts.push_back(matrix_to_json(t));
    return {{"kind", "normal_lift"}, {"tube", tube_to_json(*tube_)}, {"radius", radius_},
            {"to_stratum", ts}, {"k", k_.to_json()}};
  }

 private:
  TubePtr tube_;
  double radius_;
  std::vector<Eigen::MatrixXd> to_stratum_;
  Polynomial k_;
};

class UnionPotential final : public Potential {
 public:
  UnionPotential(DomainExpr first, PotentialPtr a, PotentialPtr b)
      : first_(std::move(first)), a_(std::move(a)), b_(std::move(b)) {}
  int dim() const override { return a_->dim(); }
  double eval(const Vec& z, Vec* grad) const override {
    return first_.contains(z) ? a_->eval(z, grad) : b_->eval(z, grad);
  }
  Mat hessian(const Vec& z) const override {
    return first_.contains(z) ? a_->hessian(z) : b_->hessian(z);
  }
  nlohmann::json to_json() const override {
    return {{"kind", "union"}, {"dim", dim()}, {"domain", first_.to_json()},
            {"a", a_->to_json()}, {"b", b_->to_json()}};
  }

 private:
  DomainExpr first_;
  PotentialPtr a_, b_;
};

class ScaledPotential final : public Potential {
 public:
  ScaledPotential(PotentialPtr inner, double lambda) : inner_(std::move(inner)), lambda_(lambda) {}
  int dim() const override { return inner_->dim(); }
  double eval(const Vec& z, Vec* grad) const override {
    const double v = inner_->eval(z, grad);
    if (grad) *grad *= lambda_;
    return lambda_ * v;
  }
  Mat hessian(const Vec& z) const override { return lambda_ * inner_->hessian(z); }
  nlohmann::json to_json() const override {
    return {{"kind", "scaled"}, {"lambda", lambda_}, {"inner", inner_->to_json()}};
  }

 private:
  PotentialPtr inner_;
  double lambda_;
};

// Halton point in the cube [−r, r]^d around c.
Vec cube_sample(std::uint64_t i, const Vec& c, double r) {
  return c + ((halton(i, static_cast<int>(c.size())).array() * 2.0 - 1.0) * r).matrix();
}

}  // namespace

Mat Potential::hessian(const Vec& z) const {
  const int d = static_cast<int>(z.size());
  Mat h(d, d);
  for (int j = 0; j < d; ++j) {
    Vec zp = z, zm = z, gp, gm;
    zp[j] += kFdStep;
    zm[j] -= kFdStep;
    eval(zp, &gp);
    eval(zm, &gm);
    h.col(j) = (gp - gm) / (2.0 * kFdStep);
  }
  return 0.5 * (h + h.transpose());
}

PotentialPtr polynomial_potential(Polynomial p) {
  return std::make_shared<PolynomialPotential>(std::move(p));
}

PotentialPtr orbit_normal_potential(std::vector<Vec> centers) {
  return std::make_shared<OrbitNormalPotential>(std::move(centers));
}

PotentialPtr normal_lift_potential(TubePtr tube, double radius,
                                   std::vector<Eigen::MatrixXd> to_stratum, Polynomial k) {
  return std::make_shared<NormalLiftPotential>(std::move(tube), radius, std::move(to_stratum),
                                               std::move(k));
}

PotentialPtr union_potential(DomainExpr first_domain, PotentialPtr a, PotentialPtr b) {
  return std::make_shared<UnionPotential>(std::move(first_domain), std::move(a), std::move(b));
}

PotentialPtr scaled_potential(PotentialPtr inner, double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "scale must be positive");
  return std::make_shared<ScaledPotential>(std::move(inner), lambda);
}

PotentialPtr potential_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "polynomial") return polynomial_potential(Polynomial::from_json(j.at("poly")));
  if (kind == "orbit_normal") {
    std::vector<Vec> cs;
    for (const auto& c : j.at("centers")) cs.push_back(vec_from_json(c));
    return orbit_normal_potential(std::move(cs));
  }
  if (kind == "normal_lift") {
    std::vector<Eigen::MatrixXd> ts;
    for (const auto& t : j.at("to_stratum")) ts.push_back(matrix_from_json(t));
    return normal_lift_potential(tube_from_json(j.at("tube")), j.at("radius").get<double>(),
                                 std::move(ts), Polynomial::from_json(j.at("k")));
  }
  if (kind == "union") {
    const int dim = j.at("dim").get<int>();
    return union_potential(DomainExpr::from_json(j.at("domain"), dim),
                           potential_from_json(j.at("a")), potential_from_json(j.at("b")));
  }
  if (kind == "scaled")
    return scaled_potential(potential_from_json(j.at("inner")), j.at("lambda").get<double>());
  if (kind == "perturbed") {
    const MuKind mu = j.at("mu").get<std::string>() == "quintic" ? MuKind::Quintic : MuKind::Cubic;
    return perturbed_potential(potential_from_json(j.at("inner")), tube_from_json(j.at("tube")),
                               j.at("eps").get<double>(), j.at("t").get<double>(), mu);
  }
  throw Error(ErrorCode::ConfigError, "unknown potential kind '" + kind + "'");
}

LocalGradientMap::LocalGradientMap(GroupPtr group, DomainExpr domain, PotentialPtr potential,
                                   std::vector<LayerRecord> layers)
    : group_(std::move(group)),
      domain_(std::move(domain)),
      potential_(std::move(potential)),
      layers_(std::move(layers)) {
  if (!group_ || !potential_) throw Error(ErrorCode::InvalidArgument, "map needs a group and a potential");
  if (potential_->dim() != group_->dim())
    throw Error(ErrorCode::InvalidArgument, "potential dimension does not match the representation");
}

LocalGradientMap::Evaluation LocalGradientMap::evaluate(const Vec& x) const {
  if (x.size() != dim()) throw Error(ErrorCode::InvalidArgument, "point has wrong dimension");
  if (!domain_.contains(x)) {
    std::ostringstream os;
    os << "point (" << x.transpose() << ") is not in D_f";
    throw Error(ErrorCode::OutsideDomain, os.str());
  }
  Evaluation e;
  e.value = potential_->eval(x, &e.gradient);
  e.hessian = potential_->hessian(x);
  return e;
}

Vec LocalGradientMap::gradient(const Vec& x) const {
  Vec g;
  potential_->eval(x, &g);
  return g;
}

double LocalGradientMap::min_epsilon() const {
  double m = kInf;
  for (const auto& l : layers_)
    if (l.epsilon > 0.0) m = std::min(m, l.epsilon);
  return m;
}

LocalGradientMap LocalGradientMap::with_domain(DomainExpr d) const {
  return LocalGradientMap(group_, std::move(d), potential_, layers_);
}

LocalGradientMap LocalGradientMap::scaled(double lambda) const {
  return LocalGradientMap(group_, domain_, scaled_potential(potential_, lambda), layers_);
}

LocalGradientMap LocalGradientMap::with_layer(PotentialPtr potential, DomainExpr d,
                                              LayerRecord layer) const {
  auto layers = layers_;
  layers.push_back(layer);
  return LocalGradientMap(group_, std::move(d), std::move(potential), std::move(layers));
}

nlohmann::json LocalGradientMap::to_json() const {
  nlohmann::json ls = nlohmann::json::array();
  for (const auto& l : layers_)
    ls.push_back({{"class_id", l.class_id}, {"epsilon", l.epsilon}, {"margin", l.margin}, {"balls", l.balls}});
  return {{"dim", dim()}, {"domain", domain_.to_json()}, {"potential", potential_->to_json()}, {"layers", ls}};
}

LocalGradientMap LocalGradientMap::from_json(const nlohmann::json& j, GroupPtr group) {
  const int dim = j.at("dim").get<int>();
  std::vector<LayerRecord> layers;
  for (const auto& l : j.at("layers"))
    layers.push_back({l.at("class_id").get<int>(), l.at("epsilon").get<double>(),
                      l.at("margin").get<double>(), l.at("balls").get<int>()});
  return LocalGradientMap(std::move(group), DomainExpr::from_json(j.at("domain"), dim),
                          potential_from_json(j.at("potential")), std::move(layers));
}

LocalGradientMap make_map(GroupPtr group, DomainExpr omega, const Polynomial& phi, double bbox) {
  const int d = group->dim();
  if (phi.nvars() != d) throw Error(ErrorCode::ConfigError, "potential has wrong number of variables");
  if (auto w = omega.invariance_witness(*group, bbox)) {
    std::ostringstream os;
    os << "domain membership changes under a generator at (" << w->transpose() << ")";
    throw Error(ErrorCode::NotInvariant, os.str());
  }
  double worst = 0.0;
  Vec worst_x = Vec::Zero(d);
  for (std::uint64_t i = 0; i < 500; ++i) {
    const Vec x = cube_sample(i, Vec::Zero(d), bbox);
    const double v = phi.value(x);
    for (int gen : group->rep.generators()) {
      const double r = std::abs(phi.value(group->rep.matrix(gen) * x) - v) / (1.0 + std::abs(v));
      if (r > worst) {
        worst = r;
        worst_x = x;
      }
    }
  }
  if (worst > 1e-8) {
    std::ostringstream os;
    os << "potential is not invariant: relative defect " << worst << " at (" << worst_x.transpose() << ")";
    throw Error(ErrorCode::NotInvariant, os.str());
  }
  return LocalGradientMap(std::move(group), std::move(omega), polynomial_potential(phi));
}

LocalGradientMap empty_map(GroupPtr group) {
  const int d = group->dim();
  return LocalGradientMap(std::move(group), DomainExpr::empty(), polynomial_potential(Polynomial(d)));
}

double equivariance_defect(const LocalGradientMap& f, double bbox, int samples) {
  const int d = f.dim();
  double worst = 0.0;
  int taken = 0;
  for (std::uint64_t i = 0; taken < samples && i < static_cast<std::uint64_t>(samples) * 50; ++i) {
    const Vec x = cube_sample(i, Vec::Zero(d), bbox);
    if (!f.domain().contains(x)) continue;
    ++taken;
    const Vec g = f.gradient(x);
    for (int e = 0; e < f.group().order(); ++e) {
      const Mat& q = f.group().rep.matrix(e);
      worst = std::max(worst, (f.gradient(q * x) - q * g).norm());
    }
  }
  return worst;
}

StratumField::StratumField(const LocalGradientMap& f, Eigen::MatrixXd basis)
    : f_(f), basis_(std::move(basis)) {}

Vec StratumField::gradient(const Vec& y) const {
  return basis_.transpose() * f_.gradient(embed(y));
}

Mat StratumField::hessian(const Vec& y) const {
  return basis_.transpose() * f_.hessian(embed(y)) * basis_;
}

double StratumField::tangency_residual(const Vec& y) const {
  const Vec g = f_.gradient(embed(y));
  return (g - basis_ * (basis_.transpose() * g)).norm();
}

std::optional<Polynomial> StratumField::restricted_polynomial() const {
  auto* p = dynamic_cast<const PolynomialPotential*>(f_.potential().get());
  if (!p) return std::nullopt;
  return p->polynomial().compose_linear(basis_);
}

StratumField restrict_to_stratum(const LocalGradientMap& f, const Eigen::MatrixXd& basis) {
  return StratumField(f, basis);
}

namespace {

// Returns a point of `a` that also lies in `b`, sampling a's support.
std::optional<Vec> overlap_witness(const DomainExpr& a, const DomainExpr& b, int dim) {
  auto balls = a.support(dim);
  if (!balls) {
    const double r = std::min(a.bound_radius(), 10.0);
    balls = std::vector<SupportBall>{{Vec::Zero(dim), r}};
  }
  if (balls->empty()) return std::nullopt;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto& ball = (*balls)[i % balls->size()];
    const Vec x = cube_sample(i, ball.center, ball.radius);
    if (a.contains(x) && b.contains(x)) return x;
  }
  // Centres of ball-like pieces are the most likely shared points.
  for (const auto& ball : *balls)
    if (a.contains(ball.center) && b.contains(ball.center)) return ball.center;
  return std::nullopt;
}

}  // namespace

LocalGradientMap disjoint_union(const LocalGradientMap& f, const LocalGradientMap& g) {
  if (f.dim() != g.dim() || f.group().order() != g.group().order())
    throw Error(ErrorCode::InvalidArgument, "maps live on different representations");
  if (f.domain().kind() == DomainExpr::Kind::Empty) return g;
  if (g.domain().kind() == DomainExpr::Kind::Empty) return f;
  auto w = overlap_witness(f.domain(), g.domain(), f.dim());
  if (!w) w = overlap_witness(g.domain(), f.domain(), f.dim());
  if (w) {
    std::ostringstream os;
    os << "domains share the point (" << w->transpose() << ")";
    throw Error(ErrorCode::DomainsOverlap, os.str());
  }
  auto layers = f.layers();
  layers.insert(layers.end(), g.layers().begin(), g.layers().end());
  return LocalGradientMap(f.group_ptr(), DomainExpr::union_of({f.domain(), g.domain()}),
                          union_potential(f.domain(), f.potential(), g.potential()), std::move(layers));
}

}  // namespace egdeg
