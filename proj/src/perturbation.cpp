#include "egdeg/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "egdeg/errors.hpp"
#include "egdeg/rng.hpp"

namespace egdeg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_range(double s, double eps, const char* what) {
  if (!(eps > 0.0) || s < -1e-12 * eps || s > eps * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << what << ": s = " << s << " outside [0, " << eps << "]";
    throw Error(ErrorCode::OutOfRange, os.str());
  }
}

double smooth(double u, MuKind kind) {
  if (kind == MuKind::Cubic) return u * u * (3.0 - 2.0 * u);
  return u * u * u * (u * (6.0 * u - 15.0) + 10.0);
}

double smooth_prime(double u, MuKind kind) {
  if (kind == MuKind::Cubic) return 6.0 * u * (1.0 - u);
  return 30.0 * u * u * (u - 1.0) * (u - 1.0);
}

const char* mu_name(MuKind k) { return k == MuKind::Cubic ? "cubic" : "quintic"; }

class PerturbedPotential final : public Potential {
 public:
  PerturbedPotential(PotentialPtr inner, TubePtr tube, double eps, double t, MuKind mu)
      : inner_(std::move(inner)), tube_(std::move(tube)), eps_(eps), t_(t), mu_(mu) {
    if (!(t_ >= 0.0 && t_ <= 1.0)) throw Error(ErrorCode::OutOfRange, "homotopy parameter outside [0, 1]");
  }

  int dim() const override { return inner_->dim(); }

  double eval(const Vec& z, Vec* grad) const override {
    const auto dec = tube_->decompose(z, eps_);
    if (!dec) return inner_->eval(z, grad);
    const double s = dec->s;
    // r_τ(x + v) = x + m(s)v with τ = min(2t, 1).
    const double tau = std::min(2.0 * t_, 1.0);
    const double m = tau * bump_mu(s, eps_, mu_) + 1.0 - tau;
    const double dm = tau * bump_mu_prime(s, eps_, mu_);
    const Vec rz = dec->base + m * dec->normal;
    const double w = t_ > 0.5 ? 2.0 * t_ - 1.0 : 0.0;
    if (!grad) return inner_->eval(rz, nullptr) + w * well_omega(s, eps_);
    Vec g;
    const double value = inner_->eval(rz, &g) + w * well_omega(s, eps_);
    const Mat& p = tube_->subspaces()[dec->subspace].projector;
    const Vec pg = p * g;
    Vec out = pg + m * (g - pg);
    if (s > 0.0) {
      const Vec vhat = dec->normal / s;
      out += (dm * s * vhat.dot(g) + w * well_omega_prime(s, eps_)) * vhat;
    }
    *grad = out;
    return value;
  }

  nlohmann::json to_json() const override {
    return {{"kind", "perturbed"}, {"inner", inner_->to_json()}, {"tube", tube_to_json(*tube_)},
            {"eps", eps_}, {"t", t_}, {"mu", mu_name(mu_)}};
  }

 private:
  PotentialPtr inner_;
  TubePtr tube_;
  double eps_, t_;
  MuKind mu_;
};

// Point of U^r over ball b: x uniform in the stratum ball, v uniform in the
// normal ball of radius r (or with |v| = s exactly when s ≥ 0).
struct TubeSample {
  Vec x, v;
  int subspace;
};

Vec normal_direction(Rng& rng, const Mat& p) {
  for (;;) {
    const Vec w = rng.normal_vec(static_cast<int>(p.rows()));
    const Vec v = w - p * w;
    const double n = v.norm();
    if (n > 1e-9) return v / n;
  }
}

Vec stratum_point(Rng& rng, const TubeGeometry& geo, const TubeBall& b, bool on_sphere) {
  const auto& sub = geo.subspaces()[b.subspace];
  const int k = sub.dim();
  if (k == 0) return b.center;
  const Vec dir = rng.direction(k);
  const double r = on_sphere ? b.radius : b.radius * std::pow(rng.uniform(), 1.0 / k);
  return b.center + sub.basis * (dir * r);
}

TubeSample tube_sample(Rng& rng, const TubeGeometry& geo, std::size_t i, double s) {
  const auto& b = geo.balls()[i % geo.balls().size()];
  const auto& sub = geo.subspaces()[b.subspace];
  TubeSample out;
  out.subspace = b.subspace;
  out.x = stratum_point(rng, geo, b, false);
  const int m = geo.ambient_dim() - sub.dim();
  if (m == 0 || s == 0.0) {
    out.v = Vec::Zero(geo.ambient_dim());
    return out;
  }
  out.v = normal_direction(rng, sub.projector) * s;
  return out;
}

double radial_draw(Rng& rng, double r, int m) {
  double u = rng.uniform();
  while (u <= 0.0) u = rng.uniform();
  return r * std::pow(u, 1.0 / std::max(m, 1));
}

}  // namespace

double well_omega(double s, double eps) {
  check_range(s, eps, "well_omega");
  if (s <= eps / 3.0) return 0.5 * s * s - eps * eps / 9.0;
  if (s <= 2.0 * eps / 3.0) {
    const double d = s - 2.0 * eps / 3.0;
    return -0.5 * d * d;
  }
  return 0.0;
}

double well_omega_prime(double s, double eps) {
  check_range(s, eps, "well_omega_prime");
  if (s <= eps / 3.0) return s;
  if (s <= 2.0 * eps / 3.0) return 2.0 * eps / 3.0 - s;
  return 0.0;
}

double bump_mu(double s, double eps, MuKind kind) {
  check_range(s, eps, "bump_mu");
  if (s <= 2.0 * eps / 3.0) return 0.0;
  const double u = std::min(1.0, (s - 2.0 * eps / 3.0) / (eps / 3.0));
  return smooth(u, kind);
}

double bump_mu_prime(double s, double eps, MuKind kind) {
  check_range(s, eps, "bump_mu_prime");
  if (s <= 2.0 * eps / 3.0) return 0.0;
  const double u = std::min(1.0, (s - 2.0 * eps / 3.0) / (eps / 3.0));
  return smooth_prime(u, kind) * 3.0 / eps;
}

PotentialPtr perturbed_potential(PotentialPtr inner, TubePtr tube, double eps, double t, MuKind mu) {
  return std::make_shared<PerturbedPotential>(std::move(inner), std::move(tube), eps, t, mu);
}

nlohmann::json TubeSpec::to_json() const {
  nlohmann::json balls = nlohmann::json::array();
  if (geometry)
    for (const auto& b : geometry->balls())
      balls.push_back({{"center", vec_to_json(b.center)},
                       {"rho", std::isfinite(b.radius) ? nlohmann::json(b.radius) : nlohmann::json()}});
  return {{"class_id", class_id},
          {"epsilon", epsilon},
          {"balls", balls},
          {"zeros", zeros.size()},
          {"margin", std::isfinite(margin) ? nlohmann::json(margin) : nlohmann::json()},
          {"gap", std::isfinite(gap) ? nlohmann::json(gap) : nlohmann::json()},
          {"halvings", halvings}};
}

TubeSpec select_tube(const LocalGradientMap& f, int class_id, const std::vector<Vec>& zeros,
                     const Numerics& num) {
  const GroupAction& g = f.group();
  const int d = g.dim();
  TubeSpec spec;
  spec.class_id = class_id;

  std::vector<Eigen::MatrixXd> bases;
  std::vector<int> elements;
  conjugate_subspaces(g, class_id, bases, elements);
  std::vector<TubeSubspace> subs;
  for (const auto& b : bases) subs.push_back({b, Mat(b * b.transpose())});
  const int k = subs.front().dim();
  if (k == 0) subs.front().projector = Mat::Zero(d, d);

  if (zeros.empty()) {
    spec.geometry = std::make_shared<const TubeGeometry>(d, std::move(subs), std::vector<TubeBall>{});
    return spec;
  }

  const auto larger = larger_subspaces(g, g.lattice.classes[class_id].representative);
  std::vector<TubeBall> balls;
  double eps = kInf;
  for (const auto& x : zeros) {
    double rho = kInf;
    if (k > 0) {
      double clearance = f.domain().margin(x);
      for (const auto& p : larger) clearance = std::min(clearance, (x - p * x).norm());
      rho = std::min(2.0 * num.grid_h, clearance / 2.0);
      if (!(rho > 0.0)) {
        std::ostringstream os;
        os << "zero (" << x.transpose() << ") touches a larger stratum or the domain boundary";
        throw Error(ErrorCode::TubeSelectionFailed, os.str());
      }
      eps = std::min(eps, rho);
    } else {
      eps = std::min(2.0 * num.grid_h, std::max(f.domain().margin(x), 0.0));
    }
    for (int e = 0; e < g.order(); ++e) {
      const Vec p = g.rep.matrix(e) * x;
      int j = -1;
      for (std::size_t i = 0; i < subs.size() && j < 0; ++i)
        if ((p - subs[i].projector * p).norm() <= 1e-8 * (1.0 + p.norm())) j = static_cast<int>(i);
      if (j < 0) throw Error(ErrorCode::TubeSelectionFailed, "zero image lies on no conjugate subspace");
      bool dup = false;
      for (const auto& b : balls) dup = dup || (b.subspace == j && (b.center - p).norm() <= 1e-9);
      if (dup) continue;
      balls.push_back({j, p, rho});
      spec.zeros.push_back(p);
    }
  }
  spec.geometry = std::make_shared<const TubeGeometry>(d, std::move(subs), std::move(balls));
  const TubeGeometry& geo = *spec.geometry;

  std::string reason = "no admissible radius";
  for (int attempt = 0; attempt <= num.max_halvings; ++attempt, eps /= 2.0) {
    if (!(eps > 0.0)) break;
    Rng rng(num.seed, 0x7475626500ULL + static_cast<std::uint64_t>(class_id) * 64 + attempt);
    bool ok = true;
    double margin = kInf, gap = kInf;
    const int n = num.samples;
    for (int i = 0; i < n && ok; ++i) {
      // U^ε ⊂ D_f and uniqueness of the nearest conjugate subspace.
      const auto& b = geo.balls()[i % geo.balls().size()];
      const int m = d - geo.subspaces()[b.subspace].dim();
      const TubeSample ts = tube_sample(rng, geo, i, radial_draw(rng, eps, m) * (1.0 - 1e-12));
      const Vec z = ts.x + ts.v;
      if (!f.domain().contains(z)) {
        reason = "U^eps leaves D_f";
        ok = false;
        break;
      }
      if (geo.subspaces().size() > 1) {
        double d1 = kInf, d2 = kInf;
        int nearest = -1;
        for (std::size_t j = 0; j < geo.subspaces().size(); ++j) {
          const double dist = (z - geo.subspaces()[j].projector * z).norm();
          if (dist < d1) {
            d2 = d1;
            d1 = dist;
            nearest = static_cast<int>(j);
          } else {
            d2 = std::min(d2, dist);
          }
        }
        gap = std::min(gap, d2 - d1);
        if (nearest != ts.subspace || d2 - d1 <= eps / 10.0) {
          reason = "nearest conjugate subspace not unique";
          ok = false;
          break;
        }
      }
    }
    if (ok && k > 0) {
      // f has no zeros on B^ε, which must also lie in D_f.
      for (int i = 0; i < n && ok; ++i) {
        const auto& b = geo.balls()[i % geo.balls().size()];
        const Vec x = stratum_point(rng, geo, b, true);
        if (geo.u_signed(b.subspace, x) < -1e-12 * (1.0 + b.radius)) continue;  // interior of U
        const int m = d - k;
        Vec z = x;
        if (m > 0) z += normal_direction(rng, geo.subspaces()[b.subspace].projector) * (eps * std::pow(rng.uniform(), 1.0 / m));
        if (!f.domain().contains(z)) {
          reason = "B^eps leaves D_f";
          ok = false;
          break;
        }
        margin = std::min(margin, f.gradient(z).norm());
      }
      if (ok && !(margin > 10.0 * num.zero_thresh)) {
        reason = "gradient vanishes on B^eps";
        ok = false;
      }
    }
    if (ok) {
      spec.epsilon = eps;
      spec.margin = margin;
      spec.gap = gap;
      spec.halvings = attempt;
      return spec;
    }
  }
  std::ostringstream os;
  os << "class " << g.lattice.classes[class_id].name << ": " << reason << " after "
     << num.max_halvings << " halvings";
  throw Error(ErrorCode::TubeSelectionFailed, os.str());
}

LocalGradientMap HomotopyFamily::section(double t) const {
  if (tube.empty()) return base;
  return base.with_layer(
      perturbed_potential(base.potential(), tube.geometry, tube.epsilon, t, mu), base.domain(),
      {tube.class_id, tube.epsilon, tube.margin, static_cast<int>(tube.geometry->balls().size())});
}

HomotopyFamily::Region HomotopyFamily::region(double t, const Vec& z) const {
  if (tube.empty()) return Region::Outside;
  const auto dec = tube.geometry->decompose(z, tube.epsilon);
  if (!dec) return Region::Outside;
  if (t <= 0.5) return Region::A;
  if (dec->s >= 2.0 * tube.epsilon / 3.0) return Region::B;
  if (dec->s > 0.0) return Region::C;
  return Region::D;
}

PerturbResult perturb(const LocalGradientMap& f, const TubeSpec& tube, MuKind mu) {
  if (tube.empty()) {
    LayerRecord rec{tube.class_id, 0.0, tube.margin, 0};
    return {f.with_layer(f.potential(), f.domain(), rec), HomotopyFamily{f, tube, mu}};
  }
  const DomainExpr off_walls =
      DomainExpr::difference(f.domain(), DomainExpr::walls(tube.geometry, tube.epsilon));
  HomotopyFamily family{f.with_domain(off_walls), tube, mu};
  LayerRecord rec{tube.class_id, tube.epsilon, tube.margin, static_cast<int>(tube.geometry->balls().size())};
  LocalGradientMap g = f.with_layer(perturbed_potential(f.potential(), tube.geometry, tube.epsilon, 1.0, mu),
                                    off_walls, rec);
  return {std::move(g), std::move(family)};
}

SplitMaps split(const LocalGradientMap& perturbed, const TubeSpec& tube) {
  std::vector<Eigen::MatrixXd> projectors;
  for (const auto& s : tube.geometry->subspaces()) projectors.emplace_back(Eigen::MatrixXd(s.projector));
  const DomainExpr dc =
      DomainExpr::difference(perturbed.domain(), DomainExpr::subspaces(std::move(projectors)));
  if (tube.empty()) {
    return {perturbed.with_domain(DomainExpr::empty()), perturbed.with_domain(dc), perturbed.with_domain(dc)};
  }
  const DomainExpr inner = DomainExpr::tube(tube.geometry, tube.epsilon / 3.0);
  return {perturbed.with_domain(DomainExpr::intersection({perturbed.domain(), inner})),
          perturbed.with_domain(dc), perturbed.with_domain(DomainExpr::difference(dc, inner))};
}

nlohmann::json PartitionReport::to_json() const {
  auto one = [](const RegionStats& r) {
    return nlohmann::json{{"samples", r.samples},
                          {"violations", r.violations},
                          {"zero_pairs", r.zero_pairs},
                          {"twilight", r.twilight},
                          {"min_norm", std::isfinite(r.min_norm) ? nlohmann::json(r.min_norm) : nlohmann::json()},
                          {"max_defect", r.max_defect}};
  };
  return {{"A", one(a)}, {"B", one(b)}, {"C", one(c)}, {"D", one(d)}};
}

PartitionReport verify_partition(const HomotopyFamily& family, int n_samples, std::uint64_t seed,
                                 double zero_thresh) {
  PartitionReport rep;
  if (family.tube.empty()) return rep;
  const TubeGeometry& geo = *family.tube.geometry;
  const double eps = family.tube.epsilon;
  const int d = geo.ambient_dim();
  const int m = d - geo.stratum_dim();
  const PotentialPtr& phi = family.base.potential();
  Rng rng(seed, 0x706172ULL);

  auto grad_at = [&](double t, const Vec& z) {
    Vec g;
    perturbed_potential(phi, family.tube.geometry, eps, t, family.mu)->eval(z, &g);
    return g;
  };
  auto inner_at_retraction = [&](double tau, const Vec& z) {
    const auto dec = geo.decompose(z, eps);
    const double mu = tau * bump_mu(dec->s, eps, family.mu) + 1.0 - tau;
    Vec g;
    phi->eval(dec->base + mu * dec->normal, &g);
    return g;
  };
  auto fail = [&](char region, double t, const Vec& z, const std::string& what) {
    std::ostringstream os;
    os << "region " << region << ", t = " << t << ", z = (" << z.transpose() << "): " << what;
    throw Error(ErrorCode::PartitionViolation, os.str());
  };
  auto check_iff = [&](RegionStats& st, char region, double t, double tau, const Vec& z) {
    const double h = grad_at(t, z).norm();
    const double fr = inner_at_retraction(tau, z).norm();
    ++st.samples;
    st.min_norm = std::min(st.min_norm, h);
    // Where both sides are tiny (near the rim s = 2ε/3 the retraction
    // degenerates) a fixed threshold cannot separate them; only a clear
    // disagreement counts.
    const double lo = std::min(h, fr), hi = std::max(h, fr);
    if (lo <= zero_thresh && hi > zero_thresh) {
      if (hi > 1e3 * zero_thresh) {
        ++st.violations;
        std::ostringstream os;
        os << std::setprecision(3) << "|h| = " << h << " but |f(r z)| = " << fr;
        fail(region, t, z, os.str());
      }
      ++st.twilight;
    } else if (hi <= zero_thresh) {
      ++st.zero_pairs;
    }
  };

  for (int i = 0; i < n_samples; ++i) {
    // A: half of the samples sit where f∘r₁ vanishes (t = ½, x a zero).
    if (i % 2 == 0 && !family.tube.zeros.empty()) {
      const Vec& x0 = family.tube.zeros[(i / 2) % family.tube.zeros.size()];
      Vec z = x0;
      if (m > 0) {
        // Normal space of the subspace through x0.
        int sub = 0;
        double best = kInf;
        for (std::size_t q = 0; q < geo.subspaces().size(); ++q) {
          const double dist = (x0 - geo.subspaces()[q].projector * x0).norm();
          if (dist < best) {
            best = dist;
            sub = static_cast<int>(q);
          }
        }
        z += normal_direction(rng, geo.subspaces()[sub].projector) * (2.0 * eps / 3.0 * rng.uniform());
      }
      check_iff(rep.a, 'A', 0.5, 1.0, z);
    } else {
      const double t = 0.5 * rng.uniform();
      const TubeSample ts = tube_sample(rng, geo, i, m > 0 ? radial_draw(rng, eps, m) * (1.0 - 1e-12) : 0.0);
      check_iff(rep.a, 'A', t, 2.0 * t, ts.x + ts.v);
    }
  }
  if (m > 0) {
    for (int i = 0; i < n_samples; ++i) {
      const double t = 0.5 + 0.5 * rng.uniform();
      const double s = eps * (2.0 / 3.0 + rng.uniform() / 3.0) * (1.0 - 1e-12);
      const TubeSample ts = tube_sample(rng, geo, i, s);
      check_iff(rep.b, 'B', t, 1.0, ts.x + ts.v);
    }
    for (int i = 0; i < n_samples; ++i) {
      // t ∈ (½, 1]: at t = ½ exactly h reduces to f(x), which may vanish.
      const double t = 1.0 - 0.5 * rng.uniform();
      double u = rng.uniform();
      while (u <= 0.0) u = rng.uniform();
      const TubeSample ts = tube_sample(rng, geo, i, 2.0 * eps / 3.0 * u);
      const Vec z = ts.x + ts.v;
      const double h = grad_at(t, z).norm();
      ++rep.c.samples;
      rep.c.min_norm = std::min(rep.c.min_norm, h);
      if (!(h > zero_thresh)) {
        ++rep.c.violations;
        fail('C', t, z, "|h| = " + std::to_string(h));
      }
    }
  }
  for (int i = 0; i < n_samples; ++i) {
    const double t = 0.5 + 0.5 * rng.uniform();
    const TubeSample ts = tube_sample(rng, geo, i, 0.0);
    const Vec hz = grad_at(t, ts.x);
    const Vec fz = family.base.gradient(ts.x);
    const double defect = (hz - fz).norm();
    ++rep.d.samples;
    rep.d.min_norm = std::min(rep.d.min_norm, hz.norm());
    rep.d.max_defect = std::max(rep.d.max_defect, defect);
    if (defect > 1e-12 * (1.0 + fz.norm())) {
      ++rep.d.violations;
      fail('D', t, ts.x, "h differs from f by " + std::to_string(defect));
    }
  }
  return rep;
}

}  // namespace egdeg
