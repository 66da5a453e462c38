#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "egdeg/domain.hpp"
#include "egdeg/group.hpp"
#include "egdeg/polynomial.hpp"
#include "egdeg/tube.hpp"
#include "egdeg/types.hpp"

namespace egdeg {

/// Invariant potential on V. Implementations are immutable and reentrant.
class Potential {
 public:
  virtual ~Potential() = default;
  virtual int dim() const = 0;
  /// Value at z; fills the gradient when grad is non-null.
  virtual double eval(const Vec& z, Vec* grad) const = 0;
  /// Default: central differences of the gradient with step 1e−6.
  virtual Mat hessian(const Vec& z) const;
  virtual nlohmann::json to_json() const = 0;
};

using PotentialPtr = std::shared_ptr<const Potential>;

PotentialPtr polynomial_potential(Polynomial p);
/// ½|z − c|² for the nearest listed center c.
PotentialPtr orbit_normal_potential(std::vector<Vec> centers);
/// k(T_j x) + ½|v|² for z = x + v in the tube over conjugate subspace j,
/// where T_j maps subspace j onto stratum coordinates.
PotentialPtr normal_lift_potential(TubePtr tube, double radius,
                                   std::vector<Eigen::MatrixXd> to_stratum, Polynomial k);
/// a on first_domain, b elsewhere.
PotentialPtr union_potential(DomainExpr first_domain, PotentialPtr a, PotentialPtr b);
/// λφ for λ > 0; the zero set and its indices are unchanged.
PotentialPtr scaled_potential(PotentialPtr inner, double lambda);
PotentialPtr potential_from_json(const nlohmann::json& j);

/// Bookkeeping for one perturbation step applied to a map.
struct LayerRecord {
  int class_id = -1;
  double epsilon = 0.0;
  double margin = 0.0;
  int balls = 0;
};

/// f = ∇φ on an invariant open domain D_f.
class LocalGradientMap {
 public:
  LocalGradientMap(GroupPtr group, DomainExpr domain, PotentialPtr potential,
                   std::vector<LayerRecord> layers = {});

  const GroupAction& group() const { return *group_; }
  const GroupPtr& group_ptr() const { return group_; }
  const DomainExpr& domain() const { return domain_; }
  const PotentialPtr& potential() const { return potential_; }
  const std::vector<LayerRecord>& layers() const { return layers_; }
  int dim() const { return group_->dim(); }

  struct Evaluation {
    double value;
    Vec gradient;
    Mat hessian;
  };
  /// Throws OutsideDomain unless x ∈ D_f.
  Evaluation evaluate(const Vec& x) const;

  // Unchecked evaluators for inner loops; callers guarantee x ∈ D_f.
  double value(const Vec& x) const { return potential_->eval(x, nullptr); }
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const { return potential_->hessian(x); }

  /// Smallest perturbation radius used so far (∞ if none).
  double min_epsilon() const;

  LocalGradientMap with_domain(DomainExpr d) const;
  LocalGradientMap scaled(double lambda) const;
  LocalGradientMap with_layer(PotentialPtr potential, DomainExpr d, LayerRecord layer) const;

  nlohmann::json to_json() const;
  static LocalGradientMap from_json(const nlohmann::json& j, GroupPtr group);

 private:
  GroupPtr group_;
  DomainExpr domain_;
  PotentialPtr potential_;
  std::vector<LayerRecord> layers_;
};

/// Builds f = ∇φ on Ω after checking invariance of φ (500 Halton points in
/// the box, tolerance 1e−8(1+|φ|)) and of Ω (200 points). NotInvariant
/// reports the worst sample.
LocalGradientMap make_map(GroupPtr group, DomainExpr omega, const Polynomial& phi, double bbox);

/// The empty map: D = ∅.
LocalGradientMap empty_map(GroupPtr group);

/// Worst ‖∇φ(Q_g x) − Q_g ∇φ(x)‖ over samples of D_f ∩ box and generators.
double equivariance_defect(const LocalGradientMap& f, double bbox, int samples = 200);

/// Gradient field restricted to V^H, in the coordinates of an orthonormal
/// basis B: g(y) = Bᵀ∇φ(By).
class StratumField {
 public:
  StratumField(const LocalGradientMap& f, Eigen::MatrixXd basis);

  int dim() const { return static_cast<int>(basis_.cols()); }
  const Eigen::MatrixXd& basis() const { return basis_; }
  const LocalGradientMap& map() const { return f_; }
  Vec embed(const Vec& y) const { return basis_ * y; }
  bool in_domain(const Vec& y) const { return f_.domain().contains(embed(y)); }
  double domain_margin(const Vec& y) const { return f_.domain().margin(embed(y)); }
  double value(const Vec& y) const { return f_.value(embed(y)); }
  Vec gradient(const Vec& y) const;
  Mat hessian(const Vec& y) const;
  /// ‖(I − BBᵀ)∇φ(By)‖; zero for invariant φ.
  double tangency_residual(const Vec& y) const;

  /// Polynomial φ∘B when the base potential is a plain polynomial.
  std::optional<Polynomial> restricted_polynomial() const;

 private:
  LocalGradientMap f_;
  Eigen::MatrixXd basis_;
};

StratumField restrict_to_stratum(const LocalGradientMap& f, const Eigen::MatrixXd& basis);

/// f ⊔ g. Disjointness is checked on 1000 support samples of each side.
LocalGradientMap disjoint_union(const LocalGradientMap& f, const LocalGradientMap& g);

}  // namespace egdeg
