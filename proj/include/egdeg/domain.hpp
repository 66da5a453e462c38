#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "egdeg/tube.hpp"
#include "egdeg/types.hpp"

namespace egdeg {

struct GroupAction;

/// Ball used to bound the region where a domain can have points.
struct SupportBall {
  Vec center;
  double radius;
};

/// Invariant open subset of V built from a small constructor algebra.
///
/// Every node answers a signed margin: positive inside (a lower bound on the
/// distance to the complement), non-positive outside (minus a lower bound on
/// the distance to the set). Membership is margin > 0, so a single exact
/// predicate serves both sampling and grid classification. Difference(A, B)
/// removes the closure of B.
class DomainExpr {
 public:
  enum class Kind {
    Empty,
    Full,
    Ball,
    Annulus,
    Punctured,
    Difference,
    Union,
    Intersection,
    OrbitBalls,  // union of open balls of one radius around listed points
    Tube,        // open U^r of a tube geometry
    Walls,       // closed lateral shell B^r
    Subspaces,   // closed union of linear subspaces
  };

  DomainExpr();  // empty set

  static DomainExpr empty();
  static DomainExpr full();
  static DomainExpr ball(double r);
  static DomainExpr annulus(double r1, double r2);
  static DomainExpr punctured();
  static DomainExpr difference(DomainExpr a, DomainExpr b);
  static DomainExpr union_of(std::vector<DomainExpr> parts);
  static DomainExpr intersection(std::vector<DomainExpr> parts);
  static DomainExpr orbit_balls(std::vector<Vec> centers, double r);
  static DomainExpr tube(TubePtr geometry, double r);
  static DomainExpr walls(TubePtr geometry, double r);
  static DomainExpr subspaces(std::vector<Eigen::MatrixXd> projectors);

  Kind kind() const;
  double margin(const Vec& z) const;
  bool contains(const Vec& z) const { return margin(z) > 0.0; }

  /// Radius of an origin-centred ball containing the set (∞ if unbounded).
  double bound_radius() const;
  /// Balls covering the set, or nullopt when it may be anywhere.
  std::optional<std::vector<SupportBall>> support(int dim) const;
  /// Smallest geometric length scale appearing in the expression.
  double min_feature() const;

  /// Samples 200 points in [−bbox, bbox]^d and returns a point whose
  /// membership changes under some generator, if any.
  std::optional<Vec> invariance_witness(const GroupAction& g, double bbox) const;

  nlohmann::json to_json() const;
  static DomainExpr from_json(const nlohmann::json& j, int dim);

  struct Node;

 private:
  explicit DomainExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

nlohmann::json tube_to_json(const TubeGeometry& t);
TubePtr tube_from_json(const nlohmann::json& j);
nlohmann::json vec_to_json(const Vec& v);
Vec vec_from_json(const nlohmann::json& j);
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

}  // namespace egdeg
