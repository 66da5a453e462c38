#include "egdeg/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "egdeg/errors.hpp"
#include "egdeg/group.hpp"
#include "egdeg/rng.hpp"

namespace egdeg {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// Points this close to a removed subspace count as lying on it.
constexpr double kOnSubspace = 1e-12;
}  // namespace

struct DomainExpr::Node {
  Kind kind = Kind::Empty;
  double r1 = 0.0;
  double r2 = 0.0;
  std::vector<DomainExpr> children;
  std::vector<Vec> centers;
  TubePtr tube;
  std::vector<Mat> projectors;
  std::vector<Eigen::MatrixXd> projectors_dyn;
};

DomainExpr::DomainExpr() : DomainExpr(empty()) {}

DomainExpr DomainExpr::empty() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Empty;
  return DomainExpr(std::move(n));
}

DomainExpr DomainExpr::full() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Full;
  return DomainExpr(std::move(n));
}

DomainExpr DomainExpr::ball(double r) {
  if (!(r >= 0.0)) throw Error(ErrorCode::InvalidArgument, "ball radius must be ≥ 0");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Ball;
  n->r1 = r;
  return DomainExpr(std::move(n));
}

DomainExpr DomainExpr::annulus(double r1, double r2) {
  if (!(r1 >= 0.0 && r2 > r1)) throw Error(ErrorCode::InvalidArgument, "annulus needs 0 ≤ r1 < r2");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Annulus;
  n->r1 = r1;
  n->r2 = r2;
  return DomainExpr(std::move(n));
}

DomainExpr DomainExpr::punctured() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Punctured;
  return DomainExpr(std::move(n));
}

DomainExpr DomainExpr::difference(DomainExpr a, DomainExpr b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Difference;
  n->children = {std::move(a), std::move(b)};
  return DomainExpr(std::move(n));
}

DomainExpr DomainExpr::union_of(std::vector<DomainExpr> parts) {
  if (parts.empty()) return empty();
  if (parts.size() == 1) return parts.front();
  auto n = std::make_shared<Node>();
  n->kind = Kind::Union;
  n->children = std::move(parts);
  return DomainExpr(std::move(n));
}

DomainExpr DomainExpr::intersection(std::vector<DomainExpr> parts) {
  if (parts.empty()) return full();
  if (parts.size() == 1) return parts.front();
  auto n = std::make_shared<Node>();
  n->kind = Kind::Intersection;
  n->children = std::move(parts);
  return DomainExpr(std::move(n));
}

DomainExpr DomainExpr::orbit_balls(std::vector<Vec> centers, double r) {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "orbit ball radius must be > 0");
  auto n = std::make_shared<Node>();
  n->kind = Kind::OrbitBalls;
  n->centers = std::move(centers);
  n->r1 = r;
  return DomainExpr(std::move(n));
}

DomainExpr DomainExpr::tube(TubePtr geometry, double r) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Tube;
  n->tube = std::move(geometry);
  n->r1 = r;
  return DomainExpr(std::move(n));
}

DomainExpr DomainExpr::walls(TubePtr geometry, double r) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Walls;
  n->tube = std::move(geometry);
  n->r1 = r;
  return DomainExpr(std::move(n));
}

DomainExpr DomainExpr::subspaces(std::vector<Eigen::MatrixXd> projectors) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Subspaces;
  for (const auto& p : projectors) n->projectors.emplace_back(p);
  n->projectors_dyn = std::move(projectors);
  return DomainExpr(std::move(n));
}

DomainExpr::Kind DomainExpr::kind() const { return node_->kind; }

double DomainExpr::margin(const Vec& z) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Empty: return -kInf;
    case Kind::Full: return kInf;
    case Kind::Ball: return n.r1 - z.norm();
    case Kind::Annulus: {
      const double r = z.norm();
      return std::min(r - n.r1, n.r2 - r);
    }
    case Kind::Punctured: return z.norm();
    case Kind::Difference:
      return std::min(n.children[0].margin(z), -n.children[1].margin(z));
    case Kind::Union: {
      double m = -kInf;
      for (const auto& c : n.children) m = std::max(m, c.margin(z));
      return m;
    }
    case Kind::Intersection: {
      double m = kInf;
      for (const auto& c : n.children) m = std::min(m, c.margin(z));
      return m;
    }
    case Kind::OrbitBalls: {
      double m = -kInf;
      for (const auto& c : n.centers) m = std::max(m, n.r1 - (z - c).norm());
      return m;
    }
    case Kind::Tube: return n.tube->region_margin(z, n.r1);
    case Kind::Walls: return -n.tube->wall_distance(z, n.r1);
    case Kind::Subspaces: {
      double d = kInf;
      for (const auto& p : n.projectors) d = std::min(d, (z - p * z).norm());
      if (d <= kOnSubspace * (1.0 + z.norm())) d = 0.0;
      return -d;
    }
  }
  return -kInf;
}

double DomainExpr::bound_radius() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Empty: return 0.0;
    case Kind::Ball: return n.r1;
    case Kind::Annulus: return n.r2;
    case Kind::Difference: return n.children[0].bound_radius();
    case Kind::Union: {
      double m = 0.0;
      for (const auto& c : n.children) m = std::max(m, c.bound_radius());
      return m;
    }
    case Kind::Intersection: {
      double m = kInf;
      for (const auto& c : n.children) m = std::min(m, c.bound_radius());
      return m;
    }
    case Kind::OrbitBalls: {
      double m = 0.0;
      for (const auto& c : n.centers) m = std::max(m, c.norm() + n.r1);
      return m;
    }
    case Kind::Tube:
    case Kind::Walls: return n.tube->bound_radius(n.r1);
    default: return kInf;
  }
}

std::optional<std::vector<SupportBall>> DomainExpr::support(int dim) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Empty: return std::vector<SupportBall>{};
    case Kind::Ball:
    case Kind::Annulus: {
      const double r = n.kind == Kind::Ball ? n.r1 : n.r2;
      return std::vector<SupportBall>{{Vec::Zero(dim), r}};
    }
    case Kind::Difference: return n.children[0].support(dim);
    case Kind::Union: {
      std::vector<SupportBall> out;
      for (const auto& c : n.children) {
        auto s = c.support(dim);
        if (!s) return std::nullopt;
        out.insert(out.end(), s->begin(), s->end());
      }
      return out;
    }
    case Kind::Intersection: {
      std::optional<std::vector<SupportBall>> best;
      double best_size = kInf;
      for (const auto& c : n.children) {
        auto s = c.support(dim);
        if (!s) continue;
        double size = 0.0;
        for (const auto& b : *s) size += b.radius * b.radius * b.radius;
        if (size < best_size) {
          best_size = size;
          best = std::move(s);
        }
      }
      return best;
    }
    case Kind::OrbitBalls: {
      std::vector<SupportBall> out;
      for (const auto& c : n.centers) out.push_back({c, n.r1});
      return out;
    }
    case Kind::Tube:
    case Kind::Walls: {
      std::vector<SupportBall> out;
      for (const auto& b : n.tube->balls()) {
        const bool point = n.tube->subspaces()[b.subspace].dim() == 0;
        out.push_back({b.center, point ? n.r1 : std::hypot(b.radius, n.r1)});
      }
      return out;
    }
    default: return std::nullopt;
  }
}

double DomainExpr::min_feature() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Ball: return n.r1;
    case Kind::Annulus: return n.r2 - n.r1;
    case Kind::Difference:
    case Kind::Union:
    case Kind::Intersection: {
      double m = kInf;
      for (const auto& c : n.children) m = std::min(m, c.min_feature());
      return m;
    }
    case Kind::OrbitBalls: return n.r1;
    case Kind::Tube:
    case Kind::Walls: return std::min(n.r1, n.tube->min_ball_radius());
    default: return kInf;
  }
}

std::optional<Vec> DomainExpr::invariance_witness(const GroupAction& g, double bbox) const {
  const int d = g.dim();
  for (std::uint64_t i = 0; i < 200; ++i) {
    const Vec x = (halton(i, d).array() * 2.0 - 1.0).matrix() * bbox;
    const bool in = contains(x);
    for (int gen : g.rep.generators())
      if (contains(g.rep.matrix(gen) * x) != in) return x;
  }
  return std::nullopt;
}

nlohmann::json vec_to_json(const Vec& v) {
  nlohmann::json j = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

Vec vec_from_json(const nlohmann::json& j) {
  Vec v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) v[i] = j.at(i).get<double>();
  return v;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return nlohmann::json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = j.at("data").at(r).at(c).get<double>();
  return m;
}

nlohmann::json tube_to_json(const TubeGeometry& t) {
  nlohmann::json subs = nlohmann::json::array();
  for (const auto& s : t.subspaces()) subs.push_back(matrix_to_json(s.basis));
  nlohmann::json balls = nlohmann::json::array();
  for (const auto& b : t.balls())
    balls.push_back({{"subspace", b.subspace}, {"center", vec_to_json(b.center)}, {"radius", b.radius}});
  return {{"dim", t.ambient_dim()}, {"subspaces", subs}, {"balls", balls}};
}

TubePtr tube_from_json(const nlohmann::json& j) {
  std::vector<TubeSubspace> subs;
  for (const auto& s : j.at("subspaces")) {
    TubeSubspace ts;
    ts.basis = matrix_from_json(s);
    ts.projector = ts.basis * ts.basis.transpose();
    subs.push_back(std::move(ts));
  }
  std::vector<TubeBall> balls;
  for (const auto& b : j.at("balls")) {
    const double r = b.at("radius").is_null() ? kInf : b.at("radius").get<double>();
    balls.push_back({b.at("subspace").get<int>(), vec_from_json(b.at("center")), r});
  }
  return std::make_shared<const TubeGeometry>(j.at("dim").get<int>(), std::move(subs),
                                              std::move(balls));
}

nlohmann::json DomainExpr::to_json() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Empty: return {{"kind", "empty"}};
    case Kind::Full: return {{"kind", "full"}};
    case Kind::Ball: return {{"kind", "ball"}, {"r", n.r1}};
    case Kind::Annulus: return {{"kind", "annulus"}, {"r1", n.r1}, {"r2", n.r2}};
    case Kind::Punctured: return {{"kind", "punctured"}};
    case Kind::Difference:
      return {{"kind", "difference"}, {"a", n.children[0].to_json()}, {"b", n.children[1].to_json()}};
    case Kind::Union:
    case Kind::Intersection: {
      nlohmann::json parts = nlohmann::json::array();
      for (const auto& c : n.children) parts.push_back(c.to_json());
      return {{"kind", n.kind == Kind::Union ? "union" : "intersection"}, {"parts", parts}};
    }
    case Kind::OrbitBalls: {
      nlohmann::json cs = nlohmann::json::array();
      for (const auto& c : n.centers) cs.push_back(vec_to_json(c));
      return {{"kind", "orbit_balls"}, {"centers", cs}, {"r", n.r1}};
    }
    case Kind::Tube:
    case Kind::Walls:
      return {{"kind", n.kind == Kind::Tube ? "tube" : "walls"}, {"tube", tube_to_json(*n.tube)}, {"r", n.r1}};
    case Kind::Subspaces: {
      nlohmann::json ps = nlohmann::json::array();
      for (const auto& p : n.projectors_dyn) ps.push_back(matrix_to_json(p));
      return {{"kind", "subspaces"}, {"projectors", ps}};
    }
  }
  return {};
}

namespace {

void expect_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "domain node must be an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorCode::ConfigError, "unknown key '" + key + "' in domain block");
  }
}

double number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw Error(ErrorCode::ConfigError, std::string("domain field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace

DomainExpr DomainExpr::from_json(const nlohmann::json& j, int dim) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw Error(ErrorCode::ConfigError, "domain node needs a string 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "empty") { expect_keys(j, {"kind"}); return empty(); }
  if (kind == "full") { expect_keys(j, {"kind"}); return full(); }
  if (kind == "punctured") { expect_keys(j, {"kind"}); return punctured(); }
  if (kind == "ball") { expect_keys(j, {"kind", "r"}); return ball(number(j, "r")); }
  if (kind == "annulus") {
    expect_keys(j, {"kind", "r1", "r2"});
    return annulus(number(j, "r1"), number(j, "r2"));
  }
  if (kind == "difference") {
    expect_keys(j, {"kind", "a", "b"});
    return difference(from_json(j.at("a"), dim), from_json(j.at("b"), dim));
  }
  if (kind == "union" || kind == "intersection") {
    expect_keys(j, {"kind", "parts"});
    std::vector<DomainExpr> parts;
    for (const auto& p : j.at("parts")) parts.push_back(from_json(p, dim));
    return kind == "union" ? union_of(std::move(parts)) : intersection(std::move(parts));
  }
  if (kind == "orbit_balls") {
    expect_keys(j, {"kind", "centers", "r"});
    std::vector<Vec> cs;
    for (const auto& c : j.at("centers")) {
      cs.push_back(vec_from_json(c));
      if (cs.back().size() != dim) throw Error(ErrorCode::ConfigError, "orbit ball center has wrong dimension");
    }
    return orbit_balls(std::move(cs), number(j, "r"));
  }
  if (kind == "tube" || kind == "walls") {
    expect_keys(j, {"kind", "tube", "r"});
    auto t = tube_from_json(j.at("tube"));
    return kind == "tube" ? tube(std::move(t), number(j, "r")) : walls(std::move(t), number(j, "r"));
  }
  if (kind == "subspaces") {
    expect_keys(j, {"kind", "projectors"});
    std::vector<Eigen::MatrixXd> ps;
    for (const auto& p : j.at("projectors")) ps.push_back(matrix_from_json(p));
    return subspaces(std::move(ps));
  }
  throw Error(ErrorCode::ConfigError, "unknown domain kind '" + kind + "'");
}

}  // namespace egdeg
