#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "egdeg/types.hpp"

namespace egdeg {

/// Sparse multivariate polynomial with real coefficients in at most kMaxDim
/// variables. Terms are kept in a std::map so iteration order is canonical.
class Polynomial {
 public:
  using Exponents = std::array<std::uint8_t, kMaxDim>;

  Polynomial() = default;
  explicit Polynomial(int nvars) : nvars_(nvars) {}

  static Polynomial constant(int nvars, double c);
  static Polynomial variable(int nvars, int i);

  int nvars() const { return nvars_; }
  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  const std::map<Exponents, double>& terms() const { return terms_; }
  void add_term(const Exponents& e, double c);

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double c) const;
  Polynomial operator-() const { return *this * -1.0; }
  Polynomial pow(int k) const;

  /// Substitution x = A y, where A is nvars × k; result has k variables.
  Polynomial compose_linear(const Eigen::MatrixXd& a) const;
  /// Substitution x = A y + b.
  Polynomial compose_affine(const Eigen::MatrixXd& a, const Vec& b) const;

  double value(const Vec& x) const;
  /// Value and exact gradient in one pass.
  double value_gradient(const Vec& x, Vec& grad) const;
  Mat hessian(const Vec& x) const;

  nlohmann::json to_json() const;
  static Polynomial from_json(const nlohmann::json& j);
  std::string to_string() const;

 private:
  int nvars_ = 0;
  std::map<Exponents, double> terms_;
};

/// Parses "+ - * / ^ ( )", float literals and x1..xd. Division is only by
/// constants and exponents must be non-negative integers. Throws
/// ConfigError with the offending position.
Polynomial parse_polynomial(const std::string& text, int nvars);

}  // namespace egdeg
