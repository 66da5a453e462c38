#include "egdeg/polynomial.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "egdeg/errors.hpp"

namespace egdeg {

namespace {

constexpr int kMaxExponent = 64;

Polynomial::Exponents zero_exponents() {
  Polynomial::Exponents e{};
  e.fill(0);
  return e;
}

// Powers x_i^0..x_i^deg for each variable, so terms cost one product each.
struct PowerTable {
  std::array<std::array<double, kMaxExponent + 1>, kMaxDim> p;
  PowerTable(const Vec& x, int maxdeg) {
    for (int i = 0; i < x.size(); ++i) {
      p[i][0] = 1.0;
      for (int k = 1; k <= maxdeg; ++k) p[i][k] = p[i][k - 1] * x[i];
    }
  }
};

}  // namespace

Polynomial Polynomial::constant(int nvars, double c) {
  Polynomial p(nvars);
  p.add_term(zero_exponents(), c);
  return p;
}

Polynomial Polynomial::variable(int nvars, int i) {
  if (i < 0 || i >= nvars) throw Error(ErrorCode::InvalidArgument, "variable index out of range");
  Polynomial p(nvars);
  auto e = zero_exponents();
  e[i] = 1;
  p.add_term(e, 1.0);
  return p;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [e, c] : terms_) {
    int s = 0;
    for (int i = 0; i < nvars_; ++i) s += e[i];
    d = std::max(d, s);
  }
  return d;
}

void Polynomial::add_term(const Exponents& e, double c) {
  if (c == 0.0) return;
  auto it = terms_.find(e);
  if (it == terms_.end()) {
    terms_.emplace(e, c);
  } else {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial r = *this;
  r.nvars_ = std::max(nvars_, o.nvars_);
  for (const auto& [e, c] : o.terms_) r.add_term(e, c);
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o * -1.0; }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  Polynomial r(std::max(nvars_, o.nvars_));
  for (const auto& [ea, ca] : terms_)
    for (const auto& [eb, cb] : o.terms_) {
      Exponents e{};
      for (int i = 0; i < kMaxDim; ++i) {
        const int s = ea[i] + eb[i];
        if (s > kMaxExponent) throw Error(ErrorCode::InvalidArgument, "polynomial exponent too large");
        e[i] = static_cast<std::uint8_t>(s);
      }
      r.add_term(e, ca * cb);
    }
  return r;
}

Polynomial Polynomial::operator*(double c) const {
  Polynomial r(nvars_);
  if (c == 0.0) return r;
  for (const auto& [e, v] : terms_) r.terms_.emplace(e, v * c);
  return r;
}

Polynomial Polynomial::pow(int k) const {
  if (k < 0) throw Error(ErrorCode::InvalidArgument, "negative polynomial power");
  Polynomial result = constant(nvars_, 1.0);
  Polynomial base = *this;
  while (k > 0) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k > 0) base = base * base;
  }
  return result;
}

Polynomial Polynomial::compose_linear(const Eigen::MatrixXd& a) const {
  return compose_affine(a, Vec::Zero(a.rows()));
}

Polynomial Polynomial::compose_affine(const Eigen::MatrixXd& a, const Vec& b) const {
  if (a.rows() != nvars_ || b.size() != nvars_)
    throw Error(ErrorCode::InvalidArgument, "substitution matrix has wrong shape");
  const int k = static_cast<int>(a.cols());
  std::vector<Polynomial> subs;
  for (int i = 0; i < nvars_; ++i) {
    Polynomial s = constant(k, b[i]);
    for (int j = 0; j < k; ++j)
      if (a(i, j) != 0.0) s = s + variable(k, j) * a(i, j);
    subs.push_back(std::move(s));
  }
  // Cache powers of each substituted variable.
  std::vector<std::vector<Polynomial>> powers(nvars_);
  Polynomial out(k);
  for (const auto& [e, c] : terms_) {
    Polynomial t = constant(k, c);
    for (int i = 0; i < nvars_; ++i) {
      auto& pw = powers[i];
      if (pw.empty()) pw.push_back(constant(k, 1.0));
      while (static_cast<int>(pw.size()) <= e[i]) pw.push_back(pw.back() * subs[i]);
      if (e[i] > 0) t = t * pw[e[i]];
    }
    out = out + t;
  }
  out.nvars_ = k;
  // Drop round-off dust so compositions of exact inputs stay sparse.
  double scale = 0.0;
  for (const auto& [e, c] : out.terms_) scale = std::max(scale, std::abs(c));
  for (auto it = out.terms_.begin(); it != out.terms_.end();)
    it = std::abs(it->second) <= 1e-14 * scale ? out.terms_.erase(it) : std::next(it);
  return out;
}

double Polynomial::value(const Vec& x) const {
  PowerTable pt(x, degree());
  double v = 0.0;
  for (const auto& [e, c] : terms_) {
    double t = c;
    for (int i = 0; i < nvars_; ++i) t *= pt.p[i][e[i]];
    v += t;
  }
  return v;
}

double Polynomial::value_gradient(const Vec& x, Vec& grad) const {
  const int n = nvars_;
  PowerTable pt(x, degree());
  grad = Vec::Zero(n);
  double v = 0.0;
  for (const auto& [e, c] : terms_) {
    double t = c;
    for (int i = 0; i < n; ++i) t *= pt.p[i][e[i]];
    v += t;
    for (int j = 0; j < n; ++j) {
      if (e[j] == 0) continue;
      double g = c * e[j];
      for (int i = 0; i < n; ++i) g *= pt.p[i][i == j ? e[i] - 1 : e[i]];
      grad[j] += g;
    }
  }
  return v;
}

Mat Polynomial::hessian(const Vec& x) const {
  const int n = nvars_;
  PowerTable pt(x, degree());
  Mat h = Mat::Zero(n, n);
  for (const auto& [e, c] : terms_) {
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) {
        Exponents f = e;
        double coef = c;
        if (f[a] == 0) continue;
        coef *= f[a]--;
        if (f[b] == 0) continue;
        coef *= f[b]--;
        for (int i = 0; i < n; ++i) coef *= pt.p[i][f[i]];
        h(a, b) += coef;
      }
    }
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < a; ++b) h(a, b) = h(b, a);
  return h;
}

nlohmann::json Polynomial::to_json() const {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [e, c] : terms_) {
    nlohmann::json ex = nlohmann::json::array();
    for (int i = 0; i < nvars_; ++i) ex.push_back(e[i]);
    terms.push_back({{"c", c}, {"e", ex}});
  }
  return {{"nvars", nvars_}, {"terms", terms}};
}

Polynomial Polynomial::from_json(const nlohmann::json& j) {
  Polynomial p(j.at("nvars").get<int>());
  for (const auto& t : j.at("terms")) {
    auto e = zero_exponents();
    const auto& ex = t.at("e");
    for (std::size_t i = 0; i < ex.size(); ++i) e[i] = static_cast<std::uint8_t>(ex[i].get<int>());
    p.add_term(e, t.at("c").get<double>());
  }
  return p;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [e, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << c;
    for (int i = 0; i < nvars_; ++i) {
      if (e[i] == 0) continue;
      os << "*x" << (i + 1);
      if (e[i] > 1) os << "^" << int(e[i]);
    }
  }
  return os.str();
}

namespace {

class Parser {
 public:
  Parser(const std::string& text, int nvars) : s_(text), n_(nvars) {}

  Polynomial parse() {
    Polynomial p = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << what << " at position " << pos_ << " in \"" << s_ << "\"";
    throw Error(ErrorCode::ConfigError, os.str());
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Polynomial expr() {
    Polynomial p = term();
    for (;;) {
      if (accept('+')) p = p + term();
      else if (accept('-')) p = p - term();
      else return p;
    }
  }

  Polynomial term() {
    Polynomial p = unary();
    for (;;) {
      if (accept('*')) {
        p = p * unary();
      } else if (accept('/')) {
        const Polynomial d = unary();
        if (d.degree() != 0 || d.is_zero()) fail("division only by nonzero constants");
        p = p * (1.0 / d.terms().begin()->second);
      } else {
        return p;
      }
    }
  }

  Polynomial unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Polynomial power() {
    Polynomial base = primary();
    if (accept('^')) {
      skip();
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("exponent must be a non-negative integer");
      const int k = std::stoi(s_.substr(start, pos_ - start));
      if (k > kMaxExponent) fail("exponent too large");
      return base.pow(k);
    }
    return base;
  }

  Polynomial primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Polynomial p = expr();
      if (!accept(')')) fail("missing ')'");
      return p;
    }
    if (c == 'x') {
      ++pos_;
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("variable needs an index");
      const int i = std::stoi(s_.substr(start, pos_ - start));
      if (i < 1 || i > n_) fail("variable x" + std::to_string(i) + " out of range");
      return Polynomial::variable(n_, i - 1);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      return Polynomial::constant(n_, v);
    }
    fail(std::string("unexpected '") + c + "'");
  }

  const std::string& s_;
  int n_;
  std::size_t pos_ = 0;
};

}  // namespace

Polynomial parse_polynomial(const std::string& text, int nvars) {
  if (nvars < 1 || nvars > kMaxDim) throw Error(ErrorCode::ConfigError, "dimension out of range");
  Polynomial p = Parser(text, nvars).parse();
  Polynomial out(nvars);
  return out + p;
}

}  // namespace egdeg
