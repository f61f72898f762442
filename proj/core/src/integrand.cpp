#include "pqlab/integrand.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "pqlab/errors.hpp"
#include "pqlab/sampling.hpp"

namespace pqlab {

// ---------------------------------------------------------------------------
// GrowthParams and names

void GrowthParams::validate() const {
  auto bad = [](const std::string& what) { throw InvalidArgument("growth parameters: " + what); };
  for (double v : {p, q, alpha, mu, nu, Lambda}) {
    if (!std::isfinite(v)) bad("non-finite value");
  }
  if (!(p > 1.0)) bad("p must exceed 1");
  if (!(q >= p)) bad("q must be at least p");
  if (!(alpha > 0.0 && alpha <= 1.0)) bad("alpha must lie in (0,1]");
  if (!(nu > 0.0)) bad("nu must be positive");
  if (!(Lambda > 0.0)) bad("Lambda must be positive");
  if (!(mu >= 0.0)) bad("mu must be non-negative");
  if (n < 1 || n > kMaxDim) bad("n must be 1 or 2");
  if (m < 1 || m > kMaxComponents) bad("m must be between 1 and 3");
  if (p < n && q > n * p / (n - p)) bad("q exceeds the Sobolev exponent np/(n-p)");
}

std::string to_string(Flavor f) {
  switch (f) {
    case Flavor::kAutonomous: return "autonomous";
    case Flavor::kXDependent: return "x-dependent";
    case Flavor::kVariableExponent: return "variable-exponent";
    case Flavor::kAnisotropic: return "anisotropic";
    case Flavor::kCombined: return "combined";
  }
  return "?";
}

namespace {

constexpr std::pair<HypothesisId, const char*> kHypothesisNames[] = {
    {HypothesisId::kH1, "H1"},
    {HypothesisId::kH1_1, "H1.1"},
    {HypothesisId::kH1_2, "H1.2"},
    {HypothesisId::kH1_3, "H1.3"},
    {HypothesisId::kH2, "H2"},
    {HypothesisId::kH3, "H3"},
    {HypothesisId::kH4, "H4"},
    {HypothesisId::kLowerBound, "lower-bound"},
    {HypothesisId::kDerivativeBound, "derivative-bound"},
    {HypothesisId::kDualCoercivity, "dual-coercivity"},
};

}  // namespace

std::string to_string(HypothesisId id) {
  for (const auto& [k, name] : kHypothesisNames) {
    if (k == id) return name;
  }
  return "?";
}

HypothesisId parse_hypothesis(std::string_view name) {
  for (const auto& [k, text] : kHypothesisNames) {
    if (name == text) return k;
  }
  throw InvalidArgument("unknown hypothesis id '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// IntegrandSpec

std::string IntegrandSpec::serialize() const {
  std::ostringstream os;
  os << "name = " << name << '\n';
  for (const auto& [k, v] : params) os << k << " = " << v << '\n';
  return os.str();
}

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

}  // namespace

IntegrandSpec IntegrandSpec::parse(std::string_view text) {
  IntegrandSpec spec;
  std::istringstream is{std::string(text)};
  std::string line;
  while (std::getline(is, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw InvalidArgument("integrand spec line without '=': " + t);
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw InvalidArgument("integrand spec line with empty key");
    if (key == "name") {
      spec.name = value;
    } else {
      spec.params[key] = value;
    }
  }
  if (spec.name.empty()) throw InvalidArgument("integrand spec without a name");
  return spec;
}

// ---------------------------------------------------------------------------
// Integrand

Integrand::Integrand(IntegrandSpec spec, GrowthParams params, Flavor flavor,
                     std::shared_ptr<const Density> density, IntegrandTraits traits, Box domain)
    : spec_(std::move(spec)),
      params_(params),
      flavor_(flavor),
      density_(std::move(density)),
      traits_(std::move(traits)),
      domain_(domain) {
  params_.validate();
  domain_.validate();
  if (!density_) throw InvalidArgument("integrand without density");
  if (domain_.dim != params_.n) throw InvalidArgument("domain dimension differs from n");
}

double Integrand::eval(const Point& x, const Mat& z) const {
  if (!finite(x) || !z.finite()) throw InvalidArgument("eval: non-finite input");
  if (z.rows() != params_.n || z.cols() != params_.m) {
    throw InvalidArgument("eval: z must be n x m");
  }
  return density_->value(x, z);
}

Mat Integrand::grad_z(const Point& x, const Mat& z) const {
  if (!finite(x) || !z.finite()) throw InvalidArgument("grad_z: non-finite input");
  if (z.rows() != params_.n || z.cols() != params_.m) {
    throw InvalidArgument("grad_z: z must be n x m");
  }
  return density_->gradient(x, z);
}

double Integrand::eps0() const {
  return traits_.eps0 > 0.0 ? traits_.eps0 : 0.25 * domain_.diameter();
}

bool Integrand::declares(HypothesisId id) const {
  return std::find(traits_.declared.begin(), traits_.declared.end(), id) != traits_.declared.end();
}

Integrand Integrand::with_params(const GrowthParams& params) const {
  Integrand out = *this;
  params.validate();
  if (params.n != params_.n || params.m != params_.m) {
    throw InvalidArgument("with_params cannot change n or m");
  }
  out.params_ = params;
  return out;
}

Integrand Integrand::on_domain(const Box& domain) const {
  Integrand out = *this;
  domain.validate();
  if (domain.dim != params_.n) throw InvalidArgument("domain dimension differs from n");
  out.domain_ = domain;
  return out;
}

// ---------------------------------------------------------------------------
// Densities

namespace {

// (r2)^(e/2) with the convention 0^e = 0 for e > 0
inline double rpow(double r2, double e) { return r2 > 0.0 ? std::pow(r2, 0.5 * e) : 0.0; }

// r^(e-2) z, i.e. the gradient direction factor of |z|^e / e; zero at z = 0
inline double rpow_grad(double r2, double e) { return r2 > 0.0 ? std::pow(r2, 0.5 * e - 1.0) : 0.0; }

class PowerDensity final : public Density {
 public:
  PowerDensity(double p, double mu) : p_(p), mu_(mu), shift_(std::pow(mu, p)) {}
  double value(const Point&, const Mat& z) const override {
    return rpow(mu_ * mu_ + z.norm2(), p_) - shift_;
  }
  Mat gradient(const Point&, const Mat& z) const override {
    return z * (p_ * rpow_grad(mu_ * mu_ + z.norm2(), p_));
  }

 private:
  double p_, mu_, shift_;
};

class WeightedPowerDensity final : public Density {
 public:
  WeightedPowerDensity(Expression a, double p) : a_(std::move(a)), p_(p) {}
  double value(const Point& x, const Mat& z) const override { return a_(x) * rpow(z.norm2(), p_); }
  Mat gradient(const Point& x, const Mat& z) const override {
    return z * (a_(x) * p_ * rpow_grad(z.norm2(), p_));
  }

 private:
  Expression a_;
  double p_;
};

/// sum_i a_i(x) |z_i|^{p_i(x)} over the rows of z.
class RowPowerDensity final : public Density {
 public:
  RowPowerDensity(std::vector<Expression> a, std::vector<Expression> p)
      : a_(std::move(a)), p_(std::move(p)) {}
  double value(const Point& x, const Mat& z) const override {
    double s = 0.0;
    for (int i = 0; i < z.rows(); ++i) {
      const double ri = z.row_norm(i);
      s += a_[i](x) * rpow(ri * ri, p_[i](x));
    }
    return s;
  }
  Mat gradient(const Point& x, const Mat& z) const override {
    Mat g(z.rows(), z.cols());
    for (int i = 0; i < z.rows(); ++i) {
      const double ri = z.row_norm(i);
      const double pi = p_[i](x);
      const double c = a_[i](x) * pi * rpow_grad(ri * ri, pi);
      for (int a = 0; a < z.cols(); ++a) g(i, a) = c * z(i, a);
    }
    return g;
  }

 private:
  std::vector<Expression> a_, p_;
};

class DoublePhaseDensity final : public Density {
 public:
  DoublePhaseDensity(double p, double q, Expression a) : p_(p), q_(q), a_(std::move(a)) {}
  double value(const Point& x, const Mat& z) const override {
    const double r2 = z.norm2();
    return rpow(r2, p_) + a_(x) * rpow(r2, q_);
  }
  Mat gradient(const Point& x, const Mat& z) const override {
    const double r2 = z.norm2();
    return z * (p_ * rpow_grad(r2, p_) + a_(x) * q_ * rpow_grad(r2, q_));
  }

 private:
  double p_, q_;
  Expression a_;
};

/// |z|^p + (lambda(x) sum_i c_i |z_i|^2)^{q/2}, c_i = 1 except the last row which
/// carries the coupling ratio L >= 1.
class CoupledDensity final : public Density {
 public:
  CoupledDensity(double p, double q, Expression lambda, double coupling)
      : p_(p), q_(q), lambda_(std::move(lambda)), coupling_(coupling) {}
  double value(const Point& x, const Mat& z) const override {
    return rpow(z.norm2(), p_) + rpow(lambda_(x) * form(z), q_);
  }
  Mat gradient(const Point& x, const Mat& z) const override {
    const double lam = lambda_(x);
    const double s = lam * form(z);
    const double c = q_ * rpow_grad(s, q_) * lam;
    Mat g = z * (p_ * rpow_grad(z.norm2(), p_));
    for (int i = 0; i < z.rows(); ++i) {
      const double ci = weight(i, z.rows());
      for (int a = 0; a < z.cols(); ++a) g(i, a) += c * ci * z(i, a);
    }
    return g;
  }

 private:
  double weight(int i, int rows) const { return i == rows - 1 ? coupling_ : 1.0; }
  double form(const Mat& z) const {
    double s = 0.0;
    for (int i = 0; i < z.rows(); ++i) s += weight(i, z.rows()) * z.row_norm(i) * z.row_norm(i);
    return s;
  }
  double p_, q_;
  Expression lambda_;
  double coupling_;
};

class LogGrowthDensity final : public Density {
 public:
  explicit LogGrowthDensity(Expression px) : px_(std::move(px)) {}
  double value(const Point& x, const Mat& z) const override {
    const double r = z.norm();
    return r > 0.0 ? std::pow(r, px_(x)) * std::log1p(r) : 0.0;
  }
  Mat gradient(const Point& x, const Mat& z) const override {
    const double r = z.norm();
    if (r == 0.0) return Mat(z.rows(), z.cols());
    const double p = px_(x);
    const double rp = std::pow(r, p);
    const double dphi = p * rp / r * std::log1p(r) + rp / (1.0 + r);
    return z * (dphi / r);
  }

 private:
  Expression px_;
};

/// |z|^q + a(x) |z_n|, z_n the last row. At z_n = 0 the minimal-norm
/// subgradient (zero) of the kink is selected.
class MaxRowDensity final : public Density {
 public:
  MaxRowDensity(double q, Expression a) : q_(q), a_(std::move(a)) {}
  double value(const Point& x, const Mat& z) const override {
    return rpow(z.norm2(), q_) + a_(x) * std::max(z.row_norm(z.rows() - 1), 0.0);
  }
  Mat gradient(const Point& x, const Mat& z) const override {
    Mat g = z * (q_ * rpow_grad(z.norm2(), q_));
    const int last = z.rows() - 1;
    const double rn = z.row_norm(last);
    if (rn > 0.0) {
      const double c = a_(x) / rn;
      for (int a = 0; a < z.cols(); ++a) g(last, a) += c * z(last, a);
    }
    return g;
  }

 private:
  double q_;
  Expression a_;
};

/// h(a(x), z) = |z|^p + a(x)((1+|z|^2)^{q/2} - 1), increasing in a.
class ComposedDensity final : public Density {
 public:
  ComposedDensity(double p, double q, Expression a) : p_(p), q_(q), a_(std::move(a)) {}
  double value(const Point& x, const Mat& z) const override {
    const double r2 = z.norm2();
    return rpow(r2, p_) + a_(x) * std::expm1(0.5 * q_ * std::log1p(r2));
  }
  Mat gradient(const Point& x, const Mat& z) const override {
    const double r2 = z.norm2();
    return z * (p_ * rpow_grad(r2, p_) + a_(x) * q_ * std::pow(1.0 + r2, 0.5 * q_ - 1.0));
  }

 private:
  double p_, q_;
  Expression a_;
};

class VariablePowerDensity final : public Density {
 public:
  explicit VariablePowerDensity(Expression px) : px_(std::move(px)) {}
  double value(const Point& x, const Mat& z) const override { return rpow(z.norm2(), px_(x)); }
  Mat gradient(const Point& x, const Mat& z) const override {
    const double p = px_(x);
    return z * (p * rpow_grad(z.norm2(), p));
  }

 private:
  Expression px_;
};

class RegularizedDensity final : public Density {
 public:
  RegularizedDensity(std::shared_ptr<const Density> base, double eps, double q)
      : base_(std::move(base)), eps_(eps), q_(q) {}
  double value(const Point& x, const Mat& z) const override {
    return base_->value(x, z) + eps_ * rpow(z.norm2(), q_);
  }
  Mat gradient(const Point& x, const Mat& z) const override {
    return base_->gradient(x, z) + z * (eps_ * q_ * rpow_grad(z.norm2(), q_));
  }

 private:
  std::shared_ptr<const Density> base_;
  double eps_, q_;
};

// ---------------------------------------------------------------------------
// Parameter handling for the library

class Params {
 public:
  Params(const ParamMap& map, std::string_view name) : map_(map), name_(name) {}

  bool has(const std::string& key) const { return map_.count(key) != 0; }

  double num(const std::string& key, double def) {
    used_.insert(key);
    auto it = map_.find(key);
    if (it == map_.end()) return def;
    double v = 0.0;
    const std::string& s = it->second;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
      throw InvalidArgument(name_ + ": parameter '" + key + "' is not a finite number: " + s);
    }
    return v;
  }

  int integer(const std::string& key, int def) {
    const double v = num(key, def);
    if (v != std::floor(v)) throw InvalidArgument(name_ + ": parameter '" + key + "' must be an integer");
    return static_cast<int>(v);
  }

  Expression expr(const std::string& key, const std::string& def) {
    used_.insert(key);
    auto it = map_.find(key);
    return Expression::parse(it == map_.end() ? def : it->second);
  }

  Box box(int n) {
    used_.insert("box");
    auto it = map_.find("box");
    if (it == map_.end()) return Box::unit(n);
    std::vector<double> v;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      double d = 0.0;
      const std::string t = trim(item);
      auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), d);
      if (ec != std::errc() || ptr != t.data() + t.size()) {
        throw InvalidArgument(name_ + ": malformed box '" + it->second + "'");
      }
      v.push_back(d);
    }
    if (static_cast<int>(v.size()) != 2 * n) {
      throw InvalidArgument(name_ + ": box needs 2n comma separated bounds");
    }
    return n == 1 ? Box::make(1, {v[0], 0.0}, {v[1], 0.0}) : Box::make(2, {v[0], v[2]}, {v[1], v[3]});
  }

  void finish() const {
    for (const auto& [k, v] : map_) {
      if (!used_.count(k)) throw InvalidArgument(name_ + ": unknown parameter '" + k + "'");
    }
  }

 private:
  const ParamMap& map_;
  std::string name_;
  std::set<std::string> used_;
};

struct FieldStats {
  double min = 0.0;
  double max = 0.0;
  double holder = 0.0;  // sampled alpha-Hoelder seminorm
};

FieldStats field_stats(const std::function<double(const Point&)>& f, const Box& box, double alpha) {
  const int k = box.dim == 1 ? 257 : 33;
  std::vector<Point> pts;
  std::vector<double> val;
  for (int j = 0; j < (box.dim == 2 ? k : 1); ++j) {
    for (int i = 0; i < k; ++i) {
      Point x{box.lo[0] + box.extent(0) * i / (k - 1), 0.0};
      if (box.dim == 2) x[1] = box.lo[1] + box.extent(1) * j / (k - 1);
      pts.push_back(x);
      val.push_back(f(x));
    }
  }
  FieldStats s{val[0], val[0], 0.0};
  for (std::size_t a = 0; a < val.size(); ++a) {
    if (!std::isfinite(val[a])) throw InvalidArgument("weight or exponent field is not finite on the box");
    s.min = std::min(s.min, val[a]);
    s.max = std::max(s.max, val[a]);
    for (std::size_t b = a + 1; b < val.size(); ++b) {
      const double d = distance(pts[a], pts[b]);
      s.holder = std::max(s.holder, std::abs(val[a] - val[b]) / std::pow(d, alpha));
    }
  }
  return s;
}

/// sup over r in the audited range [1e-3, 1e2] of g(r).
double sup_radial(const std::function<double(double)>& g) {
  double s = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double r = std::exp(std::log(1e-3) + (std::log(1e2) - std::log(1e-3)) * i / 4000.0);
    s = std::max(s, g(r));
  }
  return s;
}

/// Lower bound of the H1 ratio for |z|^e (half the sampled infimum bound).
double power_ellipticity(double e) { return 0.5 * std::min({e - 1.0, std::pow(2.0, 0.5 * (2.0 - e)), 1.0}); }

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

struct Built {
  GrowthParams params;
  Flavor flavor = Flavor::kAutonomous;
  std::shared_ptr<const Density> density;
  IntegrandTraits traits;
  double nu_default = 1.0;
  double lambda_default = 1.0;
};

const std::vector<std::string>& names() {
  static const std::vector<std::string> kNames = {
      "F1", "F2", "F3", "F4", "F5", "F6", "F7", "F8",
      "p-power", "double-phase", "px-laplacian", "anisotropic-px", "log-growth", "F7-max", "composed-h",
  };
  return kNames;
}

std::string canonical(std::string_view name) {
  if (name == "double-phase") return "F3";
  if (name == "anisotropic-px") return "F5";
  if (name == "log-growth") return "F6";
  if (name == "F7-max") return "F7";
  if (name == "composed-h") return "F8";
  return std::string(name);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

}  // namespace

std::vector<std::string> library_names() { return names(); }

Integrand example_library(std::string_view name, const ParamMap& map) {
  const std::string key = canonical(name);
  if (std::find(names().begin(), names().end(), std::string(name)) == names().end()) {
    throw InvalidArgument("unknown integrand '" + std::string(name) + "'");
  }
  Params P(map, std::string(name));
  GrowthParams g;
  g.n = P.integer("n", 2);
  g.m = P.integer("m", 1);
  require(g.n == 1 || g.n == 2, std::string(name) + ": n must be 1 or 2");
  const Box box = P.box(g.n);
  g.alpha = P.num("alpha", 1.0);
  g.mu = P.num("mu", 0.0);
  const std::string alpha = fmt(g.alpha);

  Built b;
  b.traits.eps0 = P.num("eps0", 0.0);
  const std::vector<HypothesisId> standard = {HypothesisId::kH1, HypothesisId::kH2, HypothesisId::kH3,
                                              HypothesisId::kH4};

  if (key == "p-power") {
    g.p = P.num("p", 2.0);
    g.q = P.num("q", g.p);
    require(g.q == g.p, "p-power: q must equal p");
    b.flavor = Flavor::kAutonomous;
    b.density = std::make_shared<PowerDensity>(g.p, g.mu);
    b.traits.radial = true;
    b.traits.declared = standard;
    b.nu_default = power_ellipticity(g.p);
    b.lambda_default = 1.5 * std::pow(std::max(1.0, g.mu), g.p);
  } else if (key == "F1") {
    g.p = P.num("p", 2.0);
    g.q = P.num("q", g.p);
    require(g.q == g.p, "F1: q must equal p");
    Expression a = P.expr("a", "1 + x1");
    const FieldStats s = field_stats(a, box, g.alpha);
    require(s.min >= 1.0, "F1: weight a must satisfy a >= 1");
    b.flavor = Flavor::kXDependent;
    b.density = std::make_shared<WeightedPowerDensity>(a, g.p);
    b.traits.radial = true;
    b.traits.declared = standard;
    b.traits.weight_fields["a"] = a;
    b.nu_default = s.min * power_ellipticity(g.p);
    b.lambda_default = 1.5 * std::max({1.0, s.max, s.holder});
  } else if (key == "F2") {
    g.p = P.num("p", 2.0);
    g.q = P.num("q", g.n == 1 ? g.p : 2.5);
    std::vector<Expression> a, e;
    double lam = 0.0;
    double hol = 0.0;
    double nu = INFINITY;
    for (int i = 0; i < g.n; ++i) {
      const std::string idx = std::to_string(i + 1);
      a.push_back(P.expr("a" + idx, "1 + x1"));
      const double pi = P.num("p" + idx, i == 0 ? g.p : (i == g.n - 1 ? g.q : g.p));
      e.push_back(Expression::constant(pi));
      const FieldStats s = field_stats(a.back(), box, g.alpha);
      require(s.min >= 1.0, "F2: weights must satisfy a_i >= 1");
      lam += s.max;
      hol += s.holder;
      nu = std::min(nu, s.min * power_ellipticity(pi));
    }
    b.flavor = Flavor::kAnisotropic;
    b.density = std::make_shared<RowPowerDensity>(a, e);
    b.traits.declared = {HypothesisId::kH1_2, HypothesisId::kH2, HypothesisId::kH3, HypothesisId::kH4};
    b.traits.row_exponents = e;
    for (int i = 0; i < g.n; ++i) b.traits.weight_fields["a" + std::to_string(i + 1)] = a[i];
    b.nu_default = nu;
    b.lambda_default = 1.5 * std::max({1.0, lam, hol});
  } else if (key == "F3") {
    g.p = P.num("p", 2.0);
    g.q = P.num("q", 2.5);
    Expression a = P.expr("a", g.n == 1 ? "abs(x1 - 0.5)^" + alpha
                                        : "dist_quadrant(0.5, 0.5, -1, -1)^" + alpha);
    const FieldStats s = field_stats(a, box, g.alpha);
    require(s.min >= 0.0, "double-phase: weight a must be non-negative");
    b.flavor = Flavor::kXDependent;
    b.density = std::make_shared<DoublePhaseDensity>(g.p, g.q, a);
    b.traits.radial = true;
    b.traits.declared = standard;
    b.traits.weight_fields["a"] = a;
    b.nu_default = power_ellipticity(g.p);
    b.lambda_default = 1.5 * std::max(1.0 + s.max, s.holder);
  } else if (key == "F4") {
    g.p = P.num("p", 2.0);
    g.q = P.num("q", 2.5);
    Expression lambda = P.expr("lambda", "x1");
    const double coupling = P.num("coupling", 1.0);
    require(coupling >= 1.0, "F4: coupling ratio must be at least 1");
    const double q = g.q;
    const FieldStats s = field_stats(lambda, box, g.alpha);
    require(s.min >= 0.0, "F4: lambda must be non-negative");
    const FieldStats sq = field_stats(
        [&](const Point& x) { return std::pow(std::max(lambda(x), 0.0) * coupling, 0.5 * q); }, box, g.alpha);
    b.flavor = Flavor::kXDependent;
    b.density = std::make_shared<CoupledDensity>(g.p, g.q, lambda, coupling);
    b.traits.radial = coupling == 1.0;
    b.traits.declared = standard;
    b.traits.weight_fields["lambda"] = lambda;
    b.nu_default = power_ellipticity(g.p);
    b.lambda_default = 1.5 * std::max(1.0 + sq.max, sq.holder);
  } else if (key == "F5") {
    g.p = P.num("p", 2.0);
    g.q = P.num("q", 2.5);
    const double p = g.p;
    const double q = g.q;
    std::vector<Expression> a, e;
    double hol = 0.0;
    double nu = INFINITY;
    for (int i = 0; i < g.n; ++i) {
      const std::string idx = std::to_string(i + 1);
      const std::string def = i == 0 ? fmt(p) + " + " + fmt(0.5 * (q - p)) + " * x1"
                                     : fmt(q) + " - " + fmt(0.5 * (q - p)) + " * x1";
      e.push_back(P.expr("p" + idx, def));
      a.push_back(Expression::constant(1.0));
      const FieldStats s = field_stats(e.back(), box, g.alpha);
      require(s.min >= p - 1e-12 && s.max <= q + 1e-12, "anisotropic-px: exponents must lie in [p, q]");
      hol = std::max(hol, s.holder);
      for (double t = s.min; t <= s.max + 1e-12; t += std::max(1e-3, (s.max - s.min) / 64)) {
        nu = std::min(nu, power_ellipticity(t));
      }
    }
    const double log_mod = sup_radial([&](double r) {
      return std::pow(r, q) * std::abs(std::log(r)) / std::pow(1.0 + r * r, 0.5 * q);
    });
    b.flavor = Flavor::kCombined;
    b.density = std::make_shared<RowPowerDensity>(a, e);
    b.traits.declared = {HypothesisId::kH1_3, HypothesisId::kH2, HypothesisId::kH3};
    b.traits.row_exponents = e;
    b.nu_default = nu;
    b.lambda_default = 1.5 * g.n * std::max(1.0, hol * log_mod);
  } else if (key == "F6") {
    g.p = P.num("p", 2.0);
    g.q = P.num("q", 3.0);
    Expression px = P.expr("px", fmt(g.p) + " + " + fmt(0.5 * (g.q - g.p)) + " * x1");
    const FieldStats s = field_stats(px, box, g.alpha);
    require(s.min >= g.p - 1e-12 && s.max <= g.q + 1e-12, "log-growth: p(x) must lie in [p, q]");
    const double q = g.q;
    const double pmax = s.max;
    const double grow = sup_radial([&](double r) {
      return std::pow(r, pmax) * std::log1p(r) / std::pow(1.0 + r * r, 0.5 * q);
    });
    const double mod = sup_radial([&](double r) {
      return std::max(std::pow(r, pmax), std::pow(r, s.min)) * std::abs(std::log(r)) * std::log1p(r) /
             std::pow(1.0 + r * r, 0.5 * q);
    });
    b.flavor = Flavor::kVariableExponent;
    b.density = std::make_shared<LogGrowthDensity>(px);
    b.traits.radial = true;
    b.traits.declared = {HypothesisId::kH1_1, HypothesisId::kH2, HypothesisId::kH3};
    b.traits.exponent_field = px;
    // ellipticity degenerates like |z| at the origin; calibrated to the audited |z| >= 1e-3
    b.nu_default = 1e-4;
    b.traits.lower_bound_constant = 8.0;
    b.lambda_default = 1.5 * std::max({1.0, grow, s.holder * mod});
  } else if (key == "F7") {
    g.q = P.num("q", 3.0);
    g.p = P.num("p", g.q);
    require(g.q > 2.0, "F7: q must exceed 2");
    require(g.p == g.q, "F7: p must equal q");
    Expression a = P.expr("a", "x1");
    const FieldStats s = field_stats(a, box, g.alpha);
    require(s.min >= 0.0, "F7: weight a must be non-negative");
    b.flavor = Flavor::kXDependent;
    b.density = std::make_shared<MaxRowDensity>(g.q, a);
    b.traits.declared = standard;
    b.traits.weight_fields["a"] = a;
    b.nu_default = power_ellipticity(g.q);
    b.lambda_default = 1.5 * std::max(1.0 + s.max, s.holder);
  } else if (key == "F8") {
    g.p = P.num("p", 2.0);
    g.q = P.num("q", 2.5);
    Expression a = P.expr("a", "x1");
    const FieldStats s = field_stats(a, box, g.alpha);
    require(s.min >= 0.0, "composed-h: weight a must be non-negative");
    b.flavor = Flavor::kXDependent;
    b.density = std::make_shared<ComposedDensity>(g.p, g.q, a);
    b.traits.radial = true;
    b.traits.declared = standard;
    b.traits.weight_fields["a"] = a;
    b.nu_default = power_ellipticity(g.p);
    b.lambda_default = 1.5 * std::max(1.0 + s.max, s.holder);
  } else if (key == "px-laplacian") {
    g.p = P.num("p", 1.7);
    g.q = P.num("q", 2.0);
    Expression px = P.expr("px", fmt(g.q) + " - " + fmt(2.0 * (g.q - g.p)) + " * max(0, 0.5 - x1)");
    const FieldStats s = field_stats(px, box, g.alpha);
    require(s.min >= g.p - 1e-12 && s.max <= g.q + 1e-12, "px-laplacian: p(x) must lie in [p, q]");
    const double q = g.q;
    const double mod = sup_radial([&](double r) {
      return std::max(std::pow(r, s.max), std::pow(r, s.min)) * std::abs(std::log(r)) /
             std::pow(1.0 + r * r, 0.5 * q);
    });
    double nu = INFINITY;
    for (double t = s.min; t <= s.max + 1e-12; t += std::max(1e-3, (s.max - s.min) / 64)) {
      nu = std::min(nu, power_ellipticity(t));
    }
    b.flavor = Flavor::kVariableExponent;
    b.density = std::make_shared<VariablePowerDensity>(px);
    b.traits.radial = true;
    b.traits.declared = {HypothesisId::kH1_1, HypothesisId::kH2, HypothesisId::kH3};
    b.traits.exponent_field = px;
    b.nu_default = nu;
    b.lambda_default = 1.5 * std::max(1.0, s.holder * mod);
  }

  g.nu = P.num("nu", b.nu_default);
  g.Lambda = P.num("Lambda", b.lambda_default);
  b.traits.derivative_constant = 2.0 * g.q * g.Lambda;
  const double reg = P.num("regularize", 0.0);
  require(reg >= 0.0, "regularize must be non-negative");
  P.finish();
  g.validate();

  IntegrandSpec spec{std::string(name), map};
  spec.params.erase("regularize");
  Integrand f(spec, g, b.flavor, b.density, b.traits, box);
  return reg > 0.0 ? regularize(f, reg) : f;
}

Integrand from_spec(const IntegrandSpec& spec) { return example_library(spec.name, spec.params); }

Integrand regularize(const Integrand& f, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("regularize: epsilon must be positive and finite");
  }
  GrowthParams g = f.params();
  g.Lambda += epsilon;
  IntegrandTraits t = f.traits();
  t.regularization += epsilon;
  t.derivative_constant = 2.0 * g.q * g.Lambda;
  IntegrandSpec spec = f.spec();
  spec.params["regularize"] = fmt(t.regularization);
  auto d = std::make_shared<RegularizedDensity>(f.density(), epsilon, g.q);
  return Integrand(spec, g, f.flavor(), d, t, f.domain());
}

// ---------------------------------------------------------------------------
// Helpers

Mat v_functional(double mu, double t, const Mat& z) {
  if (!(t > 0.0) || !std::isfinite(mu) || !z.finite()) {
    throw InvalidArgument("v_functional: need t > 0 and finite input");
  }
  const double s = mu * mu + z.norm2();
  if (s == 0.0) return z;
  return z * std::pow(s, (t - 2.0) / 4.0);
}

std::pair<double, double> v_equivalence_constants(double mu, double t, int n, int m, int samples,
                                                  unsigned long long seed) {
  Rng rng(seed);
  double lo = INFINITY;
  double hi = 0.0;
  for (int k = 0; k < samples; ++k) {
    const Mat z1 = sample_matrix(rng, n, m, 1e-3, 1e2);
    const Mat z2 = sample_matrix(rng, n, m, 1e-3, 1e2);
    const double d2 = (z1 - z2).norm2();
    if (d2 == 0.0) continue;
    const double lhs = (v_functional(mu, t, z1) - v_functional(mu, t, z2)).norm2();
    const double rhs = std::pow(mu * mu + z1.norm2() + z2.norm2(), 0.5 * (t - 2.0)) * d2;
    lo = std::min(lo, lhs / rhs);
    hi = std::max(hi, lhs / rhs);
  }
  return {lo, hi};
}

double fenchel_identity_check(const Integrand& f, const Point& x, const Mat& z) {
  if (!f.radial()) {
    throw UnsupportedFlavor("fenchel_identity_check needs a density radial in z, got " + f.name());
  }
  const double fz = f.eval(x, z);
  const Mat xi = f.grad_z(x, z);
  const double r = z.norm();
  if (r == 0.0) {
    // no ray; the built-ins attain their minimum at 0, so F*(0) = -F(0) and the identity is exact
    return 0.0;
  }
  const Mat dir = z * (1.0 / r);
  const double s = xi.dot(dir);
  auto g = [&](double t) { return s * t - f.value(x, dir * t); };
  double hi = std::max(1.0, 2.0 * r);
  while (g(hi) > g(0.5 * hi) && hi < 1e12) hi *= 2.0;
  // golden-section search for the maximum of the concave g on [0, hi]
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0.0;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double gc = g(c);
  double gd = g(d);
  for (int it = 0; it < 300 && b - a > 1e-15 * hi; ++it) {
    if (gc > gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - inv_phi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + inv_phi * (b - a);
      gd = g(d);
    }
  }
  const double conj = std::max(gc, gd);
  const double pairing = xi.dot(z);
  return std::abs(pairing - fz - conj) / (1.0 + std::abs(pairing));
}

}  // namespace pqlab
