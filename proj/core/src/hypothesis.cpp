#include "pqlab/hypothesis.hpp"

#include <algorithm>
#include <cmath>

#include "pqlab/errors.hpp"
#include "pqlab/sampling.hpp"

namespace pqlab {

namespace {

constexpr double kRelSlack = 1e-9;

void validate(const SampleSpec& s) {
  if (s.count < 1) throw InvalidArgument("sampler: count must be positive");
  if (!(s.zmin > 0.0) || !(s.zmax > s.zmin)) throw InvalidArgument("sampler: need 0 < zmin < zmax");
  if (s.refine < 0 || s.refine > 6) throw InvalidArgument("sampler: refine must be in [0, 6]");
}

double row_weight(double mu, const Mat& z, const Mat& w, int i, double e) {
  const double zi = z.row_norm(i);
  const double wi = w.row_norm(i);
  double d2 = 0.0;
  for (int a = 0; a < z.cols(); ++a) d2 += (z(i, a) - w(i, a)) * (z(i, a) - w(i, a));
  const double base = mu * mu + zi * zi + wi * wi;
  if (base == 0.0) return 0.0;
  return std::pow(base, 0.5 * (e - 2.0)) * d2;
}

/// Exponent of row i at x for the anisotropic families.
double row_exponent(const Integrand& f, int i, const Point& x) {
  const auto& rows = f.traits().row_exponents;
  if (static_cast<int>(rows.size()) == f.params().n) return rows[i](x);
  return i == f.params().n - 1 ? f.params().q : f.params().p;
}

double point_exponent(const Integrand& f, const Point& x) {
  return f.traits().exponent_field ? (*f.traits().exponent_field)(x) : f.params().p;
}

Point sample_partner(Rng& rng, const Box& box, const Point& x) {
  const double diam = box.diameter();
  for (int attempt = 0; attempt < 16; ++attempt) {
    const double r = std::exp(sample_uniform(rng, std::log(1e-4 * diam), std::log(diam)));
    const double t = sample_uniform(rng, 0.0, 2.0 * M_PI);
    Point y = x;
    if (box.dim == 1) {
      y[0] += (t < M_PI ? r : -r);
    } else {
      y[0] += r * std::cos(t);
      y[1] += r * std::sin(t);
    }
    if (box.contains(y) && distance(x, y) > 0.0) return y;
  }
  return sample_point(rng, box);
}

void check_ellipticity(const Integrand& f, HypothesisId id, const SampleSpec& spec, Rng& rng,
                       HypothesisReport& rep) {
  const GrowthParams& g = f.params();
  double fitted = INFINITY;
  double pmin = INFINITY;
  double pmax = -INFINITY;

  if (id == HypothesisId::kH1_2) {
    // constant exponents must be ordered p = p_1 <= ... <= p_n = q
    const Point x0 = f.domain().center();
    double prev = -INFINITY;
    for (int i = 0; i < g.n; ++i) {
      const double e = row_exponent(f, i, x0);
      double slack = 0.0;
      if (e < prev) slack = prev - e;
      if (i == 0 && std::abs(e - g.p) > 1e-12) slack = std::abs(e - g.p);
      if (i == g.n - 1 && std::abs(e - g.q) > 1e-12) slack = std::abs(e - g.q);
      if (slack > 0.0) rep.violations.push_back({x0, Mat(g.n, g.m), Mat(g.n, g.m), slack});
      prev = e;
    }
  }

  for (int k = 0; k < spec.count; ++k) {
    const Point x = sample_point(rng, f.domain());
    const Mat z = sample_matrix(rng, g.n, g.m, spec.zmin, spec.zmax);
    const Mat w = sample_matrix(rng, g.n, g.m, spec.zmin, spec.zmax);

    double weight = 0.0;
    switch (id) {
      case HypothesisId::kH1: {
        const double base = g.mu * g.mu + z.norm2() + w.norm2();
        weight = base > 0.0 ? std::pow(base, 0.5 * (g.p - 2.0)) * (z - w).norm2() : 0.0;
        break;
      }
      case HypothesisId::kH1_1: {
        const double e = point_exponent(f, x);
        pmin = std::min(pmin, e);
        pmax = std::max(pmax, e);
        if (e < g.p - 1e-12 || e > g.q + 1e-12) {
          rep.violations.push_back({x, z, w, std::max(g.p - e, e - g.q)});
        }
        const double base = g.mu * g.mu + z.norm2() + w.norm2();
        weight = base > 0.0 ? std::pow(base, 0.5 * (e - 2.0)) * (z - w).norm2() : 0.0;
        break;
      }
      case HypothesisId::kH1_2:
      case HypothesisId::kH1_3:
        for (int i = 0; i < g.n; ++i) {
          const double e = row_exponent(f, i, x);
          pmin = std::min(pmin, e);
          pmax = std::max(pmax, e);
          if (id == HypothesisId::kH1_3 && (e < g.p - 1e-12 || e > g.q + 1e-12)) {
            rep.violations.push_back({x, z, w, std::max(g.p - e, e - g.q)});
          }
          weight += row_weight(g.mu, z, w, i, e);
        }
        break;
      default:
        break;
    }
    if (!(weight > 0.0) || !std::isfinite(weight)) continue;
    const double bregman = f.value(x, z) - f.value(x, w) - f.gradient(x, w).dot(z - w);
    const double ratio = bregman / weight;
    fitted = std::min(fitted, ratio);
    if (!(ratio >= g.nu * (1.0 - kRelSlack))) rep.violations.push_back({x, z, w, g.nu - ratio});
  }
  rep.fitted["nu"] = fitted;
  if (std::isfinite(pmin)) {
    rep.fitted["exponent_min"] = pmin;
    rep.fitted["exponent_max"] = pmax;
  }
}

void check_growth(const Integrand& f, HypothesisId id, const SampleSpec& spec, Rng& rng,
                  HypothesisReport& rep) {
  const GrowthParams& g = f.params();
  double fitted = 0.0;
  for (int k = 0; k < spec.count; ++k) {
    const Point x = sample_point(rng, f.domain());
    const Mat z = sample_matrix(rng, g.n, g.m, spec.zmin, spec.zmax);
    const double scale = std::pow(1.0 + z.norm2(), 0.5 * g.q);
    double ratio = 0.0;
    Mat w;
    if (id == HypothesisId::kH2) {
      ratio = std::abs(f.value(x, z)) / scale;
    } else {
      const Point y = sample_partner(rng, f.domain(), x);
      ratio = std::abs(f.value(x, z) - f.value(y, z)) / (std::pow(distance(x, y), g.alpha) * scale);
      w = Mat(1, 2);
      w[0] = y[0];
      w[1] = y[1];
    }
    fitted = std::max(fitted, ratio);
    if (!(ratio <= g.Lambda * (1.0 + kRelSlack))) rep.violations.push_back({x, z, w, ratio - g.Lambda});
  }
  rep.fitted["Lambda"] = fitted;
}

void check_bounds(const Integrand& f, HypothesisId id, const SampleSpec& spec, Rng& rng,
                  HypothesisReport& rep) {
  const GrowthParams& g = f.params();
  const IntegrandTraits& t = f.traits();
  double fitted = id == HypothesisId::kDualCoercivity ? INFINITY : 0.0;
  const double qprime = g.q / (g.q - 1.0);
  for (int k = 0; k < spec.count; ++k) {
    const Point x = sample_point(rng, f.domain());
    const Mat z = sample_matrix(rng, g.n, g.m, spec.zmin, spec.zmax);
    const double r = z.norm();
    if (id == HypothesisId::kLowerBound) {
      const double lhs = std::pow(r, g.p) - 1.0;
      if (lhs <= 0.0) continue;
      const double fz = f.value(x, z);
      if (!(fz > 0.0)) {
        rep.violations.push_back({x, z, Mat(), lhs});
        continue;
      }
      fitted = std::max(fitted, lhs / fz);
      if (lhs / fz > t.lower_bound_constant) rep.violations.push_back({x, z, Mat(), lhs / fz - t.lower_bound_constant});
    } else if (id == HypothesisId::kDerivativeBound) {
      const double ratio = f.gradient(x, z).norm() / std::pow(1.0 + r * r, 0.5 * (g.q - 1.0));
      fitted = std::max(fitted, ratio);
      if (ratio > t.derivative_constant) rep.violations.push_back({x, z, Mat(), ratio - t.derivative_constant});
    } else {
      // improved lower bound with the ellipticity exponent p on the growth side
      const Mat dz = f.gradient(x, z);
      const double lhs = dz.dot(z);
      const double rhs = std::pow(r, g.p) + std::pow(dz.norm(), qprime) - 1.0;
      if (rhs <= 0.0) {
        if (lhs < -1e-12 * (1.0 + std::abs(rhs))) rep.violations.push_back({x, z, Mat(), -lhs});
        continue;
      }
      fitted = std::min(fitted, lhs / rhs);
      if (lhs / rhs < t.dual_coercivity_constant) rep.violations.push_back({x, z, Mat(), t.dual_coercivity_constant - lhs / rhs});
    }
  }
  rep.fitted[id == HypothesisId::kDualCoercivity ? "c" : "C"] = fitted;
}

void check_exchange(const Integrand& f, const SampleSpec& spec, Rng& rng, HypothesisReport& rep) {
  const GrowthParams& g = f.params();
  const Box& box = f.domain();
  constexpr int kZPerBall = 32;
  const int balls = std::max(1, spec.count / kZPerBall);
  const int k = 4 << spec.refine;
  double worst = 0.0;
  for (int b = 0; b < balls; ++b) {
    const Point c = sample_point(rng, box);
    const double eps = f.eps0() * sample_uniform(rng, 0.05, 1.0);
    std::vector<Point> lattice;
    for (int j = (g.n == 2 ? -k : 0); j <= (g.n == 2 ? k : 0); ++j) {
      for (int i = -k; i <= k; ++i) {
        if (i * i + j * j > k * k) continue;
        Point y{c[0] + eps * i / k, c[1] + eps * j / k};
        // projecting onto the closed box keeps the point inside the ball
        for (int a = 0; a < g.n; ++a) y[a] = std::clamp(y[a], box.lo[a], box.hi[a]);
        lattice.push_back(y);
      }
    }
    std::vector<Mat> zs;
    for (int s = 0; s < kZPerBall; ++s) zs.push_back(sample_matrix(rng, g.n, g.m, spec.zmin, spec.zmax));
    const std::size_t L = lattice.size();
    std::vector<double> v(L * zs.size());
    std::vector<double> vmin(zs.size(), INFINITY);
    for (std::size_t j = 0; j < L; ++j) {
      for (std::size_t s = 0; s < zs.size(); ++s) {
        v[j * zs.size() + s] = f.value(lattice[j], zs[s]);
        vmin[s] = std::min(vmin[s], v[j * zs.size() + s]);
      }
    }
    double best = INFINITY;
    std::size_t best_j = 0;
    std::size_t best_worst_s = 0;
    for (std::size_t j = 0; j < L; ++j) {
      double slack = 0.0;
      std::size_t worst_s = 0;
      for (std::size_t s = 0; s < zs.size(); ++s) {
        const double d = (v[j * zs.size() + s] - vmin[s]) / (1.0 + std::abs(vmin[s]));
        if (d > slack) {
          slack = d;
          worst_s = s;
        }
      }
      if (slack < best) {
        best = slack;
        best_j = j;
        best_worst_s = worst_s;
      }
    }
    rep.witnesses.push_back({c, eps, lattice[best_j], best});
    worst = std::max(worst, best);
    if (best > 1e-12) rep.violations.push_back({c, zs[best_worst_s], Mat(), best});
  }
  rep.sample_count = balls * kZPerBall;
  rep.fitted["max_slack"] = worst;
}

}  // namespace

HypothesisReport check_hypothesis(const Integrand& f, HypothesisId id, const SampleSpec& spec) {
  validate(spec);
  HypothesisReport rep;
  rep.id = id;
  rep.integrand = f.name();
  rep.sample_count = spec.count;
  rep.seed = spec.seed;
  Rng rng(spec.seed);
  switch (id) {
    case HypothesisId::kH1:
    case HypothesisId::kH1_1:
    case HypothesisId::kH1_2:
    case HypothesisId::kH1_3:
      check_ellipticity(f, id, spec, rng, rep);
      break;
    case HypothesisId::kH2:
    case HypothesisId::kH3:
      check_growth(f, id, spec, rng, rep);
      break;
    case HypothesisId::kLowerBound:
    case HypothesisId::kDerivativeBound:
    case HypothesisId::kDualCoercivity:
      check_bounds(f, id, spec, rng, rep);
      break;
    case HypothesisId::kH4:
      check_exchange(f, spec, rng, rep);
      break;
    default:
      throw InvalidArgument("unknown hypothesis id");
  }
  return rep;
}

double convexity_defect(const Integrand& f, const SampleSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  const GrowthParams& g = f.params();
  double worst = -INFINITY;
  for (int k = 0; k < spec.count; ++k) {
    const Point x = sample_point(rng, f.domain());
    const Mat z = sample_matrix(rng, g.n, g.m, spec.zmin, spec.zmax);
    const Mat w = sample_matrix(rng, g.n, g.m, spec.zmin, spec.zmax);
    const double chord = 0.5 * (f.value(x, z) + f.value(x, w));
    const double mid = f.value(x, (z + w) * 0.5);
    worst = std::max(worst, (mid - chord) / (1.0 + std::abs(chord)));
  }
  return worst;
}

double gradient_consistency(const Integrand& f, const SampleSpec& spec, double zmax) {
  validate(spec);
  Rng rng(spec.seed);
  const GrowthParams& g = f.params();
  double worst = 0.0;
  for (int k = 0; k < spec.count; ++k) {
    const Point x = sample_point(rng, f.domain());
    const Mat z = sample_matrix(rng, g.n, g.m, spec.zmin, std::min(zmax, spec.zmax));
    const Mat grad = f.grad_z(x, z);
    const double h = 1e-6 * z.norm();
    Mat fd(g.n, g.m);
    for (int c = 0; c < z.size(); ++c) {
      Mat zp = z;
      Mat zm = z;
      zp[c] += h;
      zm[c] -= h;
      fd[c] = (f.eval(x, zp) - f.eval(x, zm)) / (2.0 * h);
    }
    worst = std::max(worst, (fd - grad).norm() / std::max(grad.norm(), 1e-12));
  }
  return worst;
}

}  // namespace pqlab
