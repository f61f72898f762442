#include "pqlab/mollify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "pqlab/errors.hpp"
#include "pqlab/summation.hpp"

namespace pqlab {

namespace {

struct GaussRule {
  std::vector<double> x;  // on [-1, 1]
  std::vector<double> w;

  explicit GaussRule(int n) : x(n), w(n) {
    for (int i = 0; i < n; ++i) {
      double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      for (int it = 0; it < 100; ++it) {
        const double pn = std::legendre(n, t);
        const double pm = std::legendre(n - 1, t);
        const double dp = n * (t * pn - pm) / (t * t - 1.0);
        const double step = pn / dp;
        t -= step;
        if (std::abs(step) < 1e-16) break;
      }
      const double pn = std::legendre(n, t);
      const double pm = std::legendre(n - 1, t);
      const double dp = n * (t * pn - pm) / (t * t - 1.0);
      x[i] = t;
      w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
  }
};

// Unit-radius kernel mass in dimension n.
double profile_mass(int dim) {
  static const double masses[2] = {
      [] {
        const GaussRule g(48);
        double s = 0.0;
        for (int i = 0; i < 48; ++i) s += g.w[i] * Kernel::profile(0.5 * (g.x[i] + 1.0));
        return s;  // 2 * (1/2) * sum
      }(),
      [] {
        const GaussRule g(48);
        double s = 0.0;
        for (int i = 0; i < 48; ++i) {
          const double t = 0.5 * (g.x[i] + 1.0);
          s += 0.5 * g.w[i] * Kernel::profile(t) * t;
        }
        return 2.0 * std::numbers::pi * s;
      }(),
  };
  return masses[dim - 1];
}

struct Stencil {
  std::vector<std::array<int, 2>> offsets;
  std::vector<double> weights;  // sum to one
};

Stencil make_stencil(const Mesh& mesh, double radius) {
  Stencil s;
  const int n = mesh.dim();
  const int ri = static_cast<int>(std::ceil(radius / mesh.h(0)));
  const int rj = n == 2 ? static_cast<int>(std::ceil(radius / mesh.h(1))) : 0;
  double total = 0.0;
  for (int dj = -rj; dj <= rj; ++dj)
    for (int di = -ri; di <= ri; ++di) {
      const double r = std::hypot(di * mesh.h(0), n == 2 ? dj * mesh.h(1) : 0.0);
      const double w = radius > 0.0 ? Kernel::profile(r / radius) : (di == 0 && dj == 0 ? 1.0 : 0.0);
      if (w <= 0.0) continue;
      s.offsets.push_back({di, dj});
      s.weights.push_back(w);
      total += w;
    }
  if (s.offsets.empty()) {
    s.offsets.push_back({0, 0});
    s.weights.push_back(1.0);
    total = 1.0;
  }
  for (double& w : s.weights) w /= total;
  return s;
}

void apply_stencil(const DiscreteField& u, int node, const Stencil& st, double* out) {
  const Mesh& mesh = u.mesh();
  const auto [i, j] = mesh.node_ij(node);
  const int m = u.components();
  std::array<double, kMaxComponents> acc{};
  double mass = 0.0;
  for (std::size_t k = 0; k < st.offsets.size(); ++k) {
    const int ii = i + st.offsets[k][0];
    const int jj = j + st.offsets[k][1];
    if (ii < 0 || ii >= mesh.nodes_along(0) || jj < 0 || jj >= mesh.nodes_along(1)) continue;
    const int nb = mesh.node_index(ii, jj);
    for (int c = 0; c < m; ++c) acc[c] += st.weights[k] * u(nb, c);
    mass += st.weights[k];
  }
  for (int c = 0; c < m; ++c) out[c] = acc[c] / mass;
}

class StencilCache {
 public:
  explicit StencilCache(const Mesh& mesh) : mesh_(mesh) {}
  const Stencil& get(double radius) {
    auto it = cache_.find(radius);
    if (it == cache_.end()) it = cache_.emplace(radius, make_stencil(mesh_, radius)).first;
    return it->second;
  }

 private:
  const Mesh& mesh_;
  std::map<double, Stencil> cache_;
};

double clamped_radius(const WBCube& c, double epsilon, double m, double cell) {
  const double r = epsilon * std::pow(c.side, m);
  const double cap = c.distance * (1.0 - 1e-12);
  if (cap <= cell) return 0.0;
  return std::clamp(r, cell, cap);
}

void check_cover(const DiscreteField& u, const PartitionOfUnity& pou) {
  const Box& b = pou.cover().domain.box;
  if (!(b == u.mesh().box())) throw InvalidArgument("cover and field live on different boxes");
}

double percentile95(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t k = static_cast<std::size_t>(std::floor(0.95 * (v.size() - 1)));
  std::nth_element(v.begin(), v.begin() + k, v.end());
  return v[k];
}

}  // namespace

// ---------------------------------------------------------------------------
// Kernel and exponents

double Kernel::profile(double t) {
  const double a = std::abs(t);
  if (a >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - a * a));
}

Kernel::Kernel(int dim, double radius) : dim_(dim), radius_(radius) {
  if (dim != 1 && dim != 2) throw InvalidArgument("kernel dimension must be 1 or 2");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("kernel radius must be positive");
  scale_ = 1.0 / (profile_mass(dim) * std::pow(radius, dim));
}

double Kernel::operator()(double r) const { return scale_ * profile(r / radius_); }

double theta_exponent(const GrowthParams& g) {
  if (g.p < g.n) return 1.0 + g.n * (1.0 / g.q - 1.0 / g.p);
  return g.n / g.q;
}

double m_threshold(const GrowthParams& g) {
  const double bracket = theta_exponent(g) - (g.n * (g.q - 1.0) / g.p) * (1.0 - g.p / g.q);
  if (!(bracket > 0.0)) throw OutOfRange("no admissible m: the mollification exponent bracket is not positive");
  return std::max(1.0, 1.0 / bracket);
}

ApproximantConfig ApproximantConfig::make(const GrowthParams& g, double epsilon, std::optional<double> m) {
  ApproximantConfig c;
  c.theta = theta_exponent(g);
  c.m_exponent = m ? *m : m_threshold(g) + 0.5;
  c.epsilon = epsilon;
  c.validate(g);
  return c;
}

void ApproximantConfig::validate(const GrowthParams& g) const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("approximant epsilon must be positive");
  const double bracket = theta_exponent(g) - (g.n * (g.q - 1.0) / g.p) * (1.0 - g.p / g.q);
  if (!(m_exponent >= 1.0 && m_exponent * bracket > 1.0)) {
    throw InvalidArgument("approximant m exponent violates m (theta - n(q-1)/p (1-p/q)) > 1");
  }
}

// ---------------------------------------------------------------------------
// Plain mollification

void convolve_node(const DiscreteField& u, int node, double radius, double* out) {
  apply_stencil(u, node, make_stencil(u.mesh(), radius), out);
}

InteriorField mollify(const DiscreteField& u, double epsilon) {
  const Mesh& mesh = u.mesh();
  if (!(epsilon >= mesh.cell_size() * (1.0 - 1e-12))) {
    throw InvalidArgument("mollify: epsilon is below the mesh scale");
  }
  InteriorField r{u, std::vector<std::uint8_t>(mesh.node_count(), 0)};
  const Stencil st = make_stencil(mesh, epsilon);
  for (int k = 0; k < mesh.node_count(); ++k) {
    if (!(mesh.box().inset_distance(mesh.node(k)) > epsilon)) continue;
    apply_stencil(u, k, st, &r.field(k, 0));
    r.defined[k] = 1;
  }
  return r;
}

double interior_sobolev_norm(const InteriorField& u, double exponent) {
  if (!(exponent >= 1.0) || std::isinf(exponent)) throw InvalidArgument("exponent must be finite and >= 1");
  const Mesh& mesh = u.field.mesh();
  CompensatedSum su, sd;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    bool ok = true;
    for (int k = 0; k < mesh.nodes_per_element(); ++k) ok = ok && u.defined[nodes[k]];
    if (!ok) continue;
    sd += std::pow(u.field.element_gradient(e).norm(), exponent);
    double mean = 0.0;
    for (int k = 0; k < mesh.nodes_per_element(); ++k) {
      double s = 0.0;
      for (int c = 0; c < u.field.components(); ++c) s += u.field(nodes[k], c) * u.field(nodes[k], c);
      mean += std::pow(std::sqrt(s), exponent);
    }
    su += mean / mesh.nodes_per_element();
  }
  return std::pow((su.value() + sd.value()) * mesh.element_volume(), 1.0 / exponent);
}

// ---------------------------------------------------------------------------
// WB approximant

DiscreteField wb_approximant(const DiscreteField& u, const PartitionOfUnity& pou, const ApproximantConfig& config) {
  check_cover(u, pou);
  if (!(config.epsilon > 0.0) || !(config.m_exponent >= 1.0)) throw InvalidArgument("wb_approximant: bad config");
  const Mesh& mesh = u.mesh();
  const int m = u.components();
  const double cell = mesh.cell_size();
  StencilCache cache(mesh);
  DiscreteField out(mesh, m);
  std::array<double, kMaxComponents> buf{};
  for (int k = 0; k < mesh.node_count(); ++k) {
    const auto terms = pou.evaluate(mesh.node(k));
    if (terms.empty()) {
      for (int c = 0; c < m; ++c) out(k, c) = u(k, c);
      continue;
    }
    for (const auto& t : terms) {
      const double r = clamped_radius(pou.cover().cubes[t.cube], config.epsilon, config.m_exponent, cell);
      apply_stencil(u, k, cache.get(r), buf.data());
      for (int c = 0; c < m; ++c) out(k, c) += t.value * buf[c];
    }
  }
  return out;
}

std::vector<Mat> correction_term(const DiscreteField& u, const PartitionOfUnity& pou, const ApproximantConfig& config) {
  check_cover(u, pou);
  const Mesh& mesh = u.mesh();
  const int m = u.components();
  const int n = mesh.dim();
  const double cell = mesh.cell_size();
  StencilCache cache(mesh);
  std::vector<Mat> out(mesh.node_count(), Mat(n, m));
  std::array<double, kMaxComponents> buf{};
  for (int k = 0; k < mesh.node_count(); ++k) {
    for (const auto& t : pou.evaluate(mesh.node(k))) {
      const double r = clamped_radius(pou.cover().cubes[t.cube], config.epsilon, config.m_exponent, cell);
      apply_stencil(u, k, cache.get(r), buf.data());
      // the gradients of the weights sum to zero, so subtracting u(x) only removes round-off
      for (int a = 0; a < n; ++a)
        for (int c = 0; c < m; ++c) out[k](a, c) += (buf[c] - u(k, c)) * t.grad[a];
    }
  }
  return out;
}

double correction_norm(const DiscreteField& u, const PartitionOfUnity& pou, const ApproximantConfig& config,
                       double exponent) {
  if (!(exponent >= 1.0) || std::isinf(exponent)) throw InvalidArgument("exponent must be finite and >= 1");
  const auto a2 = correction_term(u, pou, config);
  CompensatedSum s;
  for (int k = 0; k < u.mesh().node_count(); ++k) s += u.mesh().nodal_weight(k) * std::pow(a2[k].norm(), exponent);
  return std::pow(s.value(), 1.0 / exponent);
}

// ---------------------------------------------------------------------------
// Continuum probe

namespace {

double convolve_point_with(const ContinuumProbe& probe, const Point& x, double radius, const GaussRule& gr,
                           const GaussRule& ga) {
  if (!(radius > 0.0)) return probe.field(x);
  const Point& s = probe.singular;
  const double dx = x[0] - s[0], dy = x[1] - s[1];
  const double d = std::hypot(dx, dy);
  const double tx = std::atan2(dy, dx);
  double iu = 0.0, i1 = 0.0;

  auto ring = [&](double rho, double lo, double hi, bool periodic, double wr) {
    const int na = static_cast<int>(ga.x.size());
    for (int k = 0; k < na; ++k) {
      double th, wt;
      if (periodic) {
        th = tx + 2.0 * std::numbers::pi * k / na;
        wt = 2.0 * std::numbers::pi / na;
      } else {
        th = 0.5 * (lo + hi) + 0.5 * (hi - lo) * ga.x[k];
        wt = 0.5 * (hi - lo) * ga.w[k];
      }
      const Point z{s[0] + rho * std::cos(th), s[1] + rho * std::sin(th)};
      const double phi = Kernel::profile(std::hypot(x[0] - z[0], x[1] - z[1]) / radius);
      if (phi == 0.0) continue;
      const double w = wr * wt * rho * phi;
      iu += w * probe.field(z);
      i1 += w;
    }
  };
  auto segment = [&](double a, double b, bool full) {
    if (!(b > a)) return;
    const int nr = static_cast<int>(gr.x.size());
    for (int k = 0; k < nr; ++k) {
      const double rho = 0.5 * (a + b) + 0.5 * (b - a) * gr.x[k];
      const double wr = 0.5 * (b - a) * gr.w[k];
      if (full) {
        ring(rho, 0.0, 0.0, true, wr);
      } else {
        const double c = std::clamp((d * d + rho * rho - radius * radius) / (2.0 * d * rho), -1.0, 1.0);
        const double half = std::acos(c);
        ring(rho, tx - half, tx + half, false, wr);
      }
    }
  };
  if (d < radius) {
    segment(0.0, radius - d, true);
    segment(radius - d, radius + d, false);
  } else {
    segment(d - radius, d + radius, false);
  }
  if (!(i1 > 0.0)) return probe.field(x);
  return iu / i1;
}

}  // namespace

double convolve_point(const ContinuumProbe& probe, const Point& x, double radius) {
  const GaussRule gr(probe.inner_radial), ga(probe.inner_angular);
  return convolve_point_with(probe, x, radius, gr, ga);
}

double correction_norm(const ContinuumProbe& probe, const PartitionOfUnity& pou, const ApproximantConfig& config,
                       double exponent) {
  if (pou.cover().dim() != 2) throw InvalidArgument("continuum probe supports n = 2 only");
  if (!probe.field) throw InvalidArgument("continuum probe without field");
  if (!(probe.window > 0.0) || !(probe.inner_cutoff > 0.0 && probe.inner_cutoff < 1.0)) {
    throw InvalidArgument("continuum probe: bad window");
  }
  const GaussRule gr(probe.inner_radial), ga(probe.inner_angular), g4(4);
  const double rho_min = probe.window * probe.inner_cutoff;
  const int rings = static_cast<int>(std::ceil(std::log2(1.0 / probe.inner_cutoff) * probe.rings_per_octave));
  const double ratio = std::pow(probe.window / rho_min, 1.0 / rings);
  CompensatedSum total;
  for (int ring = 0; ring < rings; ++ring) {
    const double a = rho_min * std::pow(ratio, ring);
    const double b = a * ratio;
    for (int k = 0; k < 4; ++k) {
      const double rho = 0.5 * (a + b) + 0.5 * (b - a) * g4.x[k];
      const double wr = 0.5 * (b - a) * g4.w[k] * rho;
      for (int t = 0; t < probe.angles; ++t) {
        const double th = 2.0 * std::numbers::pi * (t + 0.5) / probe.angles;
        const Point x{probe.singular[0] + rho * std::cos(th), probe.singular[1] + rho * std::sin(th)};
        const double ux = probe.field(x);
        double ax = 0.0, ay = 0.0;
        for (const auto& term : pou.evaluate(x)) {
          const WBCube& c = pou.cover().cubes[term.cube];
          const double r = clamped_radius(c, config.epsilon, config.m_exponent, 0.0);
          const double diff = convolve_point_with(probe, x, r, gr, ga) - ux;
          ax += diff * term.grad[0];
          ay += diff * term.grad[1];
        }
        total += wr * (2.0 * std::numbers::pi / probe.angles) * std::pow(std::hypot(ax, ay), exponent);
      }
    }
  }
  return std::pow(total.value(), 1.0 / exponent);
}

SlopeFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("loglog_fit needs two or more pairs");
  SlopeFit f{x, y, 0.0, 0.0};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("loglog_fit needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

// ---------------------------------------------------------------------------
// Exchange-condition commutation

H4Defect h4_commutation_defect(const Integrand& f, const DiscreteField& u, double epsilon,
                               std::optional<double> constant) {
  const Mesh& mesh = u.mesh();
  if (f.params().n != mesh.dim() || f.params().m != u.components()) {
    throw InvalidArgument("h4_commutation_defect: integrand shape differs from the field");
  }
  if (!(epsilon >= mesh.cell_size() * (1.0 - 1e-12))) throw InvalidArgument("epsilon is below the mesh scale");
  if (epsilon > f.eps0()) throw InvalidArgument("epsilon exceeds the exchange radius eps0");

  const int ne = mesh.element_count();
  std::vector<Mat> du(ne);
  std::vector<double> fe(ne);
  for (int e = 0; e < ne; ++e) {
    du[e] = u.element_gradient(e);
    fe[e] = f.value(mesh.barycenter(e), du[e]);
  }
  const int n = mesh.dim();
  const int ri = static_cast<int>(std::ceil(epsilon / mesh.h(0))) + 1;
  const int rj = n == 2 ? static_cast<int>(std::ceil(epsilon / mesh.h(1))) + 1 : 0;

  H4Defect r;
  r.defect.assign(mesh.node_count(), 0.0);
  std::vector<int> nodes;
  std::vector<double> lhs, rhs, ratios;
  for (int k = 0; k < mesh.node_count(); ++k) {
    const Point x = mesh.node(k);
    if (!(mesh.box().inset_distance(x) > epsilon)) continue;
    const auto [i, j] = mesh.node_ij(k);
    Mat g(n, u.components());
    double fconv = 0.0, mass = 0.0;
    for (int cj = std::max(0, j - rj); cj < std::min(mesh.cells(1), j + rj + 1); ++cj)
      for (int ci = std::max(0, i - ri); ci < std::min(mesh.cells(0), i + ri + 1); ++ci) {
        const int cell = cj * mesh.cells(0) + ci;
        for (int half = 0; half < (n == 2 ? 2 : 1); ++half) {
          const int e = n == 2 ? 2 * cell + half : ci;
          const Point b = mesh.barycenter(e);
          const double w = Kernel::profile(std::hypot(b[0] - x[0], b[1] - x[1]) / epsilon);
          if (w == 0.0) continue;
          g += w * du[e];
          fconv += w * fe[e];
          mass += w;
        }
      }
    if (!(mass > 0.0)) continue;
    g *= 1.0 / mass;
    fconv /= mass;
    const double lv = f.value(x, g);
    nodes.push_back(k);
    lhs.push_back(lv);
    rhs.push_back(1.0 + fconv);
    ratios.push_back(lv / (1.0 + fconv));
  }
  r.evaluated = static_cast<int>(nodes.size());
  if (ratios.empty()) return r;
  r.max_ratio = *std::max_element(ratios.begin(), ratios.end());
  r.fitted_c = constant ? *constant : percentile95(ratios);
  std::vector<double> defects;
  for (std::size_t t = 0; t < nodes.size(); ++t) {
    const double d = std::max(0.0, lhs[t] - r.fitted_c * rhs[t]);
    r.defect[nodes[t]] = d;
    defects.push_back(d);
  }
  r.defect_p95 = percentile95(defects);
  r.defect_max = *std::max_element(defects.begin(), defects.end());
  return r;
}

// ---------------------------------------------------------------------------
// Star-shaped scaling

DiscreteField star_scale(const DiscreteField& u, double s) {
  if (!(s > 0.5 && s < 1.0)) throw InvalidArgument("star_scale: s must lie in (1/2, 1)");
  const Mesh& mesh = u.mesh();
  const Box& box = mesh.box();
  const Point c = box.center();
  const int n = mesh.dim();
  DiscreteField out(mesh, u.components());
  std::array<double, kMaxComponents> center_value{};
  for (int comp = 0; comp < u.components(); ++comp) center_value[comp] = u.interpolate(c, comp);
  for (int k = 0; k < mesh.node_count(); ++k) {
    const Point x = mesh.node(k);
    Point y{0.0, 0.0};
    double gauge = 0.0;
    for (int a = 0; a < n; ++a) {
      y[a] = (x[a] - c[a]) / s;
      gauge = std::max(gauge, std::abs(y[a]) / (0.5 * box.extent(a)));
    }
    double scale = 1.0;
    if (gauge > 1.0) {
      // u(c + y) = u(c) + |y|_box (u(c + y / |y|_box) - u(c))
      scale = gauge;
      for (int a = 0; a < n; ++a) y[a] /= gauge;
    }
    const Point z{c[0] + y[0], n == 2 ? c[1] + y[1] : 0.0};
    for (int comp = 0; comp < u.components(); ++comp) {
      const double u0 = center_value[comp];
      out(k, comp) = s * (u0 + scale * (u.interpolate(z, comp) - u0));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Studies

std::vector<MollifyStudyRow> mollify_study(const Integrand& f, const DiscreteField& u, const PartitionOfUnity& pou,
                                           double m_exponent, const std::vector<double>& epsilons, double exponent) {
  const Mesh& mesh = u.mesh();
  std::vector<MollifyStudyRow> rows;
  for (double eps : epsilons) {
    ApproximantConfig cfg;
    cfg.epsilon = eps;
    cfg.m_exponent = m_exponent;
    cfg.theta = theta_exponent(f.params());
    const DiscreteField ue = wb_approximant(u, pou, cfg);
    DiscreteField diff = ue;
    for (std::size_t i = 0; i < diff.values().size(); ++i) diff.values()[i] -= u.values()[i];
    MollifyStudyRow row;
    row.epsilon = eps;
    row.distance = sobolev_norm(diff, exponent);
    row.energy = energy(f, ue);
    for (int k = 0; k < mesh.node_count(); ++k) {
      if (mesh.box().inset_distance(mesh.node(k)) > 2.0 * mesh.cell_size()) continue;
      for (int c = 0; c < u.components(); ++c) row.boundary_deviation = std::max(row.boundary_deviation, std::abs(diff(k, c)));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace pqlab
