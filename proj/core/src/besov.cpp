#include "pqlab/besov.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "pqlab/covering.hpp"
#include "pqlab/errors.hpp"
#include "pqlab/summation.hpp"

namespace pqlab {

namespace {

bool in_region(const Point& x, const std::optional<Ball>& region) {
  return !region || std::hypot(x[0] - region->center[0], x[1] - region->center[1]) <= region->radius;
}

std::vector<Point> sample_shifts(const Box& box, const ConeSpec& cone, int h_samples) {
  if (h_samples < 8) throw InvalidArgument("dq_seminorm: need at least 8 h-samples");
  cone.validate(box.dim);
  double half = INFINITY;
  for (int a = 0; a < box.dim; ++a) half = std::min(half, 0.5 * box.extent(a));
  if (!(cone.height < half)) throw InvalidArgument("dq_seminorm: cone height leaves an empty inset");
  std::vector<Point> hs;
  for (int j = 0; j < h_samples; ++j) {
    const double len = cone.height * std::ldexp(1.0, -j);
    for (const Point& d : cone.fan(box.dim)) hs.push_back({len * d[0], len * d[1]});
  }
  return hs;
}

// Shared driver: `value(x_shifted, sample)` returns |v(x+h) - v(x)| for a sample.
BesovReport run(const Box& box, double s, double p, const ConeSpec& cone, int h_samples,
                const std::function<double(const Point& h)>& integral) {
  if (!(s > 0.0 && s < 1.0)) throw InvalidArgument("dq_seminorm: s must lie in (0, 1)");
  if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidArgument("dq_seminorm: p must be finite and >= 1");
  BesovReport r;
  r.s = s;
  r.p = p;
  double best = -1.0;
  for (const Point& h : sample_shifts(box, cone, h_samples)) {
    const double len = std::hypot(h[0], h[1]);
    const double v = integral(h) / std::pow(len, s * p);
    r.samples.push_back({h, v});
    if (v > best) {
      best = v;
      r.argmax_h = h;
    }
  }
  r.seminorm = std::pow(std::max(best, 0.0), 1.0 / p);
  return r;
}

}  // namespace

ConeSpec ConeSpec::inward(const Box& box, const Point& x) {
  ConeSpec c;
  c.height = 0.1 * box.diameter();
  double best = INFINITY;
  for (int a = 0; a < box.dim; ++a) {
    if (x[a] - box.lo[a] < best) {
      best = x[a] - box.lo[a];
      c.axis = {a == 0 ? 1.0 : 0.0, a == 1 ? 1.0 : 0.0};
    }
    if (box.hi[a] - x[a] < best) {
      best = box.hi[a] - x[a];
      c.axis = {a == 0 ? -1.0 : 0.0, a == 1 ? -1.0 : 0.0};
    }
  }
  return c;
}

void ConeSpec::validate(int dim) const {
  if (!(aperture > 0.0 && aperture < 0.5 * 3.141592653589793)) {
    throw InvalidArgument("cone aperture must lie in (0, pi/2)");
  }
  if (!(height > 0.0) || !std::isfinite(height)) throw InvalidArgument("cone height must be positive");
  const double len = dim == 1 ? std::abs(axis[0]) : std::hypot(axis[0], axis[1]);
  if (!(len > 0.0)) throw InvalidArgument("cone axis must be nonzero");
}

std::vector<Point> ConeSpec::fan(int dim) const {
  if (dim == 1) return {{axis[0] >= 0.0 ? 1.0 : -1.0, 0.0}};
  const double base = std::atan2(axis[1], axis[0]);
  std::vector<Point> out;
  for (double f : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    const double t = base + f * aperture;
    out.push_back({std::cos(t), std::sin(t)});
  }
  return out;
}

BesovReport dq_seminorm(const DiscreteField& v, double s, double p, const ConeSpec& cone, int h_samples,
                        std::optional<Ball> region) {
  const Mesh& mesh = v.mesh();
  const Box& box = mesh.box();
  const int m = v.components();
  return run(box, s, p, cone, h_samples, [&](const Point& h) {
    const double len = std::hypot(h[0], h[1]);
    CompensatedSum sum;
    for (int k = 0; k < mesh.node_count(); ++k) {
      const Point x = mesh.node(k);
      if (box.inset_distance(x) < len || !in_region(x, region)) continue;
      const Point y{x[0] + h[0], x[1] + h[1]};
      double d2 = 0.0;
      for (int c = 0; c < m; ++c) {
        const double d = v.interpolate(y, c) - v(k, c);
        d2 += d * d;
      }
      sum += mesh.nodal_weight(k) * std::pow(std::sqrt(d2), p);
    }
    return sum.value();
  });
}

BesovReport dq_seminorm(const ElementField& v, double s, double p, const ConeSpec& cone, int h_samples,
                        std::optional<Ball> region) {
  const Mesh& mesh = v.mesh;
  const Box& box = mesh.box();
  if (static_cast<int>(v.values.size()) != mesh.element_count()) {
    throw InvalidArgument("dq_seminorm: element field size differs from the mesh");
  }
  // sample points: barycenter plus the midpoints towards each vertex
  std::vector<Point> pts;
  std::vector<int> owner;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const Point b = mesh.barycenter(e);
    pts.push_back(b);
    owner.push_back(e);
    const auto nodes = mesh.element_nodes(e);
    for (int k = 0; k < mesh.nodes_per_element(); ++k) {
      const Point x = mesh.node(nodes[k]);
      pts.push_back({0.5 * (b[0] + x[0]), 0.5 * (b[1] + x[1])});
      owner.push_back(e);
    }
  }
  const double w = mesh.element_volume() / (mesh.nodes_per_element() + 1);
  return run(box, s, p, cone, h_samples, [&](const Point& h) {
    const double len = std::hypot(h[0], h[1]);
    CompensatedSum sum;
    std::array<double, 3> bw{};
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Point& x = pts[i];
      if (box.inset_distance(x) < len || !in_region(x, region)) continue;
      const int e2 = mesh.locate({x[0] + h[0], x[1] + h[1]}, bw);
      sum += w * std::pow((v.values[e2] - v.values[owner[i]]).norm(), p);
    }
    return sum.value();
  });
}

double cutoff(const Point& x, const Point& center, double rho) {
  const double r = std::hypot(x[0] - center[0], x[1] - center[1]);
  return smooth_step((2.0 * rho - r) / rho);
}

DiscreteField translate_blend(const DiscreteField& v, const Point& h, const Point& center, double rho) {
  if (!(rho > 0.0)) throw InvalidArgument("translate_blend: radius must be positive");
  if (std::hypot(h[0], h[1]) > rho) throw InvalidArgument("translate_blend: |h| exceeds the cutoff radius");
  DiscreteField out = v;
  if (h[0] == 0.0 && h[1] == 0.0) return out;
  const Mesh& mesh = v.mesh();
  for (int k = 0; k < mesh.node_count(); ++k) {
    const Point x = mesh.node(k);
    const double phi = cutoff(x, center, rho);
    if (phi == 0.0) continue;
    const Point y{x[0] + h[0], x[1] + h[1]};
    const bool inside = mesh.box().contains(y);
    for (int c = 0; c < v.components(); ++c) {
      const double shifted = inside ? v.interpolate(y, c) : 0.0;
      out(k, c) = phi * shifted + (1.0 - phi) * v(k, c);
    }
  }
  return out;
}

AprioriExponents apriori_exponents(const GrowthParams& g, double beta) {
  if (!(beta >= 0.0) || !(beta < g.alpha)) throw InvalidArgument("apriori_exponents: need 0 <= beta < alpha");
  AprioriExponents r;
  const double n = g.n, p = g.p, q = g.q;
  r.target_exponent = n * p / (n - beta);
  r.theta = beta > 0.0 ? (n * p / beta) * (1.0 / p - 1.0 / q) : std::numeric_limits<double>::infinity();
  r.higher_order = g.alpha / std::max(2.0, p);
  r.q_supremum = (n + g.alpha) * p / n;
  r.q_theta_below_p = beta > 0.0 ? q * r.theta < p : q == p;
  r.q_below_beta_threshold = q < (n + beta) * p / n;
  return r;
}

double embedding_exponent(double s, double p, int n) {
  if (!(p >= 1.0) || n < 1) throw InvalidArgument("embedding_exponent: need p >= 1 and n >= 1");
  if (!(s - n / p < 0.0)) throw OutOfRange("embedding_exponent: s - n/p must be negative");
  return n / (n / p - s);
}

}  // namespace pqlab
