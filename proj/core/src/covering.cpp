#include "pqlab/covering.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "pqlab/errors.hpp"
#include "pqlab/sampling.hpp"

namespace pqlab {

namespace {

constexpr double kEnlarge = 7.0 / 6.0;
constexpr double kSupport = 13.0 / 12.0;

double box_gap(const Point& alo, const Point& ahi, const Point& blo, const Point& bhi, int dim) {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) {
    const double g = std::max({0.0, alo[a] - bhi[a], blo[a] - ahi[a]});
    s += g * g;
  }
  return std::sqrt(s);
}

bool inside_closed(const Point& lo, const Point& hi, const Box& b) {
  for (int a = 0; a < b.dim; ++a) {
    if (lo[a] < b.lo[a] || hi[a] > b.hi[a]) return false;
  }
  return true;
}

// Uniform bucket grid over a box; every stored box is registered in all cells it touches.
struct BucketGrid {
  Point origin{};
  double cell = 1.0;
  std::array<int, 2> dims{1, 1};
  std::vector<std::vector<int>> cells;
  int dim = 2;

  BucketGrid(const Box& box, double min_side) : origin(box.lo), dim(box.dim) {
    double extent = 0.0;
    for (int a = 0; a < dim; ++a) extent = std::max(extent, box.extent(a));
    cell = std::max(min_side, extent / 512.0);
    for (int a = 0; a < dim; ++a) dims[a] = static_cast<int>(std::ceil(box.extent(a) / cell)) + 1;
    if (dim == 1) dims[1] = 1;
    cells.resize(static_cast<std::size_t>(dims[0]) * dims[1]);
  }

  int coord(double v, int a) const {
    return std::clamp(static_cast<int>(std::floor((v - origin[a]) / cell)), 0, dims[a] - 1);
  }

  void insert(int id, const Point& lo, const Point& hi) {
    const int i0 = coord(lo[0], 0), i1 = coord(hi[0], 0);
    const int j0 = dim == 2 ? coord(lo[1], 1) : 0, j1 = dim == 2 ? coord(hi[1], 1) : 0;
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) cells[static_cast<std::size_t>(j) * dims[0] + i].push_back(id);
  }

  const std::vector<int>& at(const Point& x) const {
    const int i = coord(x[0], 0);
    const int j = dim == 2 ? coord(x[1], 1) : 0;
    return cells[static_cast<std::size_t>(j) * dims[0] + i];
  }

  // Ids sharing a cell with [lo, hi], each once, sorted.
  std::vector<int> query(const Point& lo, const Point& hi) const {
    std::vector<int> out;
    const int i0 = coord(lo[0], 0), i1 = coord(hi[0], 0);
    const int j0 = dim == 2 ? coord(lo[1], 1) : 0, j1 = dim == 2 ? coord(hi[1], 1) : 0;
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        const auto& c = cells[static_cast<std::size_t>(j) * dims[0] + i];
        out.insert(out.end(), c.begin(), c.end());
      }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

void k_bounds(const WBCube& c, int dim, Point& lo, Point& hi) {
  lo = hi = c.center;
  for (int a = 0; a < dim; ++a) {
    lo[a] -= 0.5 * c.side;
    hi[a] += 0.5 * c.side;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Domain

Domain Domain::with_hole(const Box& box, const Box& hole) {
  Domain d{box, hole, false};
  d.validate();
  return d;
}

Domain Domain::everything(int dim) { return Domain{Box::unit(dim), std::nullopt, true}; }

void Domain::validate() const {
  box.validate();
  if (!hole) return;
  hole->validate();
  if (hole->dim != box.dim) throw InvalidArgument("hole dimension differs from the box");
  for (int a = 0; a < box.dim; ++a) {
    if (!(hole->lo[a] > box.lo[a] && hole->hi[a] < box.hi[a])) {
      throw InvalidArgument("hole must lie strictly inside the box");
    }
  }
}

bool Domain::contains(const Point& x) const {
  if (whole_space) return true;
  for (int a = 0; a < dim(); ++a) {
    if (!(x[a] > box.lo[a] && x[a] < box.hi[a])) return false;
  }
  return !(hole && hole->contains(x));
}

double Domain::distance(const Point& x) const {
  if (whole_space) return INFINITY;
  if (!contains(x)) return 0.0;
  double d = box.inset_distance(x);
  if (hole) d = std::min(d, box_gap(x, x, hole->lo, hole->hi, dim()));
  return d;
}

double Domain::distance(const Point& lo, const Point& hi) const {
  if (whole_space) return INFINITY;
  double d = INFINITY;
  for (int a = 0; a < dim(); ++a) d = std::min({d, lo[a] - box.lo[a], box.hi[a] - hi[a]});
  d = std::max(d, 0.0);
  if (hole) d = std::min(d, box_gap(lo, hi, hole->lo, hole->hi, dim()));
  return d;
}

// ---------------------------------------------------------------------------
// Whitney cubes

Point DyadicCube::center(int dim) const {
  Point c = lo;
  for (int a = 0; a < dim; ++a) c[a] += 0.5 * side;
  return c;
}

std::vector<DyadicCube> whitney(const Domain& domain, const WhitneyOptions& opts) {
  if (domain.whole_space) throw InvalidArgument("whitney: the domain has empty complement");
  domain.validate();
  if (opts.depth < 0 || opts.depth > 14) throw InvalidArgument("whitney: depth must be in [0, 14]");
  const int n = domain.dim();
  const Box& box = domain.box;

  double s0 = box.extent(0);
  if (n == 2) s0 = std::min(s0, box.extent(1));
  std::array<int, 2> roots{1, 1};
  for (int a = 0; a < n; ++a) {
    const double k = box.extent(a) / s0;
    roots[a] = static_cast<int>(std::lround(k));
    if (std::abs(k - roots[a]) > 1e-12 * k) {
      throw InvalidArgument("whitney: box extents must be integer multiples of the shorter side");
    }
  }

  const double c = opts.rule == WhitneyRule::kSeparated ? 3.0 : 0.5;
  std::vector<DyadicCube> pending;
  for (int j = 0; j < roots[1]; ++j)
    for (int i = 0; i < roots[0]; ++i) {
      DyadicCube q;
      q.lo = {box.lo[0] + i * s0, n == 2 ? box.lo[1] + j * s0 : 0.0};
      q.side = s0;
      pending.push_back(q);
    }

  std::vector<DyadicCube> out;
  for (int level = 0; level <= opts.depth && !pending.empty(); ++level) {
    std::vector<DyadicCube> next;
    for (const DyadicCube& q : pending) {
      Point hi = q.lo;
      for (int a = 0; a < n; ++a) hi[a] += q.side;
      if (domain.hole && inside_closed(q.lo, hi, *domain.hole)) continue;
      const double d = domain.distance(q.lo, hi);
      if (d > 0.0 && d >= c * q.side) {
        out.push_back(q);
        continue;
      }
      if (level == opts.depth) {
        DyadicCube t = q;
        t.truncated = true;
        out.push_back(t);
        continue;
      }
      const double h = 0.5 * q.side;
      for (int cy = 0; cy < (n == 2 ? 2 : 1); ++cy)
        for (int cx = 0; cx < 2; ++cx) {
          DyadicCube child;
          child.lo = {q.lo[0] + cx * h, n == 2 ? q.lo[1] + cy * h : 0.0};
          child.side = h;
          child.level = level + 1;
          next.push_back(child);
        }
    }
    pending = std::move(next);
  }

  std::sort(out.begin(), out.end(), [](const DyadicCube& a, const DyadicCube& b) {
    if (a.level != b.level) return a.level < b.level;
    if (a.lo[1] != b.lo[1]) return a.lo[1] < b.lo[1];
    return a.lo[0] < b.lo[0];
  });
  return out;
}

// ---------------------------------------------------------------------------
// WB cover

bool CoverAudit::passed() const {
  return multiplicity <= multiplicity_bound && min_overlap_ratio >= overlap_bound &&
         distance_violations == 0 && scale_comparable && base_cubes_inside;
}

std::vector<int> WBCover::containing(const Point& x) const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(cubes.size()); ++i) {
    bool in = true;
    for (int a = 0; a < dim() && in; ++a) in = std::abs(x[a] - cubes[i].center[a]) < 0.5 * cubes[i].side;
    if (in) out.push_back(i);
  }
  return out;
}

WBCover wb_enlarge(const Domain& domain, const std::vector<DyadicCube>& cubes, double m_exponent,
                   bool strict) {
  if (!(m_exponent >= 1.0) || !std::isfinite(m_exponent)) {
    throw InvalidArgument("wb_enlarge: m exponent must be >= 1");
  }
  if (cubes.empty()) throw InvalidArgument("wb_enlarge: empty Whitney family");
  WBCover cover;
  cover.domain = domain;
  cover.m_exponent = m_exponent;
  const int n = domain.dim();
  for (const DyadicCube& q : cubes) {
    WBCube k;
    k.base = q;
    k.center = q.center(n);
    k.side = kEnlarge * q.side;
    k.scale = std::pow(k.side, m_exponent);
    Point lo, hi;
    k_bounds(k, n, lo, hi);
    k.distance = domain.distance(lo, hi);
    cover.cubes.push_back(k);
  }
  cover.audit = audit_cover(cover);
  if (strict && !cover.audit.passed()) {
    throw InternalError("WB cover audit failed: " + cover.audit.first_failure);
  }
  return cover;
}

CoverAudit audit_cover(const WBCover& cover) {
  CoverAudit r;
  const int n = cover.dim();
  const auto& cubes = cover.cubes;
  const int count = static_cast<int>(cubes.size());
  r.cube_count = count;
  r.multiplicity_bound = n == 1 ? 3 : 21;
  r.overlap_bound = std::pow(14.0, -n);
  r.min_overlap_ratio = INFINITY;
  r.min_distance_ratio = INFINITY;
  auto fail = [&r](const std::string& what) {
    if (r.first_failure.empty()) r.first_failure = what;
  };

  double min_side = INFINITY;
  for (const WBCube& c : cubes) min_side = std::min(min_side, c.side);
  Box span = cover.domain.box;
  for (int a = 0; a < n; ++a) {
    span.lo[a] -= min_side;
    span.hi[a] += min_side;
  }
  BucketGrid grid(span, min_side);
  std::vector<Point> lo(count), hi(count);
  for (int i = 0; i < count; ++i) {
    k_bounds(cubes[i], n, lo[i], hi[i]);
    grid.insert(i, lo[i], hi[i]);
  }

  const double dist_factor = 2.0 * std::pow(kEnlarge, -1.0 / n);
  for (int i = 0; i < count; ++i) {
    const WBCube& ci = cubes[i];
    if (ci.base.truncated) {
      ++r.truncated_count;
    } else {
      Point qhi = ci.base.lo;
      for (int a = 0; a < n; ++a) qhi[a] += ci.base.side;
      if (!(cover.domain.distance(ci.base.lo, qhi) > 0.0)) {
        r.base_cubes_inside = false;
        fail("base cube " + std::to_string(i) + " touches the complement");
      }
      const double ratio = ci.distance / (dist_factor * ci.side);
      r.min_distance_ratio = std::min(r.min_distance_ratio, ratio);
      if (ratio < 1.0) {
        ++r.distance_violations;
        fail("cube " + std::to_string(i) + " violates the distance bound (ratio " + std::to_string(ratio) + ")");
      }
    }

    for (int j : grid.query(lo[i], hi[i])) {
      if (j <= i) continue;
      double inter = 1.0;
      for (int a = 0; a < n; ++a) {
        const double w = std::min(hi[i][a], hi[j][a]) - std::max(lo[i][a], lo[j][a]);
        inter *= std::max(w, 0.0);
        if (w <= 1e-12 * min_side) inter = 0.0;
      }
      if (inter == 0.0) continue;
      const double big = std::pow(std::max(ci.side, cubes[j].side), n);
      const double ratio = inter / big;
      if (ratio < r.min_overlap_ratio) r.min_overlap_ratio = ratio;
      if (ratio < r.overlap_bound) {
        fail("cubes " + std::to_string(i) + " and " + std::to_string(j) + " overlap too little");
      }
      const double sr = ci.side / cubes[j].side;
      if (!(std::abs(sr - 1.0) < 1e-9 || std::abs(sr - 2.0) < 1e-9 || std::abs(sr - 0.5) < 1e-9)) {
        r.scale_comparable = false;
        fail("cubes " + std::to_string(i) + " and " + std::to_string(j) + " intersect at incomparable scales");
      }
    }
  }

  // Depth of open boxes is maximal just above-right of a corner (lo_x(a), lo_y(b))
  // with a and b intersecting; counting uses exact half-open comparisons.
  for (int a = 0; a < count; ++a) {
    std::vector<int> partners = n == 2 ? grid.query(lo[a], hi[a]) : std::vector<int>{a};
    for (int b : partners) {
      const Point p{lo[a][0], n == 2 ? lo[b][1] : 0.0};
      if (n == 2 && !(p[1] >= lo[a][1] && p[1] < hi[a][1])) continue;
      int depth = 0;
      for (int c : grid.at(p)) {
        bool in = true;
        for (int ax = 0; ax < n && in; ++ax) in = lo[c][ax] <= p[ax] && p[ax] < hi[c][ax];
        depth += in ? 1 : 0;
      }
      r.multiplicity = std::max(r.multiplicity, depth);
    }
  }
  if (r.multiplicity > r.multiplicity_bound) fail("multiplicity " + std::to_string(r.multiplicity));
  if (!std::isfinite(r.min_overlap_ratio)) r.min_overlap_ratio = 1.0;
  if (!std::isfinite(r.min_distance_ratio)) r.min_distance_ratio = 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Partition of unity

double smooth_step(double t, double* derivative) {
  if (t <= 0.0 || t >= 1.0) {
    if (derivative) *derivative = 0.0;
    return t <= 0.0 ? 0.0 : 1.0;
  }
  const double f = std::exp(-1.0 / t);
  const double g = std::exp(-1.0 / (1.0 - t));
  const double den = f + g;
  if (derivative) {
    const double df = f / (t * t);
    const double dg = g / ((1.0 - t) * (1.0 - t));
    *derivative = (df * g + f * dg) / (den * den);
  }
  return f / den;
}

PartitionOfUnity::PartitionOfUnity(const WBCover& cover) : cover_(cover) {
  const int n = cover_.dim();
  double min_side = INFINITY;
  for (const WBCube& c : cover_.cubes) min_side = std::min(min_side, c.base.side);
  Box span = cover_.domain.box;
  for (int a = 0; a < n; ++a) {
    span.lo[a] -= min_side;
    span.hi[a] += min_side;
  }
  BucketGrid grid(span, min_side);
  for (int i = 0; i < static_cast<int>(cover_.cubes.size()); ++i) {
    Point lo, hi;
    support(i, lo, hi);
    grid.insert(i, lo, hi);
  }
  origin_ = grid.origin;
  cell_ = grid.cell;
  dims_ = grid.dims;
  buckets_ = std::move(grid.cells);
}

void PartitionOfUnity::support(int cube, Point& lo, Point& hi) const {
  const WBCube& c = cover_.cubes.at(cube);
  lo = hi = c.center;
  for (int a = 0; a < cover_.dim(); ++a) {
    lo[a] -= 0.5 * kSupport * c.base.side;
    hi[a] += 0.5 * kSupport * c.base.side;
  }
}

const std::vector<int>& PartitionOfUnity::bucket(const Point& x) const {
  auto coord = [&](double v, int a) {
    return std::clamp(static_cast<int>(std::floor((v - origin_[a]) / cell_)), 0, dims_[a] - 1);
  };
  const int i = coord(x[0], 0);
  const int j = cover_.dim() == 2 ? coord(x[1], 1) : 0;
  return buckets_[static_cast<std::size_t>(j) * dims_[0] + i];
}

double PartitionOfUnity::raw(int cube, const Point& x, Point* grad) const {
  const WBCube& c = cover_.cubes[cube];
  const int n = cover_.dim();
  const double s = c.base.side;
  const double half_q = 0.5 * s;
  const double band = 0.5 * (kSupport - 1.0) * s;
  std::array<double, 2> v{1.0, 1.0}, dv{0.0, 0.0};
  for (int a = 0; a < n; ++a) {
    const double d = x[a] - c.center[a];
    const double t = (half_q + band - std::abs(d)) / band;
    double dt = 0.0;
    v[a] = smooth_step(t, &dt);
    dv[a] = -dt * (d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0)) / band;
    if (v[a] == 0.0) {
      if (grad) *grad = {0.0, 0.0};
      return 0.0;
    }
  }
  if (grad) *grad = {dv[0] * v[1], n == 2 ? v[0] * dv[1] : 0.0};
  return v[0] * v[1];
}

std::vector<PartitionOfUnity::Term> PartitionOfUnity::evaluate(const Point& x) const {
  std::vector<Term> terms;
  double sum = 0.0;
  Point gsum{0.0, 0.0};
  for (int i : bucket(x)) {
    Point g;
    const double b = raw(i, x, &g);
    if (b == 0.0) continue;
    terms.push_back({i, b, g});
    sum += b;
    gsum[0] += g[0];
    gsum[1] += g[1];
  }
  if (sum == 0.0) return {};
  for (Term& t : terms) {
    t.value /= sum;
    for (int a = 0; a < 2; ++a) t.grad[a] = (t.grad[a] - t.value * gsum[a]) / sum;
  }
  return terms;
}

double PartitionOfUnity::weight(int cube, const Point& x) const {
  for (const Term& t : evaluate(x)) {
    if (t.cube == cube) return t.value;
  }
  return 0.0;
}

PouAudit audit_partition(const PartitionOfUnity& pou, int samples, unsigned long long seed) {
  const WBCover& cover = pou.cover();
  const int n = cover.dim();
  const double M = std::max(1, cover.audit.multiplicity);
  PouAudit r;
  r.min_scaled_weight = INFINITY;
  Rng rng(seed);
  while (r.samples < samples) {
    const Point x = sample_point(rng, cover.domain.box);
    if (!cover.domain.contains(x)) continue;
    ++r.samples;
    double sum = 0.0;
    for (const auto& t : pou.evaluate(x)) {
      sum += t.value;
      const WBCube& c = cover.cubes[t.cube];
      bool in_q = true;
      for (int a = 0; a < n && in_q; ++a) in_q = std::abs(x[a] - c.center[a]) < 0.5 * c.base.side;
      if (!in_q) continue;
      r.min_scaled_weight = std::min(r.min_scaled_weight, t.value * M);
      if (t.value * M < 1.0 - 1e-12) ++r.lower_bound_violations;
    }
    r.max_sum_error = std::max(r.max_sum_error, std::abs(sum - 1.0));
  }
  return r;
}

double gradient_constant(const PartitionOfUnity& pou, int per_axis) {
  if (per_axis < 6) throw InvalidArgument("gradient_constant: need at least 6 points per axis");
  const WBCover& cover = pou.cover();
  const int n = cover.dim();
  // relative offsets: k points in each transition band, k across the base cube
  const int k = per_axis / 3;
  std::vector<double> rel;
  const double half_q = 0.5, band = 0.5 * (kSupport - 1.0);
  for (int i = 0; i < k; ++i) {
    const double t = (i + 0.5) / k;
    rel.push_back(-half_q - band + t * band);
    rel.push_back(half_q + t * band);
    rel.push_back(-half_q + t * 2.0 * half_q);
  }
  double c = 0.0;
  for (int i = 0; i < static_cast<int>(cover.cubes.size()); ++i) {
    const WBCube& cube = cover.cubes[i];
    const double s = cube.base.side;
    for (double ry : (n == 2 ? rel : std::vector<double>{0.0}))
      for (double rx : rel) {
        const Point x{cube.center[0] + rx * s, cube.center[1] + ry * s};
        if (!cover.domain.contains(x)) continue;
        for (const auto& t : pou.evaluate(x)) {
          if (t.cube != i) continue;
          c = std::max(c, std::hypot(t.grad[0], t.grad[1]) * cube.side);
        }
      }
  }
  return c;
}

void write_csv(const WBCover& cover, std::ostream& os) {
  os.precision(17);
  os << "index,center_x,center_y,side,scale,flags\n";
  for (std::size_t i = 0; i < cover.cubes.size(); ++i) {
    const WBCube& c = cover.cubes[i];
    os << i << ',' << c.center[0] << ',' << c.center[1] << ',' << c.side << ',' << c.scale << ','
       << (c.base.truncated ? "truncated" : "") << '\n';
  }
}

}  // namespace pqlab
