#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pqlab/geometry.hpp"
#include "pqlab/matrix.hpp"

namespace pqlab {

/// Open box, optionally minus a closed rectangular hole. `whole_space` stands in
/// for R^n, which has no Whitney decomposition.
struct Domain {
  Box box;
  std::optional<Box> hole;
  bool whole_space = false;

  static Domain of(const Box& box) { return Domain{box, std::nullopt, false}; }
  static Domain with_hole(const Box& box, const Box& hole);
  static Domain everything(int dim);

  int dim() const { return box.dim; }
  bool contains(const Point& x) const;
  /// Distance from x to the complement (0 outside).
  double distance(const Point& x) const;
  /// Distance from the closed box [lo, hi] to the complement (0 when they meet).
  double distance(const Point& lo, const Point& hi) const;
  void validate() const;
};

enum class WhitneyRule {
  /// Accept a dyadic cube Q once dist(Q, complement) >= 3 side(Q).
  kSeparated,
  /// Accept once dist(Q, complement) >= side(Q) / 2, i.e. 2Q lies in the domain.
  kClassical,
};

struct WhitneyOptions {
  int depth = 8;
  WhitneyRule rule = WhitneyRule::kSeparated;
};

struct DyadicCube {
  Point lo{};
  double side = 0.0;
  int level = 0;
  /// Left over at the truncation depth without meeting the acceptance rule.
  bool truncated = false;

  Point center(int dim) const;
};

/// Dyadic Whitney cubes of the domain, ordered by (level, y, x). The root
/// cubes tile the box with side min(extent); the other extent must be an
/// integer multiple of it.
std::vector<DyadicCube> whitney(const Domain& domain, const WhitneyOptions& opts = {});

struct WBCube {
  DyadicCube base;
  Point center{};
  double side = 0.0;   // side of K = (7/6) Q
  double scale = 0.0;  // |K|^{m/n}
  double distance = 0.0;  // dist(K, complement)
};

struct CoverAudit {
  int cube_count = 0;
  int truncated_count = 0;
  int multiplicity = 0;
  int multiplicity_bound = 0;
  double min_overlap_ratio = 0.0;
  double overlap_bound = 0.0;
  /// min over untruncated cubes of dist(K, complement) / (2 (7/6)^{-1/n} |K|^{1/n})
  double min_distance_ratio = 0.0;
  int distance_violations = 0;
  bool scale_comparable = true;
  bool base_cubes_inside = true;
  /// Description of the first failing pair or cube, empty when the audit passes.
  std::string first_failure;

  bool passed() const;
};

struct WBCover {
  Domain domain;
  double enlargement = 1.0 / 6.0;
  double m_exponent = 1.0;
  std::vector<WBCube> cubes;
  CoverAudit audit;

  int dim() const { return domain.dim(); }
  /// Indices of cubes whose open K contains x.
  std::vector<int> containing(const Point& x) const;
};

/// K_i = (1 + 1/6) Q_i with scales |K_i|^{m/n}. The audit is exhaustive over all
/// pairs of intersecting cubes. With `strict`, a failed audit throws InternalError
/// naming the offending pair.
WBCover wb_enlarge(const Domain& domain, const std::vector<DyadicCube>& cubes, double m_exponent,
                   bool strict = true);

CoverAudit audit_cover(const WBCover& cover);

/// psi_i = b_i / sum_j b_j with b_i a product of exponential smooth steps that is
/// 1 on Q_i and vanishes outside (1 + 1/12) Q_i = (1 + delta/2)/(1 + delta) K_i.
class PartitionOfUnity {
 public:
  explicit PartitionOfUnity(const WBCover& cover);

  const WBCover& cover() const { return cover_; }

  struct Term {
    int cube;
    double value;
    Point grad;
  };
  /// Nonzero weights at x with their gradients, ordered by cube index.
  std::vector<Term> evaluate(const Point& x) const;
  double weight(int cube, const Point& x) const;
  /// Support box of psi_i.
  void support(int cube, Point& lo, Point& hi) const;

 private:
  double raw(int cube, const Point& x, Point* grad) const;
  const std::vector<int>& bucket(const Point& x) const;

  WBCover cover_;
  Point origin_{};
  double cell_ = 1.0;
  std::array<int, 2> dims_{1, 1};
  std::vector<std::vector<int>> buckets_;
};

struct PouAudit {
  int samples = 0;
  double max_sum_error = 0.0;
  /// min over samples x in Q_i of psi_i(x) * M.
  double min_scaled_weight = 0.0;
  int lower_bound_violations = 0;
};

PouAudit audit_partition(const PartitionOfUnity& pou, int samples, unsigned long long seed);

/// max over cubes of |D psi_i| |K_i|^{1/n}, sampled on a fixed relative grid
/// of `per_axis` points per axis over each support box.
double gradient_constant(const PartitionOfUnity& pou, int per_axis = 48);

/// index, center, side, scale, flags
void write_csv(const WBCover& cover, std::ostream& os);

/// Smooth step: 0 for t <= 0, 1 for t >= 1, built from exp(-1/t).
double smooth_step(double t, double* derivative = nullptr);

}  // namespace pqlab
