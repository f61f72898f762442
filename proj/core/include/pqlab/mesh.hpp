#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "pqlab/expression.hpp"
#include "pqlab/geometry.hpp"
#include "pqlab/integrand.hpp"
#include "pqlab/matrix.hpp"

namespace pqlab {

/// Uniform simplicial mesh of a box. In 2D every cell (i, j) with corners
/// a=(i,j), b=(i+1,j), c=(i+1,j+1), d=(i,j+1) is split into the lower triangle
/// (a,b,c) and the upper triangle (a,c,d); element 2*cell is the lower one.
class Mesh {
 public:
  Mesh(const Box& box, std::array<int, 2> cells);
  static Mesh uniform(const Box& box, int cells_per_axis);

  int dim() const { return box_.dim; }
  const Box& box() const { return box_; }
  int cells(int axis) const { return cells_[axis]; }
  double h(int axis) const { return h_[axis]; }
  /// Largest cell edge.
  double cell_size() const;

  int nodes_along(int axis) const { return axis < dim() ? cells_[axis] + 1 : 1; }
  int node_count() const { return nodes_along(0) * nodes_along(1); }
  int element_count() const { return dim() == 1 ? cells_[0] : 2 * cells_[0] * cells_[1]; }
  int nodes_per_element() const { return dim() + 1; }

  int node_index(int i, int j = 0) const { return j * nodes_along(0) + i; }
  std::array<int, 2> node_ij(int k) const { return {k % nodes_along(0), k / nodes_along(0)}; }
  Point node(int k) const;
  bool is_boundary(int k) const;

  std::array<int, 3> element_nodes(int e) const;
  Point barycenter(int e) const;
  double element_volume() const { return dim() == 1 ? h_[0] : 0.5 * h_[0] * h_[1]; }
  /// d(Du_e)_{row i} / d u(node k of element e)
  double grad_coef(int e, int k, int i) const;
  double nodal_weight(int k) const;

  /// Element containing x (clamped to the box) and its barycentric weights.
  int locate(const Point& x, std::array<double, 3>& weights) const;

  bool operator==(const Mesh& o) const { return box_ == o.box_ && cells_ == o.cells_; }

 private:
  Box box_;
  std::array<int, 2> cells_{1, 1};
  std::array<double, 2> h_{1.0, 1.0};
};

/// x -> R^m.
class VectorFunction {
 public:
  using Fn = std::function<void(const Point&, double*)>;
  VectorFunction(int components, Fn fn);
  static VectorFunction from_expressions(const std::vector<Expression>& exprs);
  /// Components separated by ';', e.g. "x1; x2^2".
  static VectorFunction parse(const std::string& text);
  static VectorFunction zero(int components);

  int components() const { return m_; }
  void operator()(const Point& x, double* out) const { fn_(x, out); }
  const std::string& text() const { return text_; }

 private:
  int m_;
  Fn fn_;
  std::string text_;
};

class DiscreteField {
 public:
  DiscreteField(const Mesh& mesh, int components);

  const Mesh& mesh() const { return mesh_; }
  int components() const { return m_; }
  double& operator()(int node, int c) { return values_[static_cast<std::size_t>(node) * m_ + c]; }
  double operator()(int node, int c) const { return values_[static_cast<std::size_t>(node) * m_ + c]; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  /// Dirichlet nodes: exactly the topological boundary nodes of the mesh.
  const std::vector<std::uint8_t>& boundary_mask() const { return mask_; }
  bool is_dirichlet(int node) const { return mask_[node] != 0; }

  bool all_finite() const;
  /// P1 interpolant at x (clamped to the box).
  double interpolate(const Point& x, int c) const;
  Mat element_gradient(int e) const;

 private:
  Mesh mesh_;
  int m_;
  std::vector<double> values_;
  std::vector<std::uint8_t> mask_;
};

struct ElementField {
  Mesh mesh;
  std::vector<Mat> values;
};

struct NormLadder {
  std::map<double, double> u_norms;
  std::map<double, double> du_norms;
  std::optional<double> besov_seminorm;
};

ElementField gradient(const DiscreteField& u);

/// Midpoint rule for the density term, nodal trapezoid weights for f.u.
double energy(const Integrand& f, const DiscreteField& u);
double energy(const Integrand& f, const DiscreteField& u, const DiscreteField& source);

/// Exponent may be +infinity. Nodal trapezoid quadrature, Euclidean norm across components.
double lp_norm(const DiscreteField& u, double exponent);
/// Element-wise constant values, Frobenius norm.
double lp_norm(const ElementField& du, double exponent);
double sobolev_norm(const DiscreteField& u, double exponent);
NormLadder norm_ladder(const DiscreteField& u, const std::vector<double>& exponents);

DiscreteField interpolate(const Mesh& mesh, const VectorFunction& g);
DiscreteField apply_boundary(const DiscreteField& u, const VectorFunction& g);
/// Interior values from the boundary values by transfinite (Coons) blending.
DiscreteField blend_interior(const DiscreteField& u);
/// P1 interpolation of u onto another mesh of the same box.
DiscreteField prolong(const DiscreteField& u, const Mesh& target);

/// CSV: coordinates then components, one node per line.
void write_csv(const DiscreteField& u, std::ostream& os);
/// Header: magic "PQLF", int32 n, int32 m, int32 cells per axis (2 entries),
/// then node values row-major (node-major, component-minor) as little-endian float64.
void write_binary(const DiscreteField& u, std::ostream& os);
DiscreteField read_binary(std::istream& is, const Box& box);

}  // namespace pqlab
