#include "pqlab/mesh.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "pqlab/errors.hpp"
#include "pqlab/summation.hpp"

namespace pqlab {

// ---------------------------------------------------------------------------
// Mesh

Mesh::Mesh(const Box& box, std::array<int, 2> cells) : box_(box), cells_(cells) {
  box_.validate();
  if (box_.dim == 1) cells_[1] = 1;
  for (int a = 0; a < box_.dim; ++a) {
    if (cells_[a] < 1) throw InvalidArgument("mesh resolution must be at least one cell per axis");
    h_[a] = box_.extent(a) / cells_[a];
    if (!(h_[a] > 0.0)) throw InvalidArgument("mesh cell size must be positive");
  }
  if (box_.dim == 1) h_[1] = 1.0;
}

Mesh Mesh::uniform(const Box& box, int cells_per_axis) { return Mesh(box, {cells_per_axis, cells_per_axis}); }

double Mesh::cell_size() const { return dim() == 1 ? h_[0] : std::max(h_[0], h_[1]); }

Point Mesh::node(int k) const {
  const auto [i, j] = node_ij(k);
  Point x{box_.lo[0] + i * h_[0], 0.0};
  if (dim() == 2) x[1] = box_.lo[1] + j * h_[1];
  // exact endpoints so boundary data evaluates on the box faces
  if (i == cells_[0]) x[0] = box_.hi[0];
  if (dim() == 2 && j == cells_[1]) x[1] = box_.hi[1];
  return x;
}

bool Mesh::is_boundary(int k) const {
  const auto [i, j] = node_ij(k);
  if (i == 0 || i == cells_[0]) return true;
  return dim() == 2 && (j == 0 || j == cells_[1]);
}

std::array<int, 3> Mesh::element_nodes(int e) const {
  if (dim() == 1) return {e, e + 1, -1};
  const int cell = e / 2;
  const int i = cell % cells_[0];
  const int j = cell / cells_[0];
  const int a = node_index(i, j);
  const int b = node_index(i + 1, j);
  const int c = node_index(i + 1, j + 1);
  const int d = node_index(i, j + 1);
  return (e % 2 == 0) ? std::array<int, 3>{a, b, c} : std::array<int, 3>{a, c, d};
}

Point Mesh::barycenter(int e) const {
  if (dim() == 1) return {box_.lo[0] + (e + 0.5) * h_[0], 0.0};
  const int cell = e / 2;
  const int i = cell % cells_[0];
  const int j = cell / cells_[0];
  const double x0 = box_.lo[0] + i * h_[0];
  const double y0 = box_.lo[1] + j * h_[1];
  if (e % 2 == 0) return {x0 + 2.0 * h_[0] / 3.0, y0 + h_[1] / 3.0};
  return {x0 + h_[0] / 3.0, y0 + 2.0 * h_[1] / 3.0};
}

double Mesh::grad_coef(int e, int k, int i) const {
  if (dim() == 1) return k == 0 ? -1.0 / h_[0] : 1.0 / h_[0];
  const double ix = 1.0 / h_[0];
  const double iy = 1.0 / h_[1];
  // lower (a,b,c): ux = (b-a)/hx, uy = (c-b)/hy; upper (a,c,d): ux = (c-d)/hx, uy = (d-a)/hy
  static constexpr double kLower[3][2] = {{-1, 0}, {1, -1}, {0, 1}};
  static constexpr double kUpper[3][2] = {{0, -1}, {1, 0}, {-1, 1}};
  const double c = (e % 2 == 0) ? kLower[k][i] : kUpper[k][i];
  return c * (i == 0 ? ix : iy);
}

double Mesh::nodal_weight(int k) const {
  const auto [i, j] = node_ij(k);
  double w = h_[0] * ((i == 0 || i == cells_[0]) ? 0.5 : 1.0);
  if (dim() == 2) w *= h_[1] * ((j == 0 || j == cells_[1]) ? 0.5 : 1.0);
  return w;
}

int Mesh::locate(const Point& x, std::array<double, 3>& w) const {
  const double s_abs = (std::clamp(x[0], box_.lo[0], box_.hi[0]) - box_.lo[0]) / h_[0];
  const int i = std::min(static_cast<int>(s_abs), cells_[0] - 1);
  const double s = s_abs - i;
  if (dim() == 1) {
    w = {1.0 - s, s, 0.0};
    return i;
  }
  const double t_abs = (std::clamp(x[1], box_.lo[1], box_.hi[1]) - box_.lo[1]) / h_[1];
  const int j = std::min(static_cast<int>(t_abs), cells_[1] - 1);
  const double t = t_abs - j;
  const int cell = j * cells_[0] + i;
  if (t <= s) {
    // lower (a,b,c): u = a + s (b - a) + t (c - b)
    w = {1.0 - s, s - t, t};
    return 2 * cell;
  }
  // upper (a,c,d): u = a + t (d - a) + s (c - d)
  w = {1.0 - t, s, t - s};
  return 2 * cell + 1;
}

// ---------------------------------------------------------------------------
// VectorFunction

VectorFunction::VectorFunction(int components, Fn fn) : m_(components), fn_(std::move(fn)) {
  if (m_ < 1 || m_ > kMaxComponents) throw InvalidArgument("vector function needs 1 to 3 components");
  if (!fn_) throw InvalidArgument("vector function without callable");
}

VectorFunction VectorFunction::from_expressions(const std::vector<Expression>& exprs) {
  VectorFunction f(static_cast<int>(exprs.size()), [exprs](const Point& x, double* out) {
    for (std::size_t c = 0; c < exprs.size(); ++c) out[c] = exprs[c](x);
  });
  std::string text;
  for (std::size_t c = 0; c < exprs.size(); ++c) text += (c ? "; " : "") + exprs[c].text();
  f.text_ = text;
  return f;
}

VectorFunction VectorFunction::parse(const std::string& text) {
  std::vector<Expression> exprs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) exprs.push_back(Expression::parse(item));
  if (exprs.empty()) throw InvalidArgument("empty boundary datum");
  return from_expressions(exprs);
}

VectorFunction VectorFunction::zero(int components) {
  return from_expressions(std::vector<Expression>(static_cast<std::size_t>(components), Expression::constant(0.0)));
}

// ---------------------------------------------------------------------------
// DiscreteField

DiscreteField::DiscreteField(const Mesh& mesh, int components)
    : mesh_(mesh), m_(components), values_(static_cast<std::size_t>(mesh.node_count()) * components, 0.0) {
  if (m_ < 1 || m_ > kMaxComponents) throw InvalidArgument("field needs 1 to 3 components");
  mask_.resize(mesh_.node_count());
  for (int k = 0; k < mesh_.node_count(); ++k) mask_[k] = mesh_.is_boundary(k) ? 1 : 0;
}

bool DiscreteField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double DiscreteField::interpolate(const Point& x, int c) const {
  std::array<double, 3> w{};
  const int e = mesh_.locate(x, w);
  const auto nodes = mesh_.element_nodes(e);
  // relative to the first vertex, so constants come back exactly
  const double v0 = (*this)(nodes[0], c);
  double v = v0;
  for (int k = 1; k < mesh_.nodes_per_element(); ++k) v += w[k] * ((*this)(nodes[k], c) - v0);
  return v;
}

Mat DiscreteField::element_gradient(int e) const {
  Mat g(mesh_.dim(), m_);
  const auto nodes = mesh_.element_nodes(e);
  for (int k = 0; k < mesh_.nodes_per_element(); ++k) {
    for (int i = 0; i < mesh_.dim(); ++i) {
      const double c = mesh_.grad_coef(e, k, i);
      if (c == 0.0) continue;
      for (int a = 0; a < m_; ++a) g(i, a) += c * (*this)(nodes[k], a);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Operations

ElementField gradient(const DiscreteField& u) {
  ElementField du{u.mesh(), {}};
  du.values.reserve(u.mesh().element_count());
  for (int e = 0; e < u.mesh().element_count(); ++e) du.values.push_back(u.element_gradient(e));
  return du;
}

namespace {

void check_integrand(const Integrand& f, const DiscreteField& u) {
  if (f.params().n != u.mesh().dim() || f.params().m != u.components()) {
    throw InvalidArgument("energy: integrand shape (n, m) differs from the field");
  }
}

}  // namespace

double energy(const Integrand& f, const DiscreteField& u) {
  check_integrand(f, u);
  const Mesh& mesh = u.mesh();
  CompensatedSum s;
  for (int e = 0; e < mesh.element_count(); ++e) s += f.value(mesh.barycenter(e), u.element_gradient(e));
  return s.value() * mesh.element_volume();
}

double energy(const Integrand& f, const DiscreteField& u, const DiscreteField& source) {
  if (!(source.mesh() == u.mesh()) || source.components() != u.components()) {
    throw InvalidArgument("energy: source lives on a different mesh");
  }
  const double bulk = energy(f, u);
  CompensatedSum s;
  for (int k = 0; k < u.mesh().node_count(); ++k) {
    double fu = 0.0;
    for (int c = 0; c < u.components(); ++c) fu += source(k, c) * u(k, c);
    s += u.mesh().nodal_weight(k) * fu;
  }
  return bulk - s.value();
}

double lp_norm(const DiscreteField& u, double exponent) {
  if (!(exponent >= 1.0)) throw InvalidArgument("lp_norm: exponent must be >= 1");
  const Mesh& mesh = u.mesh();
  auto mag = [&](int k) {
    double s = 0.0;
    for (int c = 0; c < u.components(); ++c) s += u(k, c) * u(k, c);
    return std::sqrt(s);
  };
  if (std::isinf(exponent)) {
    double m = 0.0;
    for (int k = 0; k < mesh.node_count(); ++k) m = std::max(m, mag(k));
    return m;
  }
  CompensatedSum s;
  for (int k = 0; k < mesh.node_count(); ++k) s += mesh.nodal_weight(k) * std::pow(mag(k), exponent);
  return std::pow(s.value(), 1.0 / exponent);
}

double lp_norm(const ElementField& du, double exponent) {
  if (!(exponent >= 1.0)) throw InvalidArgument("lp_norm: exponent must be >= 1");
  if (std::isinf(exponent)) {
    double m = 0.0;
    for (const Mat& z : du.values) m = std::max(m, z.norm());
    return m;
  }
  CompensatedSum s;
  for (const Mat& z : du.values) s += std::pow(z.norm(), exponent);
  return std::pow(s.value() * du.mesh.element_volume(), 1.0 / exponent);
}

double sobolev_norm(const DiscreteField& u, double exponent) {
  const double a = lp_norm(u, exponent);
  const double b = lp_norm(gradient(u), exponent);
  if (std::isinf(exponent)) return std::max(a, b);
  return std::pow(std::pow(a, exponent) + std::pow(b, exponent), 1.0 / exponent);
}

NormLadder norm_ladder(const DiscreteField& u, const std::vector<double>& exponents) {
  NormLadder n;
  const ElementField du = gradient(u);
  for (double e : exponents) {
    n.u_norms[e] = lp_norm(u, e);
    n.du_norms[e] = lp_norm(du, e);
  }
  return n;
}

DiscreteField interpolate(const Mesh& mesh, const VectorFunction& g) {
  DiscreteField u(mesh, g.components());
  for (int k = 0; k < mesh.node_count(); ++k) g(mesh.node(k), &u(k, 0));
  if (!u.all_finite()) throw InvalidArgument("interpolate: function is not finite on the mesh");
  return u;
}

DiscreteField apply_boundary(const DiscreteField& u, const VectorFunction& g) {
  if (g.components() != u.components()) throw InvalidArgument("apply_boundary: component count mismatch");
  DiscreteField out = u;
  std::array<double, kMaxComponents> buf{};
  for (int k = 0; k < u.mesh().node_count(); ++k) {
    if (!u.is_dirichlet(k)) continue;
    g(u.mesh().node(k), buf.data());
    for (int c = 0; c < u.components(); ++c) {
      if (!std::isfinite(buf[c])) throw InvalidArgument("apply_boundary: datum not finite on the boundary");
      out(k, c) = buf[c];
    }
  }
  return out;
}

DiscreteField blend_interior(const DiscreteField& u) {
  DiscreteField out = u;
  const Mesh& mesh = u.mesh();
  const int nx = mesh.cells(0);
  for (int c = 0; c < u.components(); ++c) {
    if (mesh.dim() == 1) {
      const double a = u(0, c);
      const double b = u(nx, c);
      for (int i = 1; i < nx; ++i) out(i, c) = a + (b - a) * i / nx;
      continue;
    }
    const int ny = mesh.cells(1);
    auto v = [&](int i, int j) { return u(mesh.node_index(i, j), c); };
    for (int j = 1; j < ny; ++j) {
      const double t = static_cast<double>(j) / ny;
      for (int i = 1; i < nx; ++i) {
        const double s = static_cast<double>(i) / nx;
        const double edges = (1 - s) * v(0, j) + s * v(nx, j) + (1 - t) * v(i, 0) + t * v(i, ny);
        const double corners = (1 - s) * (1 - t) * v(0, 0) + s * (1 - t) * v(nx, 0) +
                               (1 - s) * t * v(0, ny) + s * t * v(nx, ny);
        out(mesh.node_index(i, j), c) = edges - corners;
      }
    }
  }
  return out;
}

DiscreteField prolong(const DiscreteField& u, const Mesh& target) {
  if (!(target.box() == u.mesh().box())) throw InvalidArgument("prolong: meshes cover different boxes");
  DiscreteField out(target, u.components());
  for (int k = 0; k < target.node_count(); ++k) {
    const Point x = target.node(k);
    for (int c = 0; c < u.components(); ++c) out(k, c) = u.interpolate(x, c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// IO

void write_csv(const DiscreteField& u, std::ostream& os) {
  const Mesh& mesh = u.mesh();
  os.precision(17);
  os << "x1";
  if (mesh.dim() == 2) os << ",x2";
  for (int c = 0; c < u.components(); ++c) os << ",u" << c + 1;
  os << '\n';
  for (int k = 0; k < mesh.node_count(); ++k) {
    const Point x = mesh.node(k);
    os << x[0];
    if (mesh.dim() == 2) os << ',' << x[1];
    for (int c = 0; c < u.components(); ++c) os << ',' << u(k, c);
    os << '\n';
  }
}

namespace {

constexpr char kMagic[4] = {'P', 'Q', 'L', 'F'};

template <typename T>
void put_le(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw InvalidArgument("read_binary: truncated stream");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

void write_binary(const DiscreteField& u, std::ostream& os) {
  const Mesh& mesh = u.mesh();
  os.write(kMagic, 4);
  put_le<std::int32_t>(os, mesh.dim());
  put_le<std::int32_t>(os, u.components());
  put_le<std::int32_t>(os, mesh.cells(0));
  put_le<std::int32_t>(os, mesh.dim() == 2 ? mesh.cells(1) : 0);
  for (double v : u.values()) put_le<double>(os, v);
}

DiscreteField read_binary(std::istream& is, const Box& box) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw InvalidArgument("read_binary: bad magic");
  }
  const int n = get_le<std::int32_t>(is);
  const int m = get_le<std::int32_t>(is);
  const int cx = get_le<std::int32_t>(is);
  const int cy = get_le<std::int32_t>(is);
  if (n != box.dim) throw InvalidArgument("read_binary: dimension differs from the supplied box");
  DiscreteField u(Mesh(box, {cx, n == 2 ? cy : 1}), m);
  for (double& v : u.values()) v = get_le<double>(is);
  return u;
}

}  // namespace pqlab
