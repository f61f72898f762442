#include "pqlab/solver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "pqlab/errors.hpp"
#include "pqlab/summation.hpp"

namespace pqlab {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Flattened view of the discrete problem: element geometry, Dirichlet dof map and
// the value slots of the metric in compressed storage.
class Problem {
 public:
  Problem(const Integrand& f, const Mesh& mesh, int m, const DiscreteField* source)
      : f_(f), mesh_(mesh), n_(mesh.dim()), m_(m), npe_(mesh.nodes_per_element()), source_(source) {
    if (f.params().n != n_ || f.params().m != m_) {
      throw InvalidArgument("integrand shape (n, m) differs from the mesh and datum");
    }
    if (source_ && (!(source_->mesh() == mesh) || source_->components() != m)) {
      throw InvalidArgument("source lives on a different mesh");
    }
    for (int t = 0; t < 2; ++t)
      for (int k = 0; k < npe_; ++k)
        for (int i = 0; i < n_; ++i) coef_[t][k][i] = mesh.grad_coef(t, k, i);
    dof_.assign(static_cast<std::size_t>(mesh.node_count()) * m, -1);
    for (int k = 0; k < mesh.node_count(); ++k) {
      if (mesh.is_boundary(k)) continue;
      for (int c = 0; c < m; ++c) dof_[static_cast<std::size_t>(k) * m + c] = ndof_++;
    }
    const int ne = mesh.element_count();
    nodes_.resize(ne);
    bary_.resize(ne);
    for (int e = 0; e < ne; ++e) {
      nodes_[e] = mesh.element_nodes(e);
      bary_[e] = mesh.barycenter(e);
    }
    vol_ = mesh.element_volume();
  }

  int ndof() const { return ndof_; }
  int local() const { return npe_ * m_; }

  Mat grad_of(const std::vector<double>& u, int e) const {
    Mat z(n_, m_);
    const auto& c = coef_[n_ == 2 ? e % 2 : 0];
    for (int k = 0; k < npe_; ++k) {
      const double* v = &u[static_cast<std::size_t>(nodes_[e][k]) * m_];
      for (int i = 0; i < n_; ++i) {
        if (c[k][i] == 0.0) continue;
        for (int a = 0; a < m_; ++a) z(i, a) += c[k][i] * v[a];
      }
    }
    return z;
  }

  double energy(const std::vector<double>& u) const {
    CompensatedSum s;
    for (int e = 0; e < static_cast<int>(nodes_.size()); ++e) s += f_.value(bary_[e], grad_of(u, e));
    double total = s.value() * vol_;
    if (source_) {
      CompensatedSum t;
      for (int k = 0; k < mesh_.node_count(); ++k)
        for (int c = 0; c < m_; ++c)
          t += mesh_.nodal_weight(k) * (*source_)(k, c) * u[static_cast<std::size_t>(k) * m_ + c];
      total -= t.value();
    }
    return total;
  }

  // Full nodal gradient of the energy.
  std::vector<double> gradient(const std::vector<double>& u) const {
    std::vector<double> g(u.size(), 0.0);
    for (int e = 0; e < static_cast<int>(nodes_.size()); ++e) {
      const Mat s = f_.gradient(bary_[e], grad_of(u, e));
      const auto& c = coef_[n_ == 2 ? e % 2 : 0];
      for (int k = 0; k < npe_; ++k) {
        double* out = &g[static_cast<std::size_t>(nodes_[e][k]) * m_];
        for (int i = 0; i < n_; ++i) {
          if (c[k][i] == 0.0) continue;
          for (int a = 0; a < m_; ++a) out[a] += vol_ * c[k][i] * s(i, a);
        }
      }
    }
    if (source_) {
      for (int k = 0; k < mesh_.node_count(); ++k)
        for (int c = 0; c < m_; ++c)
          g[static_cast<std::size_t>(k) * m_ + c] -= mesh_.nodal_weight(k) * (*source_)(k, c);
    }
    return g;
  }

  double residual(const std::vector<double>& grad) const {
    double r = 0.0;
    for (int k = 0; k < mesh_.node_count(); ++k) {
      if (mesh_.is_boundary(k)) continue;
      for (int c = 0; c < m_; ++c) {
        r = std::max(r, std::abs(grad[static_cast<std::size_t>(k) * m_ + c]) / mesh_.nodal_weight(k));
      }
    }
    return r;
  }

  // Builds the sparsity pattern once and records where each local entry lands.
  void prepare_metric() {
    if (!slots_.empty()) return;
    std::vector<Eigen::Triplet<double>> trip;
    const int L = local();
    for (int e = 0; e < static_cast<int>(nodes_.size()); ++e)
      for (int la = 0; la < L; ++la)
        for (int lb = 0; lb < L; ++lb) {
          const int ra = dof_at(e, la), rb = dof_at(e, lb);
          if (ra >= 0 && rb >= 0) trip.emplace_back(ra, rb, 1.0);
        }
    for (int d = 0; d < ndof_; ++d) trip.emplace_back(d, d, 1.0);
    metric_.resize(ndof_, ndof_);
    metric_.setFromTriplets(trip.begin(), trip.end());
    metric_.makeCompressed();
    slots_.assign(nodes_.size() * L * L, -1);
    for (int e = 0; e < static_cast<int>(nodes_.size()); ++e)
      for (int la = 0; la < L; ++la)
        for (int lb = 0; lb < L; ++lb) {
          const int ra = dof_at(e, la), rb = dof_at(e, lb);
          if (ra < 0 || rb < 0) continue;
          slots_[(static_cast<std::size_t>(e) * L + la) * L + lb] =
              static_cast<int>(&metric_.coeffRef(ra, rb) - metric_.valuePtr());
        }
    for (int d = 0; d < ndof_; ++d) diag_.push_back(static_cast<int>(&metric_.coeffRef(d, d) - metric_.valuePtr()));
    solver_.analyzePattern(metric_);
  }

  // Variable metric sum_e vol B_e^T H_e B_e with H_e a finite-difference Hessian
  // of F at Du_e whose eigenvalues are floored.
  bool factor_metric(const std::vector<double>& u) {
    prepare_metric();
    const int ne = static_cast<int>(nodes_.size());
    const int d = n_ * m_;
    const int L = local();
    double zrms = 0.0;
    std::vector<Mat> zs(ne);
    for (int e = 0; e < ne; ++e) {
      zs[e] = grad_of(u, e);
      zrms += zs[e].norm2();
    }
    zrms = std::sqrt(zrms / ne);
    const double zfloor = std::max(1e-2 * zrms, 1e-8);

    std::vector<Eigen::MatrixXd> hs(ne);
    double mean_top = 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    for (int e = 0; e < ne; ++e) {
      const Mat& z = zs[e];
      const double h = 1e-4 * std::max(z.norm(), zfloor);
      Eigen::MatrixXd H(d, d);
      for (int j = 0; j < d; ++j) {
        Mat zp = z, zm = z;
        zp[j] += h;
        zm[j] -= h;
        const Mat gp = f_.gradient(bary_[e], zp);
        const Mat gm = f_.gradient(bary_[e], zm);
        for (int i = 0; i < d; ++i) H(i, j) = (gp[i] - gm[i]) / (2.0 * h);
      }
      H = 0.5 * (H + H.transpose()).eval();
      if (!H.allFinite()) return false;
      hs[e] = H;
      mean_top += d == 1 ? std::abs(H(0, 0)) : H.cwiseAbs().rowwise().sum().maxCoeff();
    }
    mean_top /= ne;
    const double floor = std::max(1e-8 * mean_top, 1e-300);

    std::fill(metric_.valuePtr(), metric_.valuePtr() + metric_.nonZeros(), 0.0);
    for (int e = 0; e < ne; ++e) {
      Eigen::MatrixXd& H = hs[e];
      if (d == 1) {
        H(0, 0) = std::max(H(0, 0), floor);
      } else {
        eig.compute(H);
        const Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(floor);
        H = eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
      }
      const auto& c = coef_[n_ == 2 ? e % 2 : 0];
      for (int ka = 0; ka < npe_; ++ka)
        for (int ca = 0; ca < m_; ++ca)
          for (int kb = 0; kb < npe_; ++kb)
            for (int cb = 0; cb < m_; ++cb) {
              const int slot = slots_[(static_cast<std::size_t>(e) * L + ka * m_ + ca) * L + kb * m_ + cb];
              if (slot < 0) continue;
              double v = 0.0;
              for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j) v += c[ka][i] * H(i * m_ + ca, j * m_ + cb) * c[kb][j];
              metric_.valuePtr()[slot] += vol_ * v;
            }
    }
    // rows with no element contribution cannot occur on a valid mesh; keep the diagonal positive anyway
    for (int slot : diag_) {
      if (!(metric_.valuePtr()[slot] > 0.0)) metric_.valuePtr()[slot] = floor * vol_;
    }
    solver_.factorize(metric_);
    return solver_.info() == Eigen::Success;
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return solver_.solve(rhs); }

  int dof(int node, int c) const { return dof_[static_cast<std::size_t>(node) * m_ + c]; }
  const std::vector<int>& dofs() const { return dof_; }

 private:
  int dof_at(int e, int l) const { return dof_[static_cast<std::size_t>(nodes_[e][l / m_]) * m_ + l % m_]; }

  const Integrand& f_;
  const Mesh& mesh_;
  int n_, m_, npe_;
  const DiscreteField* source_;
  double coef_[2][3][2] = {};
  std::vector<int> dof_;
  int ndof_ = 0;
  std::vector<std::array<int, 3>> nodes_;
  std::vector<Point> bary_;
  double vol_ = 0.0;
  SpMat metric_;
  std::vector<int> slots_;
  std::vector<int> diag_;
  Eigen::SimplicialLDLT<SpMat> solver_;
};

std::vector<double> norm_exponents(const GrowthParams& g) {
  std::vector<double> e{1.0, 2.0, g.p, g.q};
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end()), e.end());
  return e;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  CompensatedSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s.value();
}

}  // namespace

DiscreteField boundary_interpolant(const Mesh& mesh, const VectorFunction& g) {
  return blend_interior(apply_boundary(DiscreteField(mesh, g.components()), g));
}

std::vector<double> energy_gradient(const Integrand& f, const DiscreteField& u,
                                    const std::optional<DiscreteField>& source) {
  Problem pb(f, u.mesh(), u.components(), source ? &*source : nullptr);
  return pb.gradient(u.values());
}

double el_residual(const Integrand& f, const DiscreteField& u, const std::optional<DiscreteField>& source) {
  Problem pb(f, u.mesh(), u.components(), source ? &*source : nullptr);
  return pb.residual(pb.gradient(u.values()));
}

namespace {

// Residual level set by cancellation among element fluxes of size |dF|, scaled like the residual.
double roundoff_floor(const Integrand& f, const DiscreteField& u, const DiscreteField* source) {
  const Mesh& mesh = u.mesh();
  double flux = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    flux = std::max(flux, f.gradient(mesh.barycenter(e), u.element_gradient(e)).norm());
  }
  double hmin = mesh.h(0);
  for (int a = 1; a < mesh.dim(); ++a) hmin = std::min(hmin, mesh.h(a));
  double src = 0.0;
  if (source) {
    for (double v : source->values()) src = std::max(src, std::abs(v));
  }
  return 1e3 * std::numeric_limits<double>::epsilon() * ((1.0 + flux) / hmin + src);
}

}  // namespace

SolveResult minimize(const Integrand& f, const Mesh& mesh, const VectorFunction& g,
                     const std::optional<DiscreteField>& source, double epsilon, const SolveOptions& opts) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("minimize: epsilon must be >= 0");
  if (!(opts.tol > 0.0) || opts.max_iter < 0) throw InvalidArgument("minimize: bad tolerance or iteration cap");
  if (g.components() != f.params().m) throw InvalidArgument("minimize: datum has the wrong number of components");
  if (f.params().n != mesh.dim()) throw InvalidArgument("minimize: integrand dimension differs from the mesh");

  const Integrand fe = epsilon > 0.0 ? regularize(f, epsilon) : f;
  Problem pb(fe, mesh, g.components(), source ? &*source : nullptr);

  const DiscreteField cold = boundary_interpolant(mesh, g);
  DiscreteField u = cold;
  if (opts.initial) {
    if (!(opts.initial->mesh() == mesh) || opts.initial->components() != g.components()) {
      throw InvalidArgument("minimize: initial field lives on a different mesh");
    }
    u = apply_boundary(*opts.initial, g);
  } else if (opts.random_seed) {
    std::mt19937_64 rng(*opts.random_seed);
    std::uniform_real_distribution<double> dist(-opts.random_amplitude, opts.random_amplitude);
    for (int k = 0; k < mesh.node_count(); ++k) {
      if (mesh.is_boundary(k)) continue;
      for (int c = 0; c < u.components(); ++c) u(k, c) += dist(rng);
    }
  }

  SolveReport rep;
  rep.epsilon = epsilon;
  rep.reference_residual = pb.residual(pb.gradient(cold.values()));

  std::vector<double>& x = u.values();
  double E = pb.energy(x);
  std::vector<double> grad = pb.gradient(x);
  double res = pb.residual(grad);
  if (opts.record_trace) {
    rep.energy_trace.push_back(E);
    rep.residual_trace.push_back(res);
  }
  const double target =
      std::max(opts.tol * rep.reference_residual, roundoff_floor(fe, cold, source ? &*source : nullptr));
  auto done = [&] { return res <= target || res == 0.0; };

  Eigen::VectorXd rhs(pb.ndof());
  std::vector<double> dir(x.size(), 0.0), trial(x.size());
  const auto& dofs = pb.dofs();
  int it = 0;
  for (; it < opts.max_iter && !done(); ++it) {
    for (std::size_t i = 0; i < dofs.size(); ++i)
      if (dofs[i] >= 0) rhs[dofs[i]] = -grad[i];
    bool have_metric = pb.factor_metric(x);
    if (have_metric) {
      const Eigen::VectorXd d = pb.solve(rhs);
      have_metric = d.allFinite();
      for (std::size_t i = 0; i < dofs.size(); ++i) dir[i] = dofs[i] >= 0 ? d[dofs[i]] : 0.0;
    }
    double slope = have_metric ? dot(grad, dir) : 0.0;
    if (!(slope < 0.0)) {
      for (std::size_t i = 0; i < dofs.size(); ++i) dir[i] = dofs[i] >= 0 ? -grad[i] : 0.0;
      slope = dot(grad, dir);
    }

    double alpha = 1.0;
    bool accepted = false;
    bool ascent_everywhere = true;
    double e_trial = E;
    for (int ls = 0; ls < 60; ++ls, alpha *= opts.shrink) {
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + alpha * dir[i];
      e_trial = pb.energy(trial);
      if (e_trial <= E) ascent_everywhere = false;
      if (e_trial <= E + opts.armijo * alpha * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Energy differences have reached round-off: take the full step if it lowers the residual.
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + dir[i];
      e_trial = pb.energy(trial);
      const std::vector<double> gt = pb.gradient(trial);
      const double rt = pb.residual(gt);
      if (rt < res && e_trial <= E + 1e-12 * (1.0 + std::abs(E))) {
        x.swap(trial);
        E = e_trial;
        grad = gt;
        res = rt;
        if (opts.record_trace) {
          rep.energy_trace.push_back(E);
          rep.residual_trace.push_back(res);
        }
        continue;
      }
      if (ascent_everywhere && -slope > 1e-6 * (1.0 + std::abs(E))) {
        throw DiagnosticsError("line search met ascent along a descent direction; the integrand may be non-convex");
      }
      rep.message = "line search stalled";
      break;
    }
    x.swap(trial);
    E = e_trial;
    grad = pb.gradient(x);
    res = pb.residual(grad);
    if (opts.record_trace) {
      rep.energy_trace.push_back(E);
      rep.residual_trace.push_back(res);
    }
  }

  rep.iterations = it;
  rep.energy = E;
  rep.el_residual = res;
  rep.relative_residual = rep.reference_residual > 0.0 ? res / rep.reference_residual : 0.0;
  rep.converged = done();
  if (rep.converged) {
    rep.message = "converged";
  } else if (rep.message.empty()) {
    rep.message = "iteration cap reached";
  }
  rep.norms = norm_ladder(u, norm_exponents(f.params()));
  return {u, rep};
}

DualNormCheck dual_norm_check(const Integrand& f, const DiscreteField& u, const std::optional<DiscreteField>& source,
                              const VectorFunction& g) {
  const Mesh& mesh = u.mesh();
  const double q = f.params().q;
  const double qd = q / (q - 1.0);
  DualNormCheck r;
  CompensatedSum num;
  for (int e = 0; e < mesh.element_count(); ++e) {
    num += std::pow(f.gradient(mesh.barycenter(e), u.element_gradient(e)).norm(), qd);
  }
  r.numerator = num.value() * mesh.element_volume();
  const DiscreteField gh = interpolate(mesh, g);
  double rhs = 1.0 + std::pow(lp_norm(gh, q), q) + std::pow(lp_norm(gradient(gh), q), q);
  if (source) rhs += std::pow(lp_norm(*source, qd), qd);
  r.rhs = rhs;
  r.ratio = r.numerator / r.rhs;
  return r;
}

double extrapolate_to_zero(const std::vector<double>& eps, const std::vector<double>& values) {
  if (eps.size() != values.size() || eps.empty()) throw InvalidArgument("extrapolate_to_zero: bad input");
  const std::size_t k = std::min<std::size_t>(3, eps.size());
  const std::size_t off = eps.size() - k;
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double w = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (j != i) w *= (0.0 - eps[off + j]) / (eps[off + i] - eps[off + j]);
    }
    total += w * values[off + i];
  }
  return total;
}

std::vector<double> default_schedule(const Integrand& f, const Mesh& mesh, const VectorFunction& g, int k0, int k1) {
  if (k1 < k0) throw InvalidArgument("default_schedule: empty range");
  const double q = f.params().q;
  const double scale = 1.0 + std::pow(lp_norm(gradient(boundary_interpolant(mesh, g)), q), q);
  std::vector<double> eps;
  for (int k = k0; k <= k1; ++k) eps.push_back(std::ldexp(1.0, -k) / scale);
  return eps;
}

PathResult regularization_path(const Integrand& f, const Mesh& mesh, const VectorFunction& g,
                               const std::optional<DiscreteField>& source, const std::vector<double>& epsilons,
                               const SolveOptions& opts) {
  if (epsilons.empty()) throw InvalidArgument("regularization_path: empty schedule");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0) || (i > 0 && !(epsilons[i] < epsilons[i - 1]))) {
      throw InvalidArgument("regularization_path: schedule must be positive and strictly decreasing");
    }
  }
  const GrowthParams& gp = f.params();
  const double beta = 0.5 * gp.alpha;
  const double target = gp.n * gp.p / (gp.n - beta);

  PathResult out;
  SolveOptions o = opts;
  for (double eps : epsilons) {
    try {
      SolveResult s = minimize(f, mesh, g, source, eps, o);
      PathEntry entry;
      entry.epsilon = eps;
      entry.report = s.report;
      entry.dual_ratio = dual_norm_check(regularize(f, eps), s.u, source, g).ratio;
      entry.apriori_norm = lp_norm(gradient(s.u), target);
      out.report.entries.push_back(entry);
      o.initial = s.u;
      out.fields.push_back(std::move(s.u));
    } catch (const std::exception& ex) {
      out.report.failed = true;
      out.report.failure = ex.what();
      break;
    }
  }
  std::vector<double> es, en;
  for (const auto& e : out.report.entries) {
    es.push_back(e.epsilon);
    en.push_back(e.report.energy);
  }
  if (!es.empty()) out.report.limit_energy = extrapolate_to_zero(es, en);
  for (std::size_t k = 0; k + 1 < out.fields.size(); ++k) {
    DiscreteField diff = out.fields[k + 1];
    for (std::size_t i = 0; i < diff.values().size(); ++i) diff.values()[i] -= out.fields[k].values()[i];
    out.report.cauchy_defects.push_back(lp_norm(gradient(diff), gp.p));
  }
  return out;
}

}  // namespace pqlab
