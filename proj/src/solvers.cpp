#include "certopt/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace certopt {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

/// Interior restriction helpers shared by the state and KKT solvers.
struct InteriorMap {
  std::vector<int> nodes;  // interior vertex ids
  std::vector<int> index;  // vertex -> interior position or -1

  explicit InteriorMap(const Mesh& mesh) : nodes(mesh.interior_vertices()), index(mesh.interior_index()) {}

  Eigen::Index size() const { return static_cast<Eigen::Index>(nodes.size()); }

  Vector restrict(const Vector& full) const {
    Vector out(size());
    for (Eigen::Index i = 0; i < size(); ++i) out[i] = full[nodes[i]];
    return out;
  }

  Vector extend(const Eigen::Ref<const Vector>& interior, Eigen::Index full_size) const {
    Vector out = Vector::Zero(full_size);
    for (Eigen::Index i = 0; i < size(); ++i) out[nodes[i]] = interior[i];
    return out;
  }

  /// Appends scale * full(I, I) at block offset (row0, col0).
  void add_block(Triplets& t, const SparseMatrix& full, double scale, Eigen::Index row0,
                 Eigen::Index col0) const {
    for (int k = 0; k < full.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(full, k); it; ++it) {
        const int r = index[it.row()];
        const int c = index[it.col()];
        if (r >= 0 && c >= 0) t.emplace_back(row0 + r, col0 + c, scale * it.value());
      }
    }
  }

  SparseMatrix restrict(const SparseMatrix& full) const {
    Triplets t;
    add_block(t, full, 1.0, 0, 0);
    SparseMatrix out(size(), size());
    out.setFromTriplets(t.begin(), t.end());
    return out;
  }
};

/// Residual-norm halving line search. Returns false if no trial step
/// decreased the merit; the caller then takes the full step.
template <class Merit>
bool halving_line_search(Vector& z, const Vector& dz, double merit0, int max_halvings, Merit&& merit) {
  double lambda = 1.0;
  for (int k = 0; k <= max_halvings; ++k) {
    const Vector trial = z + lambda * dz;
    const double m = merit(trial);
    if (std::isfinite(m) && m <= (1.0 - 1e-4 * lambda) * merit0) {
      z = trial;
      return true;
    }
    lambda *= 0.5;
  }
  z += dz;
  return false;
}

/// Discrete first-order system in the unknowns z = [y_I; p_I; mu_I].
class OptimalitySystem {
 public:
  OptimalitySystem(const ProblemSpec& spec, const Mesh& mesh, double pdas_c)
      : spec_(spec),
        mesh_(mesh),
        interior_(mesh),
        stiffness_(assemble_stiffness(mesh)),
        mass_(assemble_mass(mesh)),
        lumped_(interior_.restrict(lumped_mass(mesh))),
        desired_load_(interior_.restrict(smooth_load(mesh, spec.desired_state))),
        c_(pdas_c) {
    stiffness_ii_ = interior_.restrict(stiffness_);
    mass_ii_ = interior_.restrict(mass_);
    if (spec.state) {
      lower_.resize(interior_.size());
      upper_.resize(interior_.size());
      for (Eigen::Index i = 0; i < interior_.size(); ++i) {
        const Point x = mesh.vertex(interior_.nodes[i]);
        lower_[i] = spec.state->lower(x);
        upper_[i] = spec.state->upper(x);
      }
    }
  }

  Eigen::Index unknowns() const { return interior_.size() * (state_constrained() ? 3 : 2); }
  Eigen::Index nodes() const { return interior_.size(); }
  bool state_constrained() const { return spec_.state.has_value(); }

  Vector pack(const KKTSolution& sol) const {
    const Eigen::Index n = nodes();
    Vector z(unknowns());
    z.segment(0, n) = interior_.restrict(sol.y);
    z.segment(n, n) = interior_.restrict(sol.p);
    if (state_constrained()) z.segment(2 * n, n) = interior_.restrict(sol.mu);
    return z;
  }

  KKTSolution unpack(const Vector& z) const {
    const Eigen::Index n = nodes();
    const Eigen::Index full = mesh_.vertex_count();
    KKTSolution sol;
    sol.y = interior_.extend(z.segment(0, n), full);
    sol.p = interior_.extend(z.segment(n, n), full);
    sol.mu = state_constrained() ? interior_.extend(z.segment(2 * n, n), full) : Vector::Zero(full);
    return sol;
  }

  /// -1 lower active, +1 upper active, 0 inactive.
  std::vector<signed char> active_set(const Vector& z) const {
    std::vector<signed char> s;
    if (!state_constrained()) return s;
    const Eigen::Index n = nodes();
    s.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double y = z[i];
      const double mu = z[2 * n + i];
      if (mu + c_ * (y - upper_[i]) > 0.0) {
        s[i] = 1;
      } else if (mu + c_ * (y - lower_[i]) < 0.0) {
        s[i] = -1;
      } else {
        s[i] = 0;
      }
    }
    return s;
  }

  /// Residual blocks; `control` receives the clamped-control data when the
  /// control is box constrained.
  Vector residual(const Vector& z, ClampedControl* control = nullptr) const {
    const Eigen::Index n = nodes();
    const Eigen::Index full = mesh_.vertex_count();
    const auto y = z.segment(0, n);
    const auto p = z.segment(n, n);
    const Nonlinearity& nl = spec_.nonlinearity;

    Vector phi(n), phi_y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      phi[i] = nl.phi(y[i]);
      phi_y[i] = nl.phi_y(y[i]);
    }

    Vector control_load;
    if (spec_.has_control_bounds()) {
      ClampedControl cc = clamped_control(mesh_, interior_.extend(p, full), spec_.alpha, spec_.control,
                                          control != nullptr);
      control_load = interior_.restrict(cc.load);
      if (control) *control = std::move(cc);
    } else {
      control_load = -(mass_ii_ * p) / spec_.alpha;
    }

    Vector f(unknowns());
    f.segment(0, n) = stiffness_ii_ * y + lumped_.cwiseProduct(phi) - control_load;
    f.segment(n, n) = stiffness_ii_ * p + lumped_.cwiseProduct(phi_y).cwiseProduct(p) - mass_ii_ * y +
                      desired_load_;
    if (state_constrained()) {
      const auto mu = z.segment(2 * n, n);
      f.segment(n, n) -= mu;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double up = mu[i] + c_ * (y[i] - upper_[i]);
        const double lo = mu[i] + c_ * (y[i] - lower_[i]);
        f[2 * n + i] = mu[i] - std::max(0.0, up) - std::min(0.0, lo);
      }
    }
    return f;
  }

  SparseMatrix jacobian(const Vector& z, const ClampedControl* control,
                        const std::vector<signed char>& active) const {
    const Eigen::Index n = nodes();
    const auto y = z.segment(0, n);
    const auto p = z.segment(n, n);
    const Nonlinearity& nl = spec_.nonlinearity;

    Triplets t;
    t.reserve(static_cast<std::size_t>(30 * n));
    interior_.add_block(t, stiffness_, 1.0, 0, 0);
    interior_.add_block(t, stiffness_, 1.0, n, n);
    interior_.add_block(t, mass_, -1.0, n, 0);
    const SparseMatrix& coupling = (spec_.has_control_bounds() && control) ? control->free_mass : mass_;
    interior_.add_block(t, coupling, 1.0 / spec_.alpha, 0, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = lumped_[i] * nl.phi_y(y[i]);
      t.emplace_back(i, i, d);
      t.emplace_back(n + i, n + i, d);
      t.emplace_back(n + i, i, lumped_[i] * nl.phi_yy(y[i]) * p[i]);
    }
    if (state_constrained()) {
      for (Eigen::Index i = 0; i < n; ++i) {
        t.emplace_back(n + i, 2 * n + i, -1.0);
        if (active[i] != 0) {
          t.emplace_back(2 * n + i, i, -c_);
        } else {
          t.emplace_back(2 * n + i, 2 * n + i, 1.0);
        }
      }
    }
    SparseMatrix jac(unknowns(), unknowns());
    jac.setFromTriplets(t.begin(), t.end());
    return jac;
  }

  KKTResidual split_residual(const Vector& f) const {
    const Eigen::Index n = nodes();
    KKTResidual r;
    r.state = f.segment(0, n).lpNorm<Eigen::Infinity>();
    r.adjoint = f.segment(n, n).lpNorm<Eigen::Infinity>();
    if (state_constrained()) r.complementarity = f.segment(2 * n, n).lpNorm<Eigen::Infinity>();
    return r;
  }

 private:
  const ProblemSpec& spec_;
  const Mesh& mesh_;
  InteriorMap interior_;
  SparseMatrix stiffness_;
  SparseMatrix mass_;
  SparseMatrix stiffness_ii_;
  SparseMatrix mass_ii_;
  Vector lumped_;
  Vector desired_load_;
  Vector lower_;
  Vector upper_;
  double c_;
};

double sup_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

}  // namespace

Vector solve_state(const Mesh& mesh, const Nonlinearity& nl, const Vector& load,
                   const SolverOptions& options, int* iterations) {
  if (load.size() != mesh.vertex_count()) {
    throw std::invalid_argument("solve_state: load vector length does not match mesh");
  }
  const InteriorMap interior(mesh);
  const SparseMatrix a = interior.restrict(assemble_stiffness(mesh));
  const Vector m = interior.restrict(lumped_mass(mesh));
  const Vector b = interior.restrict(load);
  const Eigen::Index n = interior.size();

  auto residual = [&](const Vector& y) {
    Vector phi(n);
    for (Eigen::Index i = 0; i < n; ++i) phi[i] = nl.phi(y[i]);
    return Vector(a * y + m.cwiseProduct(phi) - b);
  };

  Vector y = Vector::Zero(n);
  SolveDiagnostics diag;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  for (int it = 0; it <= options.max_iterations; ++it) {
    const Vector f = residual(y);
    diag.state_residual = sup_norm(f);
    if (diag.state_residual <= options.tolerance) {
      diag.converged = true;
      diag.newton_iterations = it;
      break;
    }
    if (it == options.max_iterations) break;
    SparseMatrix jac = a;
    for (Eigen::Index i = 0; i < n; ++i) jac.coeffRef(i, i) += m[i] * nl.phi_y(y[i]);
    ldlt.compute(jac);
    if (ldlt.info() != Eigen::Success) {
      diag.newton_iterations = it;
      throw SolverFailure("solve_state: Jacobian factorization failed", diag);
    }
    const Vector dy = ldlt.solve(-f);
    if (!halving_line_search(y, dy, f.norm(), options.max_halvings,
                             [&](const Vector& trial) { return residual(trial).norm(); })) {
      ++diag.line_search_failures;
    }
  }
  if (!diag.converged) {
    diag.newton_iterations = options.max_iterations;
    throw SolverFailure("solve_state: no convergence, residual " + std::to_string(diag.state_residual),
                        diag);
  }
  if (iterations) *iterations = diag.newton_iterations;
  return interior.extend(y, mesh.vertex_count());
}

double objective(const ProblemSpec& spec, const Mesh& mesh, const KKTSolution& sol) {
  if (sol.y.size() != mesh.vertex_count() || sol.p.size() != mesh.vertex_count()) {
    throw std::invalid_argument("objective: solution does not live on this mesh");
  }
  const double tracking = smooth_l2_error_sq(mesh, sol.y, spec.desired_state);
  const double control = clamped_control_sq_norm(mesh, sol.p, spec.alpha, spec.control);
  return 0.5 * tracking + 0.5 * spec.alpha * control;
}

KKTSolution solve_kkt(const ProblemSpec& spec, const Mesh& mesh, const std::optional<KKTSolution>& init,
                      const SolverOptions& options) {
  spec.validate(mesh);
  const OptimalitySystem system(spec, mesh, options.pdas_c);

  Vector z = Vector::Zero(system.unknowns());
  if (init) {
    KKTSolution start = *init;
    if (start.mu.size() == 0) start.mu = Vector::Zero(mesh.vertex_count());
    if (start.y.size() != mesh.vertex_count() || start.p.size() != mesh.vertex_count() ||
        start.mu.size() != mesh.vertex_count()) {
      throw std::invalid_argument("solve_kkt: initial guess does not live on this mesh");
    }
    z = system.pack(start);
  }

  SolveDiagnostics diag;
  if (spec.experimental()) diag.note = "experimental: combined control and state bounds";
  Eigen::SparseLU<SparseMatrix> lu;
  std::vector<signed char> previous = system.active_set(z);
  ClampedControl control;

  for (int it = 0;; ++it) {
    const Vector f = system.residual(z, &control);
    const std::vector<signed char> active = system.active_set(z);
    if (active != previous) ++diag.active_set_changes;
    const double res = sup_norm(f);
    if (res <= options.tolerance && active == previous) {
      diag.converged = true;
      diag.newton_iterations = it;
      break;
    }
    if (!std::isfinite(res) || it == options.max_iterations) {
      diag.newton_iterations = it;
      const KKTResidual r = system.split_residual(f);
      diag.state_residual = r.state;
      diag.adjoint_residual = r.adjoint;
      diag.complementarity_residual = r.complementarity;
      throw SolverFailure("solve_kkt: no convergence after " + std::to_string(it) +
                              " iterations, residual " + std::to_string(res),
                          diag);
    }
    previous = active;

    lu.compute(system.jacobian(z, &control, active));
    if (lu.info() != Eigen::Success) {
      diag.newton_iterations = it;
      throw SolverFailure("solve_kkt: singular Newton system at iteration " + std::to_string(it), diag);
    }
    const Vector dz = lu.solve(-f);
    if (!halving_line_search(z, dz, f.norm(), options.max_halvings,
                             [&](const Vector& trial) { return system.residual(trial).norm(); })) {
      ++diag.line_search_failures;
    }
  }

  KKTSolution sol = system.unpack(z);
  const KKTResidual r = system.split_residual(system.residual(z));
  diag.state_residual = r.state;
  diag.adjoint_residual = r.adjoint;
  diag.complementarity_residual = r.complementarity;
  sol.diagnostics = diag;
  return sol;
}

KKTResidual kkt_residual(const ProblemSpec& spec, const Mesh& mesh, const KKTSolution& sol, double pdas_c) {
  const OptimalitySystem system(spec, mesh, pdas_c);
  KKTSolution s = sol;
  if (s.mu.size() == 0) s.mu = Vector::Zero(mesh.vertex_count());
  if (s.y.size() != mesh.vertex_count() || s.p.size() != mesh.vertex_count() ||
      s.mu.size() != mesh.vertex_count()) {
    throw std::invalid_argument("kkt_residual: solution does not live on this mesh");
  }
  return system.split_residual(system.residual(system.pack(s)));
}

OptimalityMap optimality_map(const ProblemSpec& spec, const Mesh& mesh, const KKTSolution& sol,
                             double pdas_c) {
  const OptimalitySystem system(spec, mesh, pdas_c);
  KKTSolution s = sol;
  if (s.mu.size() == 0) s.mu = Vector::Zero(mesh.vertex_count());
  const Vector z = system.pack(s);
  ClampedControl control;
  OptimalityMap out;
  out.residual = system.residual(z, &control);
  out.jacobian = system.jacobian(z, &control, system.active_set(z));
  return out;
}

std::vector<MultistartRun> multistart_probe(const ProblemSpec& spec, const Mesh& mesh, int k, double radius,
                                            std::uint64_t seed, const SolverOptions& options) {
  if (k < 1) throw std::invalid_argument("multistart_probe: k must be >= 1");
  if (!(radius >= 0.0)) throw std::invalid_argument("multistart_probe: radius must be >= 0");

  std::optional<KKTSolution> reference;
  try {
    reference = solve_kkt(spec, mesh, std::nullopt, options);
  } catch (const SolverFailure&) {
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-radius, radius);
  std::vector<MultistartRun> runs;
  runs.reserve(k);
  for (int r = 0; r < k; ++r) {
    MultistartRun run;
    KKTSolution start;
    start.y = Vector::Zero(mesh.vertex_count());
    start.p = Vector::Zero(mesh.vertex_count());
    start.mu = Vector::Zero(mesh.vertex_count());
    for (Eigen::Index j = 0; j < mesh.vertex_count(); ++j) {
      if (mesh.boundary[j]) continue;
      start.y[j] = radius > 0.0 ? dist(rng) : 0.0;
      start.p[j] = radius > 0.0 ? dist(rng) : 0.0;
    }
    run.start_y = start.y;
    run.start_p = start.p;
    try {
      const KKTSolution sol = solve_kkt(spec, mesh, start, options);
      run.converged = true;
      run.objective = objective(spec, mesh, sol);
      if (reference) {
        run.distance = std::max((sol.y - reference->y).lpNorm<Eigen::Infinity>(),
                                (sol.p - reference->p).lpNorm<Eigen::Infinity>());
      } else {
        run.distance = std::nan("");
      }
    } catch (const SolverFailure&) {
      run.converged = false;
      run.objective = std::nan("");
      run.distance = std::nan("");
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

}  // namespace certopt
