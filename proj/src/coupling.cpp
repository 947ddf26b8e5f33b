#include "sdms/coupling.hpp"

#include <chrono>
#include <cstdio>
#include <cmath>
#include <ostream>
#include <thread>

namespace sdms {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void check_problem(const CoupledProblem& p) {
  if (!p.stokes_mesh || !p.darcy_mesh || !p.basis) throw std::invalid_argument("coupled problem is missing a mesh or basis");
  if (p.stokes_data.interface_as_wall) throw std::invalid_argument("coupled problem cannot treat the interface as a wall");
  if (!(p.gamma_p > 0.0)) throw std::invalid_argument("gamma_p must be positive");
  require_matching(interface_trace(*p.stokes_mesh), interface_trace(*p.darcy_mesh));
}

double mass_norm_sq(const SparseMatrix& m, const Vector& x) { return dot(x, m * x); }

Vector difference(const Vector& a, const Vector& b) {
  Vector d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

// Darcy Robin step with a factorization kept across iterations.
class DarcyStep {
 public:
  DarcyStep(const CoupledProblem& p) : ops_(darcy_operators(*p.darcy_mesh, *p.basis)), g_(p.stokes.g), gamma_p_(p.gamma_p) {
    const auto sys = assemble_darcy(ops_, g_, gamma_p_, Vector(ops_.trace.size(), 0.0));
    ldlt_ = std::make_unique<SparseLdlt>(sys.matrix);
  }
  Vector solve(const Vector& eta_p) const { return ldlt_->solve(darcy_rhs(ops_, gamma_p_, eta_p)); }
  Vector trace_values(const Vector& phi) const {
    Vector t(ops_.trace.size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = phi[ops_.trace.vertices[k]];
    return t;
  }
  const DarcyOperators& ops() const { return ops_; }

 private:
  DarcyOperators ops_;
  double g_, gamma_p_;
  std::unique_ptr<SparseLdlt> ldlt_;
};

CoupledSolution make_solution(const CoupledProblem& p, Vector stokes, Vector head) {
  CoupledSolution s;
  s.flow = std::make_shared<MiniField>(p.stokes_mesh, stokes);
  s.head = std::make_shared<DarcyEvaluator>(p.darcy_mesh, p.basis, head, p.eval_mode);
  s.stokes_dofs = std::move(stokes);
  s.head_dofs = std::move(head);
  return s;
}

}  // namespace

std::pair<CoupledSolution, RobinState> robin_robin_solve(const CoupledProblem& problem, const RobinOptions& options,
                                                         const RobinState* initial) {
  check_problem(problem);
  if (!(problem.stokes.gamma_f > 0.0)) throw std::invalid_argument("gamma_f must be positive");
  if (options.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");

  const StokesSystem stokes(problem.stokes_mesh, problem.stokes, problem.k, problem.stokes_data);
  const DarcyStep darcy(problem);
  const auto upd = RobinUpdate::from(problem.stokes.gamma_f, problem.gamma_p);
  const double g = problem.stokes.g;
  const std::size_t nt = stokes.trace().size();

  RobinState st;
  if (initial) {
    st.eta_f = initial->eta_f;
    st.eta_p = initial->eta_p;
    if (st.eta_f.size() != nt || st.eta_p.size() != nt) throw std::invalid_argument("initial Robin state has the wrong trace size");
  } else {
    st.eta_f.assign(nt, 0.0);
    st.eta_p.assign(nt, 0.0);
  }
  Vector u(stokes.layout().size(), 0.0), phi(darcy.ops().stiffness.rows(), 0.0);
  const auto& mass_p = darcy.ops().mass;
  // Stokes solves are factored lazily; force the factorization before timing starts.
  (void)stokes.solve(st.eta_f);

  SolveInfo info;
  info.method = options.ordering == RobinOrdering::jacobi ? "robin-robin-jacobi" : "robin-robin-gauss-seidel";
  for (int it = 1;; ++it) {
    Vector u_new, phi_new;
    double ts = 0, td = 0;
    Vector eta_f_next(nt), eta_p_next(nt);
    if (options.ordering == RobinOrdering::jacobi) {
      if (options.workers >= 2) {
        std::jthread worker([&] {
          const auto t0 = Clock::now();
          phi_new = darcy.solve(st.eta_p);
          td = seconds_since(t0);
        });
        const auto t0 = Clock::now();
        u_new = stokes.solve(st.eta_f);
        ts = seconds_since(t0);
      } else {
        auto t0 = Clock::now();
        u_new = stokes.solve(st.eta_f);
        ts = seconds_since(t0);
        t0 = Clock::now();
        phi_new = darcy.solve(st.eta_p);
        td = seconds_since(t0);
      }
      const Vector un = stokes.normal_velocity(u_new);
      const Vector ph = darcy.trace_values(phi_new);
      for (std::size_t k = 0; k < nt; ++k) {
        eta_f_next[k] = upd.eta_f(st.eta_p[k], g * ph[k]);
        eta_p_next[k] = upd.eta_p(st.eta_f[k], un[k]);
      }
    } else {
      auto t0 = Clock::now();
      u_new = stokes.solve(st.eta_f);
      ts = seconds_since(t0);
      const Vector un = stokes.normal_velocity(u_new);
      for (std::size_t k = 0; k < nt; ++k) eta_p_next[k] = upd.eta_p(st.eta_f[k], un[k]);
      t0 = Clock::now();
      phi_new = darcy.solve(eta_p_next);
      td = seconds_since(t0);
      const Vector ph = darcy.trace_values(phi_new);
      for (std::size_t k = 0; k < nt; ++k) eta_f_next[k] = upd.eta_f(eta_p_next[k], g * ph[k]);
    }

    const Vector du = difference(u_new, u);
    const Vector dphi = difference(phi_new, phi);
    const double eps = stokes.velocity_norm_sq(du) + stokes.pressure_norm_sq(du) + mass_norm_sq(mass_p, dphi);
    u = std::move(u_new);
    phi = std::move(phi_new);
    st.k = it;
    st.history.push_back(eps);
    st.log.push_back({it, eps, ts, td});
    info.stokes_seconds += ts;
    info.darcy_seconds += td;

    st.eta_f = std::move(eta_f_next);
    st.eta_p = std::move(eta_p_next);
    if (eps <= options.eps_error) break;
    if (!std::isfinite(eps)) throw RobinConvergenceError("Robin-Robin iteration produced a non-finite update", st, true);
    if (it > 5 && eps > 10.0 * st.history[it - 6])
      throw RobinConvergenceError("Robin-Robin iteration diverging at k=" + std::to_string(it), st, true);
    if (it >= options.max_iter)
      throw RobinConvergenceError("Robin-Robin iteration did not reach eps_iter <= " + std::to_string(options.eps_error) +
                                      " in " + std::to_string(options.max_iter) + " iterations",
                                  st, false);
  }
  info.iterations = st.k;
  auto sol = make_solution(problem, std::move(u), std::move(phi));
  sol.info = info;
  return {std::move(sol), std::move(st)};
}

void write_iteration_log(std::ostream& os, const RobinState& state) {
  os << "k,eps_iter,stokes_solve_seconds,darcy_solve_seconds\n";
  char buf[160];
  for (const auto& r : state.log) {
    std::snprintf(buf, sizeof buf, "%d,%.6e,%.6f,%.6f\n", r.k, r.eps_iter, r.stokes_seconds, r.darcy_seconds);
    os << buf;
  }
}

MonolithicSystem monolithic_system(const CoupledProblem& problem) {
  check_problem(problem);
  const auto& sm = *problem.stokes_mesh;
  const MiniLayout lay{static_cast<int>(sm.num_vertices()), static_cast<int>(sm.num_triangles())};
  const auto sb = assemble_mini(sm, lay, problem.stokes, problem.k.get(), problem.stokes_data, false);
  const auto ops = darcy_operators(*problem.darcy_mesh, *problem.basis);
  const double g = problem.stokes.g;
  const int ns = lay.size();
  const int nd = ops.stiffness.rows();

  MonolithicSystem out;
  out.stokes_size = ns;
  CooAccumulator a(ns + nd, ns + nd);
  a.reserve(sb.matrix.nnz() + ops.stiffness.nnz() + 8 * sm.n());
  for (int r = 0; r < ns; ++r)
    for (int k = sb.matrix.row_ptr()[r]; k < sb.matrix.row_ptr()[r + 1]; ++k)
      a.add(r, sb.matrix.col_idx()[k], sb.matrix.values()[k]);
  for (int r = 0; r < nd; ++r)
    for (int k = ops.stiffness.row_ptr()[r]; k < ops.stiffness.row_ptr()[r + 1]; ++k)
      a.add(ns + r, ns + ops.stiffness.col_idx()[k], g * ops.stiffness.values()[k]);

  const auto st = interface_trace(sm);
  for (const auto& e : st.edges) {
    const auto me = edge_p1_mass(std::abs(st.coords[e[1]].x - st.coords[e[0]].x));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const int us = lay.uy(st.vertices[e[i]]);
        const int us_j = lay.uy(st.vertices[e[j]]);
        const int pd = ns + ops.trace.vertices[e[i]];
        const int pd_j = ns + ops.trace.vertices[e[j]];
        // +g(φ, v·n) with v·n = −v_y; −g(ψ, u·n) with u·n = −u_y
        a.add(us, pd_j, -g * me[i][j]);
        a.add(pd, us_j, g * me[i][j]);
      }
  }
  out.matrix = a.finalize();
  out.rhs.assign(ns + nd, 0.0);
  for (int i = 0; i < ns; ++i) out.rhs[i] = sb.rhs[i];
  for (int i = 0; i < nd; ++i) out.rhs[ns + i] = g * ops.load[i];
  out.dirichlet = sb.dirichlet;
  out.dirichlet.insert(out.dirichlet.end(), ops.dirichlet.begin(), ops.dirichlet.end());
  out.dirichlet_values = sb.dirichlet_values;
  out.dirichlet_values.resize(ns + nd, 0.0);
  return out;
}

CoupledSolution monolithic_solve(const CoupledProblem& problem) {
  auto sys = monolithic_system(problem);
  const auto t0 = Clock::now();
  apply_dirichlet(sys.matrix, sys.rhs, sys.dirichlet, sys.dirichlet_values);
  const Vector x = SparseLu(sys.matrix).solve(sys.rhs);
  const double secs = seconds_since(t0);
  auto sol = make_solution(problem, Vector(x.begin(), x.begin() + sys.stokes_size), Vector(x.begin() + sys.stokes_size, x.end()));
  sol.info.method = "monolithic";
  sol.info.iterations = 1;
  sol.info.stokes_seconds = secs;
  return sol;
}

double FluxTrace::integral() const {
  double s = 0.0;
  for (std::size_t i = 0; i < u_n.size(); ++i) s += weights[i] * u_n[i];
  return s;
}

FluxTrace interface_flux_trace(const CoupledSolution& solution) {
  const auto& m = solution.flow->mesh();
  const auto& q = quad_edge(3);
  FluxTrace out;
  for (const auto& e : m.boundary_edges()) {
    if (e.marker != BoundaryMarker::interface) continue;
    const Point pa = m.vertices()[e.a], pb = m.vertices()[e.b];
    const double len = std::hypot(pb.x - pa.x, pb.y - pa.y);
    for (std::size_t k = 0; k < q.size(); ++k) {
      const double s = q.points[k][1];
      const Point x{pa.x + s * (pb.x - pa.x), pa.y + s * (pb.y - pa.y)};
      out.points.push_back(x);
      out.weights.push_back(len * q.weights[k]);
      out.u_n.push_back(-solution.flow->eval(x).u[1]);
    }
  }
  return out;
}

double darcy_interface_flux(const CoupledSolution& solution, const CoefficientField& k) {
  const auto& m = solution.head->mesh();
  const auto& q = quad_edge(3);
  double total = 0.0;
  for (const auto& e : m.boundary_edges()) {
    if (e.marker != BoundaryMarker::interface) continue;
    const Point pa = m.vertices()[e.a], pb = m.vertices()[e.b];
    const double len = std::hypot(pb.x - pa.x, pb.y - pa.y);
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double s = q.points[i][1];
      const Point x{pa.x + s * (pb.x - pa.x), pa.y + s * (pb.y - pa.y)};
      total += len * q.weights[i] * k.eval(x.x, x.y) * solution.head->eval(x).grad[1];
    }
  }
  return total;
}

}  // namespace sdms
