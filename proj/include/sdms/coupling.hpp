#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "sdms/darcy.hpp"
#include "sdms/stokes.hpp"

namespace sdms {

/// Everything the coupled solvers need. `basis` is either p1_basis (FEM-FEM) or an
/// offline MsFEM basis (FEM-MsFEM); its load vector carries the Darcy source.
struct CoupledProblem {
  std::shared_ptr<const TriMesh> stokes_mesh;
  std::shared_ptr<const TriMesh> darcy_mesh;
  std::shared_ptr<const MsBasisSet> basis;
  CoefficientPtr k;
  StokesParams stokes;
  StokesData stokes_data;
  double gamma_p = 1.0;
  DarcyEvaluator::Mode eval_mode = DarcyEvaluator::Mode::composite;
};

struct SolveInfo {
  std::string method;
  int iterations = 0;
  double stokes_seconds = 0.0;
  double darcy_seconds = 0.0;
};

struct CoupledSolution {
  std::shared_ptr<const FlowField> flow;
  std::shared_ptr<const HeadField> head;
  Vector stokes_dofs;
  Vector head_dofs;
  SolveInfo info;
};

/// Robin update constants: η_f ← a η_p + b gφ, η_p ← c η_f + d u·n_f.
struct RobinUpdate {
  double a, b, c, d;
  static RobinUpdate from(double gamma_f, double gamma_p) {
    const double a = gamma_f / gamma_p;
    return {a, -1.0 - a, -1.0, gamma_f + gamma_p};
  }
  double eta_f(double eta_p, double g_phi) const { return a * eta_p + b * g_phi; }
  double eta_p(double eta_f, double u_n) const { return c * eta_f + d * u_n; }
};

enum class RobinOrdering { jacobi, gauss_seidel };

struct IterationRecord {
  int k;
  double eps_iter;
  double stokes_seconds;
  double darcy_seconds;
};

/// After a solve, η_f and η_p hold the data for the next iteration.
struct RobinState {
  Vector eta_f, eta_p;
  int k = 0;
  std::vector<double> history;
  std::vector<IterationRecord> log;
};

struct RobinOptions {
  double eps_error = 1e-10;
  int max_iter = 1000;
  RobinOrdering ordering = RobinOrdering::jacobi;
  /// With two or more workers the Jacobi subdomain solves run concurrently.
  int workers = 1;
};

class RobinConvergenceError : public ConvergenceError {
 public:
  RobinConvergenceError(const std::string& what, RobinState state, bool diverged)
      : ConvergenceError(what, state.k, state.history.empty() ? 0.0 : state.history.back()),
        state(std::move(state)),
        diverged(diverged) {}
  RobinState state;
  bool diverged;
};

std::pair<CoupledSolution, RobinState> robin_robin_solve(const CoupledProblem& problem, const RobinOptions& options,
                                                         const RobinState* initial = nullptr);

void write_iteration_log(std::ostream& os, const RobinState& state);

struct MonolithicSystem {
  SparseMatrix matrix;  // before Dirichlet elimination
  Vector rhs;
  std::vector<bool> dirichlet;
  Vector dirichlet_values;
  int stokes_size = 0;
};

MonolithicSystem monolithic_system(const CoupledProblem& problem);
CoupledSolution monolithic_solve(const CoupledProblem& problem);

/// u·n_f at 3-point Gauss points of every interface edge of the Stokes mesh.
struct FluxTrace {
  std::vector<Point> points;
  std::vector<double> weights;
  Vector u_n;
  double integral() const;
};

FluxTrace interface_flux_trace(const CoupledSolution& solution);

/// ∫_Γ K∇φ·n_p with n_p = (0, 1), gradients taken from the Darcy triangles below Γ.
double darcy_interface_flux(const CoupledSolution& solution, const CoefficientField& k);

}  // namespace sdms
