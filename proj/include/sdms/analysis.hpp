#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdms/coupling.hpp"

namespace sdms {

class InsufficientResolutionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Taylor-Hood (Ω_f, step 1/n_s) + P2 head (Ω_p, step 1/n_d) monolithic reference.
/// n_d must be a multiple of n_s so the Darcy interface edges nest in the Stokes ones.
struct ReferenceConfig {
  CoefficientPtr k;
  StokesParams stokes;
  StokesData stokes_data;
  /// Names `stokes_data` for the cache key.
  std::string data_id = "cavity";
  ScalarSource source;
  int n_s = 256;
  int n_d = 512;
  Diagonal diagonal = Diagonal::NE;
  double tol = 1e-10;
  int max_iter = 3000;
  int restart = 40;
};

std::uint64_t reference_hash(const ReferenceConfig& cfg);

/// Block-preconditioned GMRES on the coupled system: multigrid V-cycles on the
/// velocity and head blocks, scaled lumped pressure mass on the pressure block.
CoupledSolution reference_solve(const ReferenceConfig& cfg);

/// Loads `<dir>/reference_<hash>.sdrf` when present, otherwise solves and writes it.
CoupledSolution cached_reference(const ReferenceConfig& cfg, const std::string& dir, bool* hit = nullptr);

std::string reference_cache_path(const ReferenceConfig& cfg, const std::string& dir);
void save_reference(const ReferenceConfig& cfg, const CoupledSolution& sol, const std::string& path);
CoupledSolution load_reference(const ReferenceConfig& cfg, const std::string& path);

/// Continuous P2 head on a Darcy mesh.
class P2HeadField : public HeadField {
 public:
  P2HeadField(std::shared_ptr<const TriMesh> mesh, std::shared_ptr<const P2DofMap> dofs, Vector values);
  Sample eval(Point p, double tol = 1e-10) const override;
  Sample eval_in(int tri, const std::array<double, 3>& bary) const override;
  const TriMesh& mesh() const override { return *mesh_; }
  const Vector& values() const { return values_; }

 private:
  std::shared_ptr<const TriMesh> mesh_;
  std::shared_ptr<const P2DofMap> dofs_;
  Vector values_;
};

/// P2 Darcy operators: (K∇φ,∇ψ), (g_p,ψ), darcy_exterior mask.
struct P2DarcyOperators {
  SparseMatrix stiffness;
  Vector load;
  std::vector<bool> dirichlet;
};
P2DarcyOperators assemble_p2_darcy(const TriMesh& mesh, const P2DofMap& dofs, const CoefficientField& k,
                                   const ScalarSource& source = {});

struct ErrorReport {
  double u_l2 = 0, u_h1 = 0, u_h1_semi = 0;
  double phi_l2 = 0, phi_h1 = 0, phi_h1_semi = 0;
  double h = 0;
  std::string mode;
};

/// Integrates over the reference elements (subdivided when the numerical field is
/// piecewise polynomial on a finer grid); the numerical solution is located pointwise.
ErrorReport error_norms(const CoupledSolution& numerical, const CoupledSolution& reference, int workers = 1);

/// log(e_{i-1}/e_i)/log(h_{i-1}/h_i); empty where an error is zero.
std::vector<std::optional<double>> convergence_orders(std::span<const double> errors, std::span<const double> hs);

}  // namespace sdms
