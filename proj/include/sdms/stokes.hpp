#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "sdms/coefficients.hpp"
#include "sdms/elements.hpp"
#include "sdms/linalg.hpp"
#include "sdms/mesh.hpp"

namespace sdms {

struct StokesParams {
  double nu = 1.0;
  double alpha = 1.0;
  double g = 1.0;
  double gamma_f = 0.1;
  /// Tangential coefficient α instead of αν√2/√trace(Π).
  bool bjs_simplified = false;
};

using VectorField = std::function<Vec2(double, double)>;

/// Lid velocity (sin πx, 0).
Vec2 cavity_lid(double x, double y);

struct StokesData {
  VectorField body_force;
  /// Dirichlet velocity on lid and wall vertices (and on Γ when it is a wall).
  /// Empty means the cavity data: cavity_lid on the lid, zero on walls.
  VectorField boundary_velocity;
  /// Treat Γ as a no-slip wall; the pressure is then fixed at vertex 0.
  bool interface_as_wall = false;
  double pressure_pin = 0.0;
};

/// MINI unknowns: [ux hats, ux bubbles, uy hats, uy bubbles, p hats].
struct MiniLayout {
  int nv = 0, nt = 0;
  int ux(int v) const { return v; }
  int ux_bubble(int t) const { return nv + t; }
  int uy(int v) const { return nv + nt + v; }
  int uy_bubble(int t) const { return 2 * nv + nt + t; }
  int p(int v) const { return 2 * (nv + nt) + v; }
  int velocity_size() const { return 2 * (nv + nt); }
  int size() const { return 2 * (nv + nt) + nv; }
  std::string describe(int dof) const;
};

/// Taylor-Hood unknowns: [ux P2, uy P2, p P1].
struct TaylorHoodLayout {
  int n2 = 0, nv = 0;
  int ux(int d) const { return d; }
  int uy(int d) const { return n2 + d; }
  int p(int v) const { return 2 * n2 + v; }
  int velocity_size() const { return 2 * n2; }
  int size() const { return 2 * n2 + nv; }
};

/// Assembled Stokes block before Dirichlet elimination.
struct StokesBlocks {
  SparseMatrix matrix;
  Vector rhs;
  std::vector<bool> dirichlet;
  Vector dirichlet_values;
  /// L2 mass of velocity and pressure, embedded in the full unknown vector.
  SparseMatrix velocity_mass;
  SparseMatrix pressure_mass;
};

/// BJS coefficient at a point of Γ.
double bjs_coefficient(const StokesParams& p, const CoefficientField* k, double x, double y);

/// MINI assembly: 2ν(D(u),D(v)) − (p,∇·v) + (q,∇·u) + BJS on Γ (+ γ_f (u·n, v·n)_Γ when `robin`),
/// rhs (g_f, v). `k_gamma` supplies K on Γ for the BJS coefficient (K ≡ 1 when null).
StokesBlocks assemble_mini(const TriMesh& mesh, const MiniLayout& layout, const StokesParams& params,
                           const CoefficientField* k_gamma, const StokesData& data, bool robin);

StokesBlocks assemble_taylor_hood(const TriMesh& mesh, const P2DofMap& dofs, const TaylorHoodLayout& layout,
                                  const StokesParams& params, const CoefficientField* k_gamma, const StokesData& data);

/// Stokes step of the Robin-Robin iteration. The matrix is factored once; only the
/// interface load (η_f, v·n)_Γ changes between solves.
class StokesSystem {
 public:
  StokesSystem(std::shared_ptr<const TriMesh> mesh, const StokesParams& params, CoefficientPtr k_gamma,
               const StokesData& data = {});

  const TriMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const TriMesh>& mesh_ptr() const { return mesh_; }
  const MiniLayout& layout() const { return layout_; }
  const StokesParams& params() const { return params_; }
  const InterfaceTrace& trace() const { return trace_; }
  /// 1D P1 mass on the interface trace.
  const SparseMatrix& trace_mass() const { return trace_mass_; }
  /// Matrix after Dirichlet elimination.
  const SparseMatrix& matrix() const { return matrix_; }
  const StokesBlocks& blocks() const { return blocks_; }

  Vector rhs(std::span<const double> eta_f) const;
  Vector solve(std::span<const double> eta_f) const;
  /// u·n_f = −u_y at the interface trace nodes.
  Vector normal_velocity(std::span<const double> x) const;
  double velocity_norm_sq(std::span<const double> x) const;
  double pressure_norm_sq(std::span<const double> x) const;

 private:
  const SparseLu& factor() const;

  std::shared_ptr<const TriMesh> mesh_;
  StokesParams params_;
  CoefficientPtr k_gamma_;
  MiniLayout layout_;
  InterfaceTrace trace_;
  SparseMatrix trace_mass_;
  StokesBlocks blocks_;
  SparseMatrix matrix_;
  Vector base_rhs_;
  mutable std::unique_ptr<SparseLu> lu_;
};

struct FlowSample {
  Vec2 u;
  std::array<Vec2, 2> grad;  // grad[c] = ∇u_c
  double p;
};

class FlowField {
 public:
  using Sample = FlowSample;
  virtual ~FlowField() = default;
  virtual Sample eval(Point pt, double tol = 1e-10) const = 0;
  virtual Sample eval_in(int tri, const std::array<double, 3>& bary) const = 0;
  virtual const TriMesh& mesh() const = 0;
};

/// Pointwise evaluation of a MINI velocity/pressure vector.
class MiniField : public FlowField {
 public:
  MiniField(std::shared_ptr<const TriMesh> mesh, Vector x);
  Sample eval(Point pt, double tol = 1e-10) const override;
  Sample eval_in(int tri, const std::array<double, 3>& bary) const override;
  const Vector& dofs() const { return x_; }
  const TriMesh& mesh() const override { return *mesh_; }
  const MiniLayout& layout() const { return layout_; }

 private:
  std::shared_ptr<const TriMesh> mesh_;
  MiniLayout layout_;
  Vector x_;
  std::vector<P1Geometry> geometry_;
};

/// Pointwise evaluation of a Taylor-Hood velocity/pressure vector.
class TaylorHoodField : public FlowField {
 public:
  TaylorHoodField(std::shared_ptr<const TriMesh> mesh, std::shared_ptr<const P2DofMap> dofs, Vector x);
  Sample eval_in(int tri, const std::array<double, 3>& bary) const override;
  Sample eval(Point pt, double tol = 1e-10) const override;
  const Vector& dofs() const { return x_; }
  const TriMesh& mesh() const override { return *mesh_; }
  const TaylorHoodLayout& layout() const { return layout_; }

 private:
  std::shared_ptr<const TriMesh> mesh_;
  std::shared_ptr<const P2DofMap> dofs_;
  TaylorHoodLayout layout_;
  Vector x_;
  std::vector<P1Geometry> geometry_;
};

}  // namespace sdms
