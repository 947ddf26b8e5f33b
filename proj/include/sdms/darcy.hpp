#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sdms/coefficients.hpp"
#include "sdms/elements.hpp"
#include "sdms/linalg.hpp"
#include "sdms/mesh.hpp"

namespace sdms {

/// Named scalar source term; `id` enters basis fingerprints.
struct ScalarSource {
  std::string id;
  std::function<double(double, double)> f;
  explicit operator bool() const { return static_cast<bool>(f); }
};

/// Multiscale basis on one coarse triangle: η_i solves the fine P1 discretization of
/// -div(K ∇η) = 0 in K with η = ψ_i on ∂K.
struct LocalBasis {
  int parent = -1;
  int m = 1;
  std::array<Vector, 3> eta;
  Mat3 stiffness{};
  std::array<double, 3> load{};

  std::size_t fine_vertex_count() const { return eta[0].size(); }
  bool operator==(const LocalBasis&) const = default;
};

struct BasisFingerprint {
  int n = 0;
  int m = 1;
  Rect rect;
  Diagonal diagonal = Diagonal::NE;
  double epsilon = 0.0;
  std::string coefficient_id;
  bool operator==(const BasisFingerprint&) const = default;
  std::string describe() const;
};

class BasisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FingerprintMismatchError : public BasisError {
 public:
  using BasisError::BasisError;
};

class BasisInvariantError : public BasisError {
 public:
  using BasisError::BasisError;
};

/// One LocalBasis per coarse triangle, ordered by triangle id.
struct MsBasisSet {
  BasisFingerprint fingerprint;
  std::vector<LocalBasis> elements;
  int m() const { return fingerprint.m; }
  bool operator==(const MsBasisSet&) const = default;
};

BasisFingerprint fingerprint_for(const TriMesh& mesh, const CoefficientField& coeff, int m,
                                 const ScalarSource& source = {});

LocalBasis compute_local_basis(const TriMesh& mesh, int tri_id, const CoefficientField& coeff, int m,
                               const ScalarSource& source = {});

/// Builds every element problem on `workers` threads. The result does not depend on `workers`.
MsBasisSet offline_build(const TriMesh& mesh, const CoefficientField& coeff, int m, int workers,
                         const ScalarSource& source = {});

/// Hat-function basis (M = 1): the FEM-FEM Darcy space through the same code path.
inline MsBasisSet p1_basis(const TriMesh& mesh, const CoefficientField& coeff, const ScalarSource& source = {}) {
  return offline_build(mesh, coeff, 1, 1, source);
}

/// Checks the LocalBasis invariants; returns the worst partition-of-unity and
/// boundary-trace deviations. Throws BasisInvariantError when `tol` is exceeded.
struct BasisAudit {
  double partition_of_unity = 0.0;
  double boundary_trace = 0.0;
  double corner_delta = 0.0;
  double stiffness_asymmetry = 0.0;
  double stiffness_row_sum = 0.0;
  double min_eta = 0.0;
  double max_eta = 0.0;
};
BasisAudit audit_basis(const MsBasisSet& set, double tol = 1e-11);

std::vector<std::uint8_t> serialize_basis(const MsBasisSet& set);
MsBasisSet deserialize_basis(std::span<const std::uint8_t> bytes);
void save_basis(const MsBasisSet& set, const std::string& path);
/// Loads and validates a basis cache. When `expected` is given the fingerprint must match.
MsBasisSet load_basis(const std::string& path, const BasisFingerprint* expected = nullptr);

/// Coarse Darcy operators assembled from a basis set (no boundary conditions applied).
struct DarcyOperators {
  SparseMatrix stiffness;        // (K ∇η_i, ∇η_j)
  SparseMatrix interface_mass;   // P1 trace mass on Γ
  SparseMatrix mass;             // (η_i, η_j) over Ω_p (composite)
  Vector load;                   // (g_p, η_i)
  std::vector<bool> dirichlet;   // darcy_exterior vertices
  InterfaceTrace trace;
};

DarcyOperators darcy_operators(const TriMesh& mesh, const MsBasisSet& basis);

struct LinearSystem {
  SparseMatrix matrix;
  Vector rhs;
};

/// Robin step: γ_p (K∇φ,∇ψ) + g (φ,ψ)_Γ = (η_p,ψ)_Γ + γ_p (g_p,ψ), with φ = 0 on darcy_exterior.
/// `eta_p` holds nodal values on the interface trace.
LinearSystem assemble_darcy(const DarcyOperators& ops, double g, double gamma_p, std::span<const double> eta_p);
/// Right-hand side only (matrix unchanged across Robin iterations).
Vector darcy_rhs(const DarcyOperators& ops, double gamma_p, std::span<const double> eta_p);

struct HeadSample {
  double value;
  Vec2 grad;
};

class HeadField {
 public:
  using Sample = HeadSample;
  virtual ~HeadField() = default;
  virtual Sample eval(Point p, double tol = 1e-10) const = 0;
  virtual Sample eval_in(int tri, const std::array<double, 3>& bary) const = 0;
  virtual const TriMesh& mesh() const = 0;
  /// Size of the cells on which the field is polynomial.
  virtual double resolution() const { return mesh().h(); }
};

/// Evaluates a Darcy head field given by coarse nodal coefficients.
class DarcyEvaluator : public HeadField {
 public:
  enum class Mode { composite, coarse_p1 };
  DarcyEvaluator(std::shared_ptr<const TriMesh> mesh, std::shared_ptr<const MsBasisSet> basis, Vector head,
                 Mode mode = Mode::composite);
  Sample eval(Point p, double tol = 1e-10) const override;
  Sample eval_in(int tri, const std::array<double, 3>& bary) const override;
  const Vector& head() const { return head_; }
  const TriMesh& mesh() const override { return *mesh_; }
  double resolution() const override { return mode_ == Mode::coarse_p1 ? mesh_->h() : mesh_->h() / basis_->m(); }
  const std::shared_ptr<const MsBasisSet>& basis() const { return basis_; }
  Mode mode() const { return mode_; }

 private:
  std::shared_ptr<const TriMesh> mesh_;
  std::shared_ptr<const MsBasisSet> basis_;
  Vector head_;
  Mode mode_;
  std::vector<P1Geometry> geometry_;
};

}  // namespace sdms
