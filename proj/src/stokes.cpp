#include "sdms/stokes.hpp"

#include <cmath>
#include <numbers>

namespace sdms {

Vec2 cavity_lid(double x, double) { return {std::sin(std::numbers::pi * x), 0.0}; }

std::string MiniLayout::describe(int dof) const {
  if (dof < nv) return "ux at vertex " + std::to_string(dof);
  if (dof < nv + nt) return "ux bubble of triangle " + std::to_string(dof - nv);
  if (dof < 2 * nv + nt) return "uy at vertex " + std::to_string(dof - nv - nt);
  if (dof < 2 * (nv + nt)) return "uy bubble of triangle " + std::to_string(dof - 2 * nv - nt);
  return "p at vertex " + std::to_string(dof - 2 * (nv + nt));
}

double bjs_coefficient(const StokesParams& p, const CoefficientField* k, double x, double y) {
  if (p.bjs_simplified) return p.alpha;
  const double kv = k ? k->checked(x, y) : 1.0;
  const double trace_pi = 2.0 * p.nu * kv / p.g;
  return p.alpha * p.nu * std::numbers::sqrt2 / std::sqrt(trace_pi);
}

namespace {

void validate(const TriMesh& mesh, const StokesParams& params) {
  if (!(params.nu > 0.0)) throw std::invalid_argument("viscosity must be positive");
  if (!(params.g > 0.0)) throw std::invalid_argument("gravity must be positive");
  if (!(params.alpha >= 0.0)) throw std::invalid_argument("BJS coefficient must be non-negative");
  bool has_interface = false;
  for (const auto& e : mesh.boundary_edges()) has_interface |= e.marker == BoundaryMarker::interface;
  if (!has_interface) throw MeshError("Stokes mesh has no interface edges");
}

Vec2 boundary_value(const StokesData& data, BoundaryMarker marker, Point p) {
  if (data.boundary_velocity) return data.boundary_velocity(p.x, p.y);
  if (marker == BoundaryMarker::stokes_lid) return cavity_lid(p.x, p.y);
  return {0.0, 0.0};
}

bool is_dirichlet_edge(const StokesData& data, BoundaryMarker m) {
  return m == BoundaryMarker::stokes_lid || m == BoundaryMarker::stokes_wall ||
         (data.interface_as_wall && m == BoundaryMarker::interface);
}

// Marker order so that walls (and a walled Γ) overwrite lid values at shared corners.
int marker_rank(BoundaryMarker m) { return m == BoundaryMarker::stokes_lid ? 0 : 1; }

// Shared element loop. `vel_dofs(t)` returns the nb scalar velocity dofs of triangle t,
// `basis(t, l, grad_lambda)` returns values and gradients of the nb scalar functions.
template <int NB, class VelDofs, class Basis>
void assemble_volume(const TriMesh& mesh, int size, int n_scalar, int p_offset, const StokesParams& params,
                     const StokesData& data, VelDofs vel_dofs, Basis basis, CooAccumulator& a, CooAccumulator& mv,
                     CooAccumulator& mp, Vector& rhs) {
  (void)size;
  const auto& rule = quad_triangle(6);
  const double nu = params.nu;
  for (std::size_t ti = 0; ti < mesh.num_triangles(); ++ti) {
    const int t = static_cast<int>(ti);
    const auto c = mesh.corners(t);
    const auto geo = p1_gradients(c);
    const auto& tri = mesh.triangles()[t];
    const std::array<int, NB> d = vel_dofs(t);
    double kxx[NB][NB]{}, kyy[NB][NB]{}, kxy[NB][NB]{}, mass[NB][NB]{};
    double bx[NB][3]{}, by[NB][3]{};
    double fx[NB]{}, fy[NB]{};
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& l = rule.points[q];
      const double w = 2.0 * geo.area * rule.weights[q];
      const auto [val, grad] = basis(t, l, geo.grad);
      Vec2 f{0.0, 0.0};
      if (data.body_force) {
        const Point x = map_point(c, l);
        f = data.body_force(x.x, x.y);
      }
      for (int i = 0; i < NB; ++i) {
        for (int j = 0; j < NB; ++j) {
          const double gxx = grad[i][0] * grad[j][0], gyy = grad[i][1] * grad[j][1];
          kxx[i][j] += w * nu * (2.0 * gxx + gyy);
          kyy[i][j] += w * nu * (gxx + 2.0 * gyy);
          kxy[i][j] += w * nu * grad[i][1] * grad[j][0];
          mass[i][j] += w * val[i] * val[j];
        }
        for (int k = 0; k < 3; ++k) {
          bx[i][k] += w * l[k] * grad[i][0];
          by[i][k] += w * l[k] * grad[i][1];
        }
        fx[i] += w * f[0] * val[i];
        fy[i] += w * f[1] * val[i];
      }
    }
    for (int i = 0; i < NB; ++i) {
      const int ri = d[i], rj = n_scalar + d[i];
      for (int j = 0; j < NB; ++j) {
        a.add(ri, d[j], kxx[i][j]);
        a.add(rj, n_scalar + d[j], kyy[i][j]);
        a.add(ri, n_scalar + d[j], kxy[i][j]);
        a.add(rj, d[j], kxy[j][i]);
        mv.add(ri, d[j], mass[i][j]);
        mv.add(rj, n_scalar + d[j], mass[i][j]);
      }
      for (int k = 0; k < 3; ++k) {
        const int pk = p_offset + tri[k];
        a.add(ri, pk, -bx[i][k]);
        a.add(rj, pk, -by[i][k]);
        a.add(pk, ri, bx[i][k]);
        a.add(pk, rj, by[i][k]);
      }
      rhs[ri] += fx[i];
      rhs[rj] += fy[i];
    }
    const double pm = geo.area / 12.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) mp.add(p_offset + tri[i], p_offset + tri[j], pm * (i == j ? 2.0 : 1.0));
  }
}

}  // namespace

StokesBlocks assemble_mini(const TriMesh& mesh, const MiniLayout& layout, const StokesParams& params,
                           const CoefficientField* k_gamma, const StokesData& data, bool robin) {
  validate(mesh, params);
  const int n = layout.size();
  const int ns = layout.nv + layout.nt;
  CooAccumulator a(n, n), mv(n, n), mp(n, n);
  a.reserve(mesh.num_triangles() * 80);
  StokesBlocks out;
  out.rhs.assign(n, 0.0);
  auto dofs = [&](int t) {
    const auto& tri = mesh.triangles()[t];
    return std::array<int, 4>{tri[0], tri[1], tri[2], layout.nv + t};
  };
  auto basis = [](int, const std::array<double, 3>& l, const std::array<Vec2, 3>& gl) {
    std::pair<std::array<double, 4>, std::array<Vec2, 4>> r;
    for (int i = 0; i < 3; ++i) {
      r.first[i] = l[i];
      r.second[i] = gl[i];
    }
    r.first[3] = bubble_value(l);
    r.second[3] = bubble_gradient(l, gl);
    return r;
  };
  assemble_volume<4>(mesh, n, ns, layout.p(0), params, data, dofs, basis, a, mv, mp, out.rhs);

  const auto& er = quad_edge(3);
  for (const auto& e : mesh.boundary_edges()) {
    if (e.marker != BoundaryMarker::interface || data.interface_as_wall) continue;
    const Point pa = mesh.vertices()[e.a], pb = mesh.vertices()[e.b];
    const double len = std::hypot(pb.x - pa.x, pb.y - pa.y);
    const int v[2] = {e.a, e.b};
    for (std::size_t q = 0; q < er.size(); ++q) {
      const double s = er.points[q][1];
      const double phi[2] = {1.0 - s, s};
      const Point x{pa.x + s * (pb.x - pa.x), pa.y + s * (pb.y - pa.y)};
      const double w = len * er.weights[q];
      const double beta = bjs_coefficient(params, k_gamma, x.x, x.y);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          a.add(layout.ux(v[i]), layout.ux(v[j]), w * beta * phi[i] * phi[j]);
          if (robin) a.add(layout.uy(v[i]), layout.uy(v[j]), w * params.gamma_f * phi[i] * phi[j]);
        }
    }
  }
  if (data.interface_as_wall) a.add(layout.p(0), layout.p(0), 0.0);
  out.matrix = a.finalize();
  out.velocity_mass = mv.finalize();
  out.pressure_mass = mp.finalize();

  out.dirichlet.assign(n, false);
  out.dirichlet_values.assign(n, 0.0);
  for (int rank = 0; rank < 2; ++rank)
    for (const auto& e : mesh.boundary_edges()) {
      if (!is_dirichlet_edge(data, e.marker) || marker_rank(e.marker) != rank) continue;
      for (int v : {e.a, e.b}) {
        const Vec2 val = boundary_value(data, e.marker, mesh.vertices()[v]);
        out.dirichlet[layout.ux(v)] = out.dirichlet[layout.uy(v)] = true;
        out.dirichlet_values[layout.ux(v)] = val[0];
        out.dirichlet_values[layout.uy(v)] = val[1];
      }
    }
  if (data.interface_as_wall) {
    out.dirichlet[layout.p(0)] = true;
    out.dirichlet_values[layout.p(0)] = data.pressure_pin;
  }
  return out;
}

StokesBlocks assemble_taylor_hood(const TriMesh& mesh, const P2DofMap& dofs, const TaylorHoodLayout& layout,
                                  const StokesParams& params, const CoefficientField* k_gamma, const StokesData& data) {
  validate(mesh, params);
  const int n = layout.size();
  CooAccumulator a(n, n), mv(n, n), mp(n, n);
  a.reserve(mesh.num_triangles() * 200);
  StokesBlocks out;
  out.rhs.assign(n, 0.0);
  auto vel = [&](int t) { return dofs.cell[t]; };
  auto basis = [](int, const std::array<double, 3>& l, const std::array<Vec2, 3>& gl) {
    return std::make_pair(p2_values(l), p2_gradients(l, gl));
  };
  assemble_volume<6>(mesh, n, layout.n2, layout.p(0), params, data, vel, basis, a, mv, mp, out.rhs);

  const auto& er = quad_edge(3);
  const auto& edges = mesh.boundary_edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    if (e.marker != BoundaryMarker::interface || data.interface_as_wall) continue;
    const Point pa = mesh.vertices()[e.a], pb = mesh.vertices()[e.b];
    const double len = std::hypot(pb.x - pa.x, pb.y - pa.y);
    const int d[3] = {e.a, e.b, dofs.boundary_edge_dof[k]};
    for (std::size_t q = 0; q < er.size(); ++q) {
      const double s = er.points[q][1];
      const double phi[3] = {(1 - s) * (1 - 2 * s), s * (2 * s - 1), 4 * s * (1 - s)};
      const Point x{pa.x + s * (pb.x - pa.x), pa.y + s * (pb.y - pa.y)};
      const double w = len * er.weights[q] * bjs_coefficient(params, k_gamma, x.x, x.y);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a.add(layout.ux(d[i]), layout.ux(d[j]), w * phi[i] * phi[j]);
    }
  }
  if (data.interface_as_wall) a.add(layout.p(0), layout.p(0), 0.0);
  out.matrix = a.finalize();
  out.velocity_mass = mv.finalize();
  out.pressure_mass = mp.finalize();

  out.dirichlet.assign(n, false);
  out.dirichlet_values.assign(n, 0.0);
  auto set = [&](int d, Vec2 val) {
    out.dirichlet[layout.ux(d)] = out.dirichlet[layout.uy(d)] = true;
    out.dirichlet_values[layout.ux(d)] = val[0];
    out.dirichlet_values[layout.uy(d)] = val[1];
  };
  for (int rank = 0; rank < 2; ++rank)
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const auto& e = edges[k];
      if (!is_dirichlet_edge(data, e.marker) || marker_rank(e.marker) != rank) continue;
      const int m = dofs.boundary_edge_dof[k];
      set(e.a, boundary_value(data, e.marker, mesh.vertices()[e.a]));
      set(e.b, boundary_value(data, e.marker, mesh.vertices()[e.b]));
      set(m, boundary_value(data, e.marker, dofs.coords[m]));
    }
  if (data.interface_as_wall) {
    out.dirichlet[layout.p(0)] = true;
    out.dirichlet_values[layout.p(0)] = data.pressure_pin;
  }
  return out;
}

StokesSystem::StokesSystem(std::shared_ptr<const TriMesh> mesh, const StokesParams& params, CoefficientPtr k_gamma,
                           const StokesData& data)
    : mesh_(std::move(mesh)), params_(params), k_gamma_(std::move(k_gamma)) {
  layout_.nv = static_cast<int>(mesh_->num_vertices());
  layout_.nt = static_cast<int>(mesh_->num_triangles());
  if (!(params_.gamma_f > 0.0)) throw std::invalid_argument("gamma_f must be positive");
  blocks_ = assemble_mini(*mesh_, layout_, params_, k_gamma_.get(), data, true);
  trace_ = interface_trace(*mesh_);
  const int nt = static_cast<int>(trace_.size());
  CooAccumulator gm(nt, nt);
  for (const auto& e : trace_.edges) {
    const auto me = edge_p1_mass(std::abs(trace_.coords[e[1]].x - trace_.coords[e[0]].x));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) gm.add(e[i], e[j], me[i][j]);
  }
  trace_mass_ = gm.finalize();
  matrix_ = blocks_.matrix;
  base_rhs_ = blocks_.rhs;
  apply_dirichlet(matrix_, base_rhs_, blocks_.dirichlet, blocks_.dirichlet_values);
}

Vector StokesSystem::rhs(std::span<const double> eta_f) const {
  if (eta_f.size() != trace_.size()) throw std::invalid_argument("eta_f size does not match the interface trace");
  Vector r = base_rhs_;
  const Vector load = trace_mass_ * eta_f;
  for (std::size_t k = 0; k < trace_.size(); ++k) {
    const int d = layout_.uy(trace_.vertices[k]);
    if (!blocks_.dirichlet[d]) r[d] -= load[k];
  }
  return r;
}

const SparseLu& StokesSystem::factor() const {
  if (!lu_) {
    try {
      lu_ = std::make_unique<SparseLu>(matrix_);
    } catch (const SingularMatrixError& e) {
      throw SingularMatrixError(std::string(e.what()) + " (" + layout_.describe(e.row) + ")", e.row);
    }
  }
  return *lu_;
}

Vector StokesSystem::solve(std::span<const double> eta_f) const { return factor().solve(rhs(eta_f)); }

Vector StokesSystem::normal_velocity(std::span<const double> x) const {
  Vector un(trace_.size());
  for (std::size_t k = 0; k < trace_.size(); ++k) un[k] = -x[layout_.uy(trace_.vertices[k])];
  return un;
}

double StokesSystem::velocity_norm_sq(std::span<const double> x) const { return dot(x, blocks_.velocity_mass * x); }
double StokesSystem::pressure_norm_sq(std::span<const double> x) const { return dot(x, blocks_.pressure_mass * x); }

MiniField::MiniField(std::shared_ptr<const TriMesh> mesh, Vector x) : mesh_(std::move(mesh)), x_(std::move(x)) {
  layout_.nv = static_cast<int>(mesh_->num_vertices());
  layout_.nt = static_cast<int>(mesh_->num_triangles());
  if (static_cast<int>(x_.size()) != layout_.size()) throw std::invalid_argument("MINI vector size does not match the mesh");
  geometry_.reserve(layout_.nt);
  for (int t = 0; t < layout_.nt; ++t) geometry_.push_back(p1_gradients(mesh_->corners(t)));
}

FlowSample MiniField::eval(Point pt, double tol) const {
  const auto loc = mesh_->locate(pt, tol);
  return eval_in(loc.triangle, loc.bary);
}

FlowSample MiniField::eval_in(int tri, const std::array<double, 3>& l) const {
  const auto& t = mesh_->triangles()[tri];
  const auto& g = geometry_[tri];
  Sample s{};
  const double b = bubble_value(l);
  const Vec2 gb = bubble_gradient(l, g.grad);
  const double cx[4] = {x_[layout_.ux(t[0])], x_[layout_.ux(t[1])], x_[layout_.ux(t[2])], x_[layout_.ux_bubble(tri)]};
  const double cy[4] = {x_[layout_.uy(t[0])], x_[layout_.uy(t[1])], x_[layout_.uy(t[2])], x_[layout_.uy_bubble(tri)]};
  for (int i = 0; i < 3; ++i) {
    s.u[0] += cx[i] * l[i];
    s.u[1] += cy[i] * l[i];
    for (int d = 0; d < 2; ++d) {
      s.grad[0][d] += cx[i] * g.grad[i][d];
      s.grad[1][d] += cy[i] * g.grad[i][d];
    }
    s.p += x_[layout_.p(t[i])] * l[i];
  }
  s.u[0] += cx[3] * b;
  s.u[1] += cy[3] * b;
  for (int d = 0; d < 2; ++d) {
    s.grad[0][d] += cx[3] * gb[d];
    s.grad[1][d] += cy[3] * gb[d];
  }
  return s;
}

TaylorHoodField::TaylorHoodField(std::shared_ptr<const TriMesh> mesh, std::shared_ptr<const P2DofMap> dofs, Vector x)
    : mesh_(std::move(mesh)), dofs_(std::move(dofs)), x_(std::move(x)) {
  layout_.n2 = dofs_->num_dofs;
  layout_.nv = static_cast<int>(mesh_->num_vertices());
  if (static_cast<int>(x_.size()) != layout_.size())
    throw std::invalid_argument("Taylor-Hood vector size does not match the mesh");
  geometry_.reserve(mesh_->num_triangles());
  for (std::size_t t = 0; t < mesh_->num_triangles(); ++t) geometry_.push_back(p1_gradients(mesh_->corners(static_cast<int>(t))));
}

FlowSample TaylorHoodField::eval(Point pt, double tol) const {
  const auto loc = mesh_->locate(pt, tol);
  return eval_in(loc.triangle, loc.bary);
}

FlowSample TaylorHoodField::eval_in(int tri, const std::array<double, 3>& l) const {
  const auto& cell = dofs_->cell[tri];
  const auto& g = geometry_[tri];
  const auto v = p2_values(l);
  const auto gr = p2_gradients(l, g.grad);
  FlowSample s{};
  for (int i = 0; i < 6; ++i) {
    const double cx = x_[layout_.ux(cell[i])], cy = x_[layout_.uy(cell[i])];
    s.u[0] += cx * v[i];
    s.u[1] += cy * v[i];
    for (int d = 0; d < 2; ++d) {
      s.grad[0][d] += cx * gr[i][d];
      s.grad[1][d] += cy * gr[i][d];
    }
  }
  for (int i = 0; i < 3; ++i) s.p += x_[layout_.p(cell[i])] * l[i];
  return s;
}

}  // namespace sdms
