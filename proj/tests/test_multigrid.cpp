#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "sdms/analysis.hpp"
#include "sdms/multigrid.hpp"

using namespace sdms;

namespace {

constexpr double pi = std::numbers::pi;

double linear(Point p) { return 0.3 + 2.0 * p.x - 1.7 * p.y; }

struct P2Problem {
  TriMesh mesh;
  P2DofMap dofs;
  P2DarcyOperators ops;
  std::vector<bool> mask;
  SparseMatrix a;
  Vector rhs;
};

P2Problem laplace(int n, const CoefficientField& k) {
  P2Problem p{build_darcy_mesh(n), {}, {}, {}, {}, {}};
  p.dofs = build_p2_dofs(p.mesh);
  ScalarSource src{"manufactured", [](double x, double y) { return 2 * pi * pi * std::sin(pi * x) * std::sin(pi * y); }};
  p.ops = assemble_p2_darcy(p.mesh, p.dofs, k, src);
  p.mask = p.ops.dirichlet;
  const auto& be = p.mesh.boundary_edges();
  for (std::size_t e = 0; e < be.size(); ++e)
    p.mask[be[e].a] = p.mask[be[e].b] = p.mask[p.dofs.boundary_edge_dof[e]] = true;
  p.a = p.ops.stiffness;
  p.rhs = p.ops.load;
  apply_dirichlet(p.a, p.rhs, p.mask, Vector(p.rhs.size(), 0.0));
  return p;
}

Multigrid p2_multigrid(const P2Problem& p) {
  std::vector<SparseMatrix> ps{p1_to_p2(p.dofs)};
  std::vector<std::vector<bool>> masks{std::vector<bool>(p.mask.begin(), p.mask.begin() + p.dofs.num_vertices)};
  const auto coarse = coarsening_hierarchy(p.mesh, 4);
  const TriMesh* fine = &p.mesh;
  for (const auto& c : coarse) {
    ps.push_back(p1_prolongation(c, *fine));
    masks.push_back(inject_mask(c, *fine, masks.back()));
    fine = &c;
  }
  return Multigrid(p.a, p.mask, std::move(ps), std::move(masks));
}

}  // namespace

TEST(Prolongation, ReproducesLinearFunctions) {
  for (auto d : {Diagonal::NE, Diagonal::NW}) {
    const auto c = build_darcy_mesh(4, d), f = build_darcy_mesh(8, d);
    const auto p = p1_prolongation(c, f);
    Vector vc(c.num_vertices());
    for (std::size_t i = 0; i < vc.size(); ++i) vc[i] = linear(c.vertices()[i]);
    const auto vf = p * vc;
    for (std::size_t i = 0; i < vf.size(); ++i) EXPECT_NEAR(vf[i], linear(f.vertices()[i]), 1e-14);
  }
}

TEST(Prolongation, DiagonalMidpointsFollowMeshDiagonal) {
  const auto c = build_darcy_mesh(1, Diagonal::NW), f = build_darcy_mesh(2, Diagonal::NW);
  const auto p = p1_prolongation(c, f);
  EXPECT_EQ(p.at(4, 1), 0.5);
  EXPECT_EQ(p.at(4, 2), 0.5);
  EXPECT_EQ(p.at(4, 0), 0.0);
  EXPECT_THROW(p1_prolongation(c, build_darcy_mesh(2, Diagonal::NE)), MeshError);
}

TEST(Prolongation, P1IntoP2) {
  const auto m = build_stokes_mesh(3);
  const auto d = build_p2_dofs(m);
  Vector v(m.num_vertices());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = linear(m.vertices()[i]);
  const auto w = p1_to_p2(d) * v;
  for (int i = 0; i < d.num_dofs; ++i) EXPECT_NEAR(w[i], linear(d.coords[i]), 1e-14);
}

TEST(Prolongation, Hierarchy) {
  const auto h = coarsening_hierarchy(build_stokes_mesh(32), 4);
  ASSERT_EQ(h.size(), 3u);
  EXPECT_EQ(h.back().n(), 4);
  EXPECT_EQ(h.back().boundary_edges()[0].marker, BoundaryMarker::interface);
  EXPECT_EQ(h.back().boundary_edges()[8].marker, BoundaryMarker::stokes_lid);
  EXPECT_TRUE(coarsening_hierarchy(build_stokes_mesh(6), 4).empty());
}

TEST(P2Darcy, ManufacturedRates) {
  const ConstantCoefficient one(1.0);
  std::vector<double> l2;
  for (int n : {4, 8, 16, 32}) {
    auto p = laplace(n, one);
    const auto x = lu_solve(p.a, {p.rhs})[0];
    auto mesh = std::make_shared<const TriMesh>(p.mesh);
    const P2HeadField f(mesh, std::make_shared<const P2DofMap>(p.dofs), x);
    const auto& q = quad_triangle(6);
    double e = 0;
    for (std::size_t t = 0; t < mesh->num_triangles(); ++t) {
      const auto c = mesh->corners(static_cast<int>(t));
      const double area = p1_gradients(c).area;
      for (std::size_t k = 0; k < q.size(); ++k) {
        const Point x = map_point(c, q.points[k]);
        const double d = f.eval_in(static_cast<int>(t), q.points[k]).value - std::sin(pi * x.x) * std::sin(pi * x.y);
        e += 2 * area * q.weights[k] * d * d;
      }
    }
    l2.push_back(std::sqrt(e));
  }
  for (std::size_t i = 1; i < l2.size(); ++i) EXPECT_NEAR(std::log2(l2[i - 1] / l2[i]), 3.0, 0.15) << i;
}

TEST(Multigrid, PcgIterationsMeshIndependent) {
  const auto k = make_coefficient("example1", 1.0 / 8, 1.8);
  std::vector<int> its;
  for (int n : {16, 32, 64}) {
    const auto p = laplace(n, *k);
    const auto mg = p2_multigrid(p);
    EXPECT_GE(mg.num_levels(), 3);
    const auto r = cg_solve(p.a, p.rhs, 1e-10, 200, mg.as_preconditioner());
    const auto ref = lu_solve(p.a, {p.rhs})[0];
    double err = 0, nrm = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      err = std::max(err, std::abs(r.x[i] - ref[i]));
      nrm = std::max(nrm, std::abs(ref[i]));
    }
    EXPECT_LE(err, 1e-8 * nrm);
    its.push_back(r.iterations);
  }
  for (int i : its) EXPECT_LE(i, 25);
  EXPECT_LE(its.back(), its.front() + 5);
}

TEST(Multigrid, VcycleIsSymmetric) {
  const auto p = laplace(8, ConstantCoefficient(2.0));
  const auto mg = p2_multigrid(p);
  const int n = p.a.rows();
  Vector a(n), b(n), ma(n), mb(n);
  for (int i = 0; i < n; ++i) {
    a[i] = p.mask[i] ? 0.0 : std::sin(1.3 * i);
    b[i] = p.mask[i] ? 0.0 : std::cos(0.7 * i);
  }
  mg.vcycle(a, ma);
  mg.vcycle(b, mb);
  EXPECT_NEAR(dot(b, ma), dot(a, mb), 1e-12 * std::abs(dot(a, ma)));
  EXPECT_GT(dot(a, ma), 0.0);
}
