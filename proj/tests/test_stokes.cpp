#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "sdms/stokes.hpp"

using namespace sdms;

namespace {

constexpr double pi = std::numbers::pi;

std::shared_ptr<const TriMesh> stokes_mesh(int n) { return std::make_shared<const TriMesh>(build_stokes_mesh(n)); }

StokesData zero_data() {
  StokesData d;
  d.boundary_velocity = [](double, double) { return Vec2{0.0, 0.0}; };
  return d;
}

Vector solve_blocks(StokesBlocks b) {
  apply_dirichlet(b.matrix, b.rhs, b.dirichlet, b.dirichlet_values);
  return lu_solve(b.matrix, {b.rhs})[0];
}

MiniLayout layout_for(const TriMesh& m) {
  return MiniLayout{static_cast<int>(m.num_vertices()), static_cast<int>(m.num_triangles())};
}

struct Manufactured {
  static Vec2 u(double x, double y) {
    return {pi * std::pow(std::sin(pi * x), 2) * std::sin(2 * pi * y), -pi * std::sin(2 * pi * x) * std::pow(std::sin(pi * y), 2)};
  }
  static std::array<Vec2, 2> grad(double x, double y) {
    return {{{pi * pi * std::sin(2 * pi * x) * std::sin(2 * pi * y), 2 * pi * pi * std::pow(std::sin(pi * x), 2) * std::cos(2 * pi * y)},
             {-2 * pi * pi * std::cos(2 * pi * x) * std::pow(std::sin(pi * y), 2), -pi * pi * std::sin(2 * pi * x) * std::sin(2 * pi * y)}}};
  }
  static double p(double x, double y) { return std::cos(pi * x) * std::cos(pi * y); }
  static Vec2 f(double x, double y) {
    const double p3 = 2 * pi * pi * pi;
    const double lap_x = p3 * std::sin(2 * pi * y) * (2 * std::cos(2 * pi * x) - 1);
    const double lap_y = -p3 * std::sin(2 * pi * x) * (2 * std::cos(2 * pi * y) - 1);
    return {-lap_x - pi * std::sin(pi * x) * std::cos(pi * y), -lap_y - pi * std::cos(pi * x) * std::sin(pi * y)};
  }
};

}  // namespace

TEST(Stokes, ZeroDataZeroSolution) {
  const auto mesh = build_stokes_mesh(4);
  StokesParams p;
  p.gamma_f = 0.0;
  p.alpha = 0.0;
  const auto x = solve_blocks(assemble_mini(mesh, layout_for(mesh), p, nullptr, zero_data(), false));
  EXPECT_EQ(oracle::max_abs(x), 0.0);
}

TEST(Stokes, RigidTranslationIsDivergenceFree) {
  const auto mesh = build_stokes_mesh(6);
  const auto lay = layout_for(mesh);
  const auto b = assemble_mini(mesh, lay, StokesParams{}, nullptr, {}, true);
  for (int comp = 0; comp < 2; ++comp) {
    Vector u(lay.size(), 0.0);
    for (int v = 0; v < lay.nv; ++v) u[comp == 0 ? lay.ux(v) : lay.uy(v)] = 1.0;
    const auto r = b.matrix * u;
    for (int v = 0; v < lay.nv; ++v) EXPECT_LE(std::abs(r[lay.p(v)]), 1e-12);
  }
}

TEST(Stokes, ViscousBlockSymmetric) {
  const auto mesh = build_stokes_mesh(5, Diagonal::NW);
  const auto lay = layout_for(mesh);
  const auto k = make_coefficient("example1", 0.1, 1.8);
  const auto b = assemble_mini(mesh, lay, StokesParams{}, k.get(), {}, true);
  const int nvel = lay.velocity_size();
  for (int r = 0; r < nvel; ++r)
    for (int c = 0; c < nvel; ++c) EXPECT_NEAR(b.matrix.at(r, c), b.matrix.at(c, r), 1e-12);
  for (int r = 0; r < nvel; ++r)
    for (int v = 0; v < lay.nv; ++v) EXPECT_NEAR(b.matrix.at(r, lay.p(v)), -b.matrix.at(lay.p(v), r), 1e-14);
}

TEST(Stokes, BjsCoefficient) {
  StokesParams p;
  const ConstantCoefficient k4(4.0);
  EXPECT_NEAR(bjs_coefficient(p, &k4, 0.3, 1.0), 0.5, 1e-15);
  EXPECT_NEAR(bjs_coefficient(p, nullptr, 0.3, 1.0), 1.0, 1e-15);
  p.bjs_simplified = true;
  p.alpha = 0.7;
  EXPECT_EQ(bjs_coefficient(p, &k4, 0.3, 1.0), 0.7);
}

TEST(Stokes, RepeatSolveBitwiseIdentical) {
  const StokesSystem sys(stokes_mesh(8), StokesParams{}, make_coefficient("example1", 0.1, 1.8));
  Vector eta(sys.trace().size());
  for (std::size_t k = 0; k < eta.size(); ++k) eta[k] = std::cos(1.0 * k);
  EXPECT_EQ(sys.solve(eta), sys.solve(eta));
}

TEST(Stokes, LinearInInterfaceData) {
  const StokesSystem sys(stokes_mesh(8), StokesParams{}, nullptr, zero_data());
  Vector eta(sys.trace().size());
  for (std::size_t k = 0; k < eta.size(); ++k) eta[k] = std::sin(0.7 * k) + 0.2;
  Vector eta2 = eta;
  for (auto& v : eta2) v *= 2;
  const auto x1 = sys.solve(eta), x2 = sys.solve(eta2);
  ASSERT_GT(oracle::max_abs(x1), 1e-6);
  for (std::size_t i = 0; i < x1.size(); ++i) EXPECT_NEAR(x2[i], 2 * x1[i], 1e-12 * oracle::max_abs(x1));
}

TEST(Stokes, Superposition) {
  auto mesh = stokes_mesh(8);
  StokesData d_lid, d_force = zero_data(), d_all;
  d_force.body_force = [](double x, double y) { return Vec2{std::sin(3 * x), x * y}; };
  d_all.body_force = d_force.body_force;
  const StokesSystem lid(mesh, StokesParams{}, nullptr, d_lid), force(mesh, StokesParams{}, nullptr, d_force),
      all(mesh, StokesParams{}, nullptr, d_all), none(mesh, StokesParams{}, nullptr, zero_data());
  Vector eta(lid.trace().size()), zero(lid.trace().size(), 0.0);
  for (std::size_t k = 0; k < eta.size(); ++k) eta[k] = 0.3 * k;
  const auto a = lid.solve(zero), b = force.solve(zero), c = none.solve(eta), s = all.solve(eta);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(s[i], a[i] + b[i] + c[i], 1e-11);
}

TEST(Stokes, NonsingularForEveryN) {
  double first = 0;
  for (int n : {2, 4, 8, 16, 32}) {
    const StokesSystem sys(stokes_mesh(n), StokesParams{}, make_coefficient("example1", 1.0 / 32, 1.8));
    Vector x;
    ASSERT_NO_THROW(x = sys.solve(Vector(sys.trace().size(), 0.0))) << n;
    const double norm = std::sqrt(sys.velocity_norm_sq(x) + sys.pressure_norm_sq(x));
    ASSERT_TRUE(std::isfinite(norm));
    if (first == 0) first = norm;
    EXPECT_LE(norm, 1.5 * first) << n;
  }
}

TEST(Stokes, InvalidParameters) {
  StokesParams p;
  p.nu = 0;
  EXPECT_THROW(StokesSystem(stokes_mesh(2), p, nullptr), std::invalid_argument);
  const auto darcy = build_darcy_mesh(2);
  const auto noif = build_structured(2, kStokesRect, {BoundaryMarker::stokes_wall, BoundaryMarker::stokes_wall,
                                                       BoundaryMarker::stokes_lid, BoundaryMarker::stokes_wall});
  EXPECT_THROW(assemble_mini(noif, layout_for(noif), StokesParams{}, nullptr, {}, true), MeshError);
}

TEST(Stokes, ManufacturedRates) {
  StokesData data;
  data.body_force = Manufactured::f;
  data.boundary_velocity = Manufactured::u;
  data.interface_as_wall = true;
  data.pressure_pin = Manufactured::p(0.0, 1.0);
  std::vector<double> l2, h1;
  for (int n : {8, 16, 32, 64}) {
    auto mesh = stokes_mesh(n);
    const auto x = solve_blocks(assemble_mini(*mesh, layout_for(*mesh), StokesParams{}, nullptr, data, false));
    const MiniField field(mesh, x);
    const auto& q = quad_triangle(6);
    double el2 = 0, eh1 = 0;
    for (std::size_t t = 0; t < mesh->num_triangles(); ++t) {
      const auto c = mesh->corners(static_cast<int>(t));
      const double area = p1_gradients(c).area;
      for (std::size_t k = 0; k < q.size(); ++k) {
        const Point p = map_point(c, q.points[k]);
        const auto s = field.eval_in(static_cast<int>(t), q.points[k]);
        const auto u = Manufactured::u(p.x, p.y);
        const auto g = Manufactured::grad(p.x, p.y);
        const double w = 2 * area * q.weights[k];
        for (int comp = 0; comp < 2; ++comp) {
          el2 += w * std::pow(s.u[comp] - u[comp], 2);
          for (int d = 0; d < 2; ++d) eh1 += w * std::pow(s.grad[comp][d] - g[comp][d], 2);
        }
      }
    }
    l2.push_back(std::sqrt(el2));
    h1.push_back(std::sqrt(eh1));
  }
  for (std::size_t i = 1; i < l2.size(); ++i) {
    EXPECT_NEAR(std::log2(l2[i - 1] / l2[i]), 2.0, 0.2) << i;
    EXPECT_NEAR(std::log2(h1[i - 1] / h1[i]), 1.0, 0.15) << i;
  }
}

TEST(Stokes, CavitySelfConvergence) {
  StokesData data;
  data.interface_as_wall = true;
  auto solve = [&](int n) {
    auto mesh = stokes_mesh(n);
    return MiniField(mesh, solve_blocks(assemble_mini(*mesh, layout_for(*mesh), StokesParams{}, nullptr, data, false)));
  };
  const auto fine = solve(128);
  std::vector<double> err;
  for (int n : {8, 16, 32}) {
    const auto coarse = solve(n);
    const auto& q = quad_triangle(4);
    double e = 0;
    const auto& m = fine.mesh();
    for (std::size_t t = 0; t < m.num_triangles(); ++t) {
      const auto c = m.corners(static_cast<int>(t));
      const double area = p1_gradients(c).area;
      for (std::size_t k = 0; k < q.size(); ++k) {
        const Point p = map_point(c, q.points[k]);
        const auto a = fine.eval_in(static_cast<int>(t), q.points[k]);
        const auto b = coarse.eval(p);
        e += 2 * area * q.weights[k] * (std::pow(a.u[0] - b.u[0], 2) + std::pow(a.u[1] - b.u[1], 2));
      }
    }
    err.push_back(std::sqrt(e));
  }
  for (std::size_t i = 1; i < err.size(); ++i) EXPECT_NEAR(std::log2(err[i - 1] / err[i]), 2.0, 0.3) << i;
}

TEST(TaylorHood, ManufacturedRates) {
  StokesData data;
  data.body_force = Manufactured::f;
  data.boundary_velocity = Manufactured::u;
  data.interface_as_wall = true;
  data.pressure_pin = Manufactured::p(0.0, 1.0);
  std::vector<double> l2;
  for (int n : {4, 8, 16}) {
    auto mesh = stokes_mesh(n);
    auto dofs = std::make_shared<const P2DofMap>(build_p2_dofs(*mesh));
    const TaylorHoodLayout lay{dofs->num_dofs, static_cast<int>(mesh->num_vertices())};
    const auto x = solve_blocks(assemble_taylor_hood(*mesh, *dofs, lay, StokesParams{}, nullptr, data));
    const TaylorHoodField field(mesh, dofs, x);
    const auto& q = quad_triangle(6);
    double e = 0;
    for (std::size_t t = 0; t < mesh->num_triangles(); ++t) {
      const auto c = mesh->corners(static_cast<int>(t));
      const double area = p1_gradients(c).area;
      for (std::size_t k = 0; k < q.size(); ++k) {
        const Point p = map_point(c, q.points[k]);
        const auto s = field.eval_in(static_cast<int>(t), q.points[k]);
        const auto u = Manufactured::u(p.x, p.y);
        e += 2 * area * q.weights[k] * (std::pow(s.u[0] - u[0], 2) + std::pow(s.u[1] - u[1], 2));
      }
    }
    l2.push_back(std::sqrt(e));
  }
  for (std::size_t i = 1; i < l2.size(); ++i) EXPECT_NEAR(std::log2(l2[i - 1] / l2[i]), 3.0, 0.3) << i;
}

TEST(P2Dofs, CountsAndMidpoints) {
  const auto mesh = build_darcy_mesh(3);
  const auto d = build_p2_dofs(mesh);
  EXPECT_EQ(d.num_dofs, 7 * 7);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto c = mesh.corners(static_cast<int>(t));
    for (int e = 0; e < 3; ++e) {
      const auto [a, b] = kP2Edges[e];
      const auto& p = d.coords[d.cell[t][3 + e]];
      EXPECT_DOUBLE_EQ(p.x, 0.5 * (c[a].x + c[b].x));
      EXPECT_DOUBLE_EQ(p.y, 0.5 * (c[a].y + c[b].y));
    }
  }
  ASSERT_EQ(d.boundary_edge_dof.size(), mesh.boundary_edges().size());
}
