#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sdms/elements.hpp"

using namespace sdms;

namespace {
const std::array<Point, 3> kUnit{{{0, 0}, {1, 0}, {0, 1}}};
}

TEST(Quadrature, WeightsSumToReferenceMeasure) {
  for (int d : {1, 2, 4, 6}) {
    double s = 0;
    for (double w : quad_triangle(d).weights) s += w;
    EXPECT_NEAR(s, 0.5, 1e-15) << d;
    EXPECT_EQ(quad_triangle(d).degree, d);
  }
  for (int n : {2, 3, 5}) {
    double s = 0;
    for (double w : quad_edge(n).weights) s += w;
    EXPECT_NEAR(s, 1.0, 1e-15) << n;
  }
  EXPECT_EQ(quad_triangle(1).size(), 1u);
  EXPECT_NEAR(quad_triangle(1).weights[0], 0.5, 0);
  EXPECT_EQ(quad_triangle(2).size(), 3u);
  EXPECT_THROW(quad_triangle(3), std::invalid_argument);
  EXPECT_THROW(quad_edge(4), std::invalid_argument);
}

TEST(Quadrature, TriangleMonomialExactness) {
  for (int d : {1, 2, 4, 6}) {
    const auto& r = quad_triangle(d);
    for (int p = 0; p <= d; ++p)
      for (int q = 0; p + q <= d; ++q) {
        double s = 0;
        for (std::size_t k = 0; k < r.size(); ++k) {
          const Point x = map_point(kUnit, r.points[k]);
          s += r.weights[k] * std::pow(x.x, p) * std::pow(x.y, q);
        }
        const double exact = oracle::monomial_integral(p, q);
        EXPECT_LE(std::abs(s - exact), 1e-14 * exact) << "degree " << d << " x^" << p << " y^" << q;
      }
  }
  const auto& r4 = quad_triangle(4);
  double s = 0;
  for (std::size_t k = 0; k < r4.size(); ++k) {
    const Point x = map_point(kUnit, r4.points[k]);
    s += r4.weights[k] * x.x * x.x * x.y * x.y;
  }
  EXPECT_NEAR(s, 1.0 / 180.0, 1e-15 / 180.0 * 10);
}

TEST(Quadrature, EdgeExactness) {
  for (int n : {2, 3, 5}) {
    const auto& r = quad_edge(n);
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double s = 0;
      for (std::size_t k = 0; k < r.size(); ++k) s += r.weights[k] * std::pow(r.points[k][1], p);
      EXPECT_NEAR(s, 1.0 / (p + 1), 1e-14) << n << " " << p;
    }
  }
}

TEST(Elements, DofCounts) {
  EXPECT_EQ(dof_count(ElementKind::P1), 3);
  EXPECT_EQ(dof_count(ElementKind::P2), 6);
  EXPECT_EQ(dof_count(ElementKind::Bubble), 1);
  EXPECT_EQ(dof_count(ElementKind::MiniVelocity), 8);
}

TEST(Elements, P1GradientsUnitTriangle) {
  const auto g = p1_gradients(kUnit);
  EXPECT_EQ(g.grad[0], (Vec2{-1, -1}));
  EXPECT_EQ(g.grad[1], (Vec2{1, 0}));
  EXPECT_EQ(g.grad[2], (Vec2{0, 1}));
  EXPECT_EQ(g.area, 0.5);
  EXPECT_THROW(p1_gradients({{{0, 0}, {1, 1}, {2, 2}}}), DegenerateElementError);
}

TEST(Elements, P1GradientsFiniteDifference) {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const double th = u(rng), dx = u(rng), dy = u(rng);
    std::array<Point, 3> t;
    for (int k = 0; k < 3; ++k)
      t[k] = {std::cos(th) * kUnit[k].x - std::sin(th) * kUnit[k].y + dx,
              std::sin(th) * kUnit[k].x + std::cos(th) * kUnit[k].y + dy};
    const auto g = p1_gradients(t);
    EXPECT_NEAR(g.area, 0.5, 1e-14);
    const Point c{(t[0].x + t[1].x + t[2].x) / 3, (t[0].y + t[1].y + t[2].y) / 3};
    const double h = 1e-6;
    for (int i = 0; i < 3; ++i) {
      const double fx = (barycentric(t, {c.x + h, c.y})[i] - barycentric(t, {c.x - h, c.y})[i]) / (2 * h);
      const double fy = (barycentric(t, {c.x, c.y + h})[i] - barycentric(t, {c.x, c.y - h})[i]) / (2 * h);
      EXPECT_NEAR(g.grad[i][0], fx, 1e-8);
      EXPECT_NEAR(g.grad[i][1], fy, 1e-8);
    }
    EXPECT_NEAR(g.grad[0][0] + g.grad[1][0] + g.grad[2][0], 0.0, 1e-14);
    EXPECT_NEAR(g.grad[0][1] + g.grad[1][1] + g.grad[2][1], 0.0, 1e-14);
  }
}

TEST(Elements, P1StiffnessUnitTriangle) {
  const Mat3 expect{{{1, -0.5, -0.5}, {-0.5, 0.5, 0}, {-0.5, 0, 0.5}}};
  const auto k = local_p1_stiffness(kUnit, 1.0);
  const auto k3 = local_p1_stiffness(kUnit, 3.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      EXPECT_NEAR(k[i][j], expect[i][j], 1e-15);
      EXPECT_NEAR(k3[i][j], 3 * expect[i][j], 1e-15);
    }
}

TEST(Elements, P1StiffnessSampledCoefficient) {
  // Oscillatory K on a triangle small against ε, against a refined-quadrature oracle.
  const std::array<Point, 3> t{{{0.1, 0.2}, {0.1012, 0.2001}, {0.1004, 0.2013}}};
  auto kf = [](double x, double y) {
    return 1.0 / ((2 + 1.8 * std::sin(2 * M_PI * x / 0.02)) * (2 + 1.8 * std::sin(2 * M_PI * y / 0.02)));
  };
  const auto& r = quad_triangle(2);
  std::vector<double> kq;
  for (const auto& p : r.points) {
    const Point x = map_point(t, p);
    kq.push_back(kf(x.x, x.y));
  }
  const auto k = local_p1_stiffness(t, r, kq);
  double kbar = 0;
  for (std::size_t q = 0; q < r.size(); ++q) kbar += 2 * r.weights[q] * kq[q];
  const auto k1 = local_p1_stiffness(t, 1.0);
  for (int i = 0; i < 3; ++i) {
    double row = 0;
    for (int j = 0; j < 3; ++j) {
      EXPECT_NEAR(k[i][j], kbar * k1[i][j], 1e-14);
      EXPECT_EQ(k[i][j], k[j][i]);
      row += k[i][j];
    }
    EXPECT_NEAR(row, 0.0, 1e-14);
  }
  // Midpoint-refinement oracle: a finer sampling of K converges to the exact mean.
  const auto& r6 = quad_triangle(6);
  double fine = 0;
  const int m = 64;
  for (int b = 0; b < m; ++b)
    for (int a = 0; a + b < m; ++a) {
      auto tri = [&](std::array<double, 3> l0, std::array<double, 3> l1, std::array<double, 3> l2) {
        const std::array<Point, 3> s{map_point(t, l0), map_point(t, l1), map_point(t, l2)};
        for (std::size_t q = 0; q < r6.size(); ++q) {
          const Point x = map_point(s, r6.points[q]);
          fine += 2 * r6.weights[q] * kf(x.x, x.y) / (m * m);
        }
      };
      auto L = [&](int aa, int bb) { return std::array<double, 3>{double(m - aa - bb) / m, double(aa) / m, double(bb) / m}; };
      tri(L(a, b), L(a + 1, b), L(a, b + 1));
      if (a + b + 1 < m) tri(L(a + 1, b), L(a + 1, b + 1), L(a, b + 1));
    }
  EXPECT_NEAR(kbar, fine, 1e-3 * fine);
}

TEST(Elements, BubbleValues) {
  EXPECT_NEAR(bubble_value({1.0 / 3, 1.0 / 3, 1.0 / 3}), 1.0, 1e-15);
  EXPECT_EQ(bubble_value({0.5, 0.5, 0.0}), 0.0);
  EXPECT_EQ(bubble_value({0.0, 0.5, 0.5}), 0.0);
  EXPECT_EQ(bubble_value({0.5, 0.0, 0.5}), 0.0);
  const std::array<Point, 3> t{{{0.3, 0.1}, {1.2, 0.4}, {0.5, 0.9}}};
  const auto g = p1_gradients(t);
  const auto k = mini_velocity_kernels(t, quad_triangle(4));
  double integral = 0;
  const auto& r = quad_triangle(4);
  for (std::size_t q = 0; q < r.size(); ++q) integral += 2 * g.area * r.weights[q] * k.value[q][3];
  EXPECT_NEAR(integral, g.area * 27.0 / 60.0, 1e-14);
  EXPECT_THROW(mini_velocity_kernels(t, quad_triangle(2)), std::invalid_argument);
}

TEST(Elements, BubbleGradientFiniteDifference) {
  const std::array<Point, 3> t{{{0.3, 0.1}, {1.2, 0.4}, {0.5, 0.9}}};
  const auto g = p1_gradients(t);
  const Point p{0.6, 0.45};
  const double h = 1e-6;
  const auto bg = bubble_gradient(barycentric(t, p), g.grad);
  const double fx = (bubble_value(barycentric(t, {p.x + h, p.y})) - bubble_value(barycentric(t, {p.x - h, p.y}))) / (2 * h);
  const double fy = (bubble_value(barycentric(t, {p.x, p.y + h})) - bubble_value(barycentric(t, {p.x, p.y - h}))) / (2 * h);
  EXPECT_NEAR(bg[0], fx, 1e-7);
  EXPECT_NEAR(bg[1], fy, 1e-7);
}

TEST(Elements, MiniGramMatrixPositiveDefinite) {
  const auto& r = quad_triangle(6);
  const auto k = mini_velocity_kernels(kUnit, r);
  Eigen::Matrix4d gram = Eigen::Matrix4d::Zero();
  for (std::size_t q = 0; q < r.size(); ++q)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) gram(i, j) += r.weights[q] * k.value[q][i] * k.value[q][j];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(gram);
  EXPECT_GT(es.eigenvalues().minCoeff(), 1e-6);
}

TEST(Elements, P2ReproducesQuadratics) {
  const std::array<Point, 3> t{{{0.2, 0.1}, {0.9, 0.3}, {0.4, 0.8}}};
  const auto g = p1_gradients(t);
  std::array<Point, 6> nodes;
  for (int i = 0; i < 3; ++i) nodes[i] = t[i];
  for (int e = 0; e < 3; ++e) {
    const auto [a, b] = kP2Edges[e];
    nodes[3 + e] = {(t[a].x + t[b].x) / 2, (t[a].y + t[b].y) / 2};
  }
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  auto check = [&](auto f, auto fx, auto fy) {
    std::array<double, 6> c;
    for (int i = 0; i < 6; ++i) c[i] = f(nodes[i].x, nodes[i].y);
    for (int k = 0; k < 20; ++k) {
      double a = u(rng), b = u(rng);
      if (a + b > 1) {
        a = 1 - a;
        b = 1 - b;
      }
      const std::array<double, 3> l{1 - a - b, a, b};
      const Point x = map_point(t, l);
      const auto v = p2_values(l);
      const auto gr = p2_gradients(l, g.grad);
      double s = 0, sx = 0, sy = 0;
      for (int i = 0; i < 6; ++i) {
        s += c[i] * v[i];
        sx += c[i] * gr[i][0];
        sy += c[i] * gr[i][1];
      }
      EXPECT_NEAR(s, f(x.x, x.y), 1e-13);
      EXPECT_NEAR(sx, fx(x.x, x.y), 1e-12);
      EXPECT_NEAR(sy, fy(x.x, x.y), 1e-12);
    }
  };
  check([](double x, double) { return x * x; }, [](double x, double) { return 2 * x; }, [](double, double) { return 0.0; });
  check([](double x, double y) { return x * y; }, [](double, double y) { return y; }, [](double x, double) { return x; });
  check([](double, double y) { return y * y; }, [](double, double) { return 0.0; }, [](double, double y) { return 2 * y; });
}

TEST(Elements, EdgeMass) {
  const auto m = edge_p1_mass(0.25);
  EXPECT_DOUBLE_EQ(m[0][0], 0.25 / 3);
  EXPECT_DOUBLE_EQ(m[0][1], 0.25 / 6);
}
