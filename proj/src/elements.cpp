#include "sdms/elements.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace sdms {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-17) break;
    }
    // Recompute derivative at the converged root.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    nodes[n - 1 - i] = x;
    weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

namespace {

QuadRule make_triangle_rule(int degree) {
  QuadRule q;
  q.degree = degree;
  switch (degree) {
    case 1:
      q.points = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
      q.weights = {0.5};
      break;
    case 2:
      q.points = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
      q.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
      break;
    case 4: {
      // Six-point symmetric rule in closed form.
      const double s10 = std::sqrt(10.0);
      const double r = std::sqrt(38.0 - 44.0 * std::sqrt(0.4));
      const double a1 = (8.0 - s10 + r) / 18.0, a2 = (8.0 - s10 - r) / 18.0;
      const double t = std::sqrt(213125.0 - 53320.0 * s10);
      const double w1 = (620.0 + t) / 3720.0 / 2.0, w2 = (620.0 - t) / 3720.0 / 2.0;
      for (auto [a, w] : {std::pair{a1, w1}, std::pair{a2, w2}}) {
        const double b = 1.0 - 2.0 * a;
        q.points.push_back({b, a, a});
        q.points.push_back({a, b, a});
        q.points.push_back({a, a, b});
        for (int k = 0; k < 3; ++k) q.weights.push_back(w);
      }
      break;
    }
    case 6: {
      // Collapsed Gauss product, 4 x 4 points.
      std::vector<double> x, w;
      gauss_legendre(4, x, w);
      for (int i = 0; i < 4; ++i) {
        const double u = 0.5 * (x[i] + 1.0), wu = 0.5 * w[i];
        for (int j = 0; j < 4; ++j) {
          const double v = 0.5 * (x[j] + 1.0), wv = 0.5 * w[j];
          const double l1 = u, l2 = v * (1.0 - u);
          q.points.push_back({1.0 - l1 - l2, l1, l2});
          q.weights.push_back(wu * wv * (1.0 - u));
        }
      }
      break;
    }
    default:
      throw std::invalid_argument("quad_triangle: unsupported degree " + std::to_string(degree));
  }
  return q;
}

QuadRule make_edge_rule(int n) {
  if (n != 2 && n != 3 && n != 5) throw std::invalid_argument("quad_edge: unsupported point count " + std::to_string(n));
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadRule q;
  q.degree = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    const double s = 0.5 * (x[i] + 1.0);
    q.points.push_back({1.0 - s, s, 0.0});
    q.weights.push_back(0.5 * w[i]);
  }
  return q;
}

}  // namespace

const QuadRule& quad_triangle(int degree) {
  static const QuadRule r1 = make_triangle_rule(1), r2 = make_triangle_rule(2), r4 = make_triangle_rule(4),
                        r6 = make_triangle_rule(6);
  switch (degree) {
    case 1: return r1;
    case 2: return r2;
    case 4: return r4;
    case 6: return r6;
    default: throw std::invalid_argument("quad_triangle: unsupported degree " + std::to_string(degree));
  }
}

const QuadRule& quad_edge(int points) {
  static const QuadRule e2 = make_edge_rule(2), e3 = make_edge_rule(3), e5 = make_edge_rule(5);
  switch (points) {
    case 2: return e2;
    case 3: return e3;
    case 5: return e5;
    default: throw std::invalid_argument("quad_edge: unsupported point count " + std::to_string(points));
  }
}

int dof_count(ElementKind kind) {
  switch (kind) {
    case ElementKind::P1: return 3;
    case ElementKind::P2: return 6;
    case ElementKind::Bubble: return 1;
    case ElementKind::MiniVelocity: return 8;
  }
  return 0;
}

P1Geometry p1_gradients(const std::array<Point, 3>& t) {
  const double det = (t[1].x - t[0].x) * (t[2].y - t[0].y) - (t[2].x - t[0].x) * (t[1].y - t[0].y);
  if (!(std::abs(det) > 0.0) || !std::isfinite(det)) throw DegenerateElementError("degenerate triangle (zero area)");
  P1Geometry g;
  g.area = 0.5 * std::abs(det);
  g.grad[0] = {(t[1].y - t[2].y) / det, (t[2].x - t[1].x) / det};
  g.grad[1] = {(t[2].y - t[0].y) / det, (t[0].x - t[2].x) / det};
  g.grad[2] = {(t[0].y - t[1].y) / det, (t[1].x - t[0].x) / det};
  return g;
}

Mat3 local_p1_stiffness(const std::array<Point, 3>& tri, double coefficient) {
  const auto g = p1_gradients(tri);
  Mat3 k{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      k[i][j] = coefficient * g.area * (g.grad[i][0] * g.grad[j][0] + g.grad[i][1] * g.grad[j][1]);
  return k;
}

Mat3 local_p1_stiffness(const std::array<Point, 3>& tri, const QuadRule& rule, std::span<const double> coefficient) {
  double kbar = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) kbar += 2.0 * rule.weights[q] * coefficient[q];
  return local_p1_stiffness(tri, kbar);
}

double bubble_value(const std::array<double, 3>& l) { return 27.0 * l[0] * l[1] * l[2]; }

Vec2 bubble_gradient(const std::array<double, 3>& l, const std::array<Vec2, 3>& g) {
  Vec2 r{};
  for (int d = 0; d < 2; ++d) r[d] = 27.0 * (l[1] * l[2] * g[0][d] + l[0] * l[2] * g[1][d] + l[0] * l[1] * g[2][d]);
  return r;
}

MiniKernels mini_velocity_kernels(const std::array<Point, 3>& tri, const QuadRule& rule) {
  if (rule.degree < 4) throw std::invalid_argument("mini_velocity_kernels: quadrature degree must be >= 4");
  const auto g = p1_gradients(tri);
  MiniKernels k;
  k.area = g.area;
  for (const auto& l : rule.points) {
    k.value.push_back({l[0], l[1], l[2], bubble_value(l)});
    k.grad.push_back({g.grad[0], g.grad[1], g.grad[2], bubble_gradient(l, g.grad)});
  }
  return k;
}

std::array<double, 6> p2_values(const std::array<double, 3>& l) {
  return {l[0] * (2.0 * l[0] - 1.0), l[1] * (2.0 * l[1] - 1.0), l[2] * (2.0 * l[2] - 1.0),
          4.0 * l[0] * l[1],         4.0 * l[1] * l[2],         4.0 * l[2] * l[0]};
}

std::array<Vec2, 6> p2_gradients(const std::array<double, 3>& l, const std::array<Vec2, 3>& g) {
  std::array<Vec2, 6> r{};
  for (int d = 0; d < 2; ++d) {
    for (int i = 0; i < 3; ++i) r[i][d] = (4.0 * l[i] - 1.0) * g[i][d];
    for (int e = 0; e < 3; ++e) {
      const int a = kP2Edges[e][0], b = kP2Edges[e][1];
      r[3 + e][d] = 4.0 * (l[a] * g[b][d] + l[b] * g[a][d]);
    }
  }
  return r;
}

}  // namespace sdms
