#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

#include "sdms/mesh.hpp"

namespace sdms {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec2 = std::array<double, 2>;

class DegenerateElementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quadrature rule. Triangle rules use barycentric points on the reference
/// triangle and weights summing to 1/2; edge rules use abscissae on [0, 1] with
/// weights summing to 1.
struct QuadRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree = 0;
  std::size_t size() const { return weights.size(); }
};

/// Supported degrees: 1, 2, 4, 6.
const QuadRule& quad_triangle(int degree);
/// Gauss-Legendre on [0, 1]; supported point counts: 2, 3, 5.
const QuadRule& quad_edge(int points);

/// Gauss-Legendre nodes/weights on [-1, 1], computed by Newton iteration.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

enum class ElementKind { P1, P2, Bubble, MiniVelocity };
int dof_count(ElementKind kind);

struct P1Geometry {
  std::array<Vec2, 3> grad;
  double area = 0.0;
};

/// Gradients of the three barycentric hats and the triangle area.
P1Geometry p1_gradients(const std::array<Point, 3>& tri);

inline Point map_point(const std::array<Point, 3>& t, const std::array<double, 3>& l) {
  return {l[0] * t[0].x + l[1] * t[1].x + l[2] * t[2].x, l[0] * t[0].y + l[1] * t[1].y + l[2] * t[2].y};
}

/// P1 stiffness with a constant coefficient.
Mat3 local_p1_stiffness(const std::array<Point, 3>& tri, double coefficient);
/// P1 stiffness with the coefficient sampled at the points of `rule` (values in rule order).
Mat3 local_p1_stiffness(const std::array<Point, 3>& tri, const QuadRule& rule, std::span<const double> coefficient);

/// Values and gradients of the MINI scalar basis {λ0, λ1, λ2, 27 λ0 λ1 λ2} at every point of `rule`.
struct MiniKernels {
  std::vector<std::array<double, 4>> value;
  std::vector<std::array<Vec2, 4>> grad;
  double area = 0.0;
};
MiniKernels mini_velocity_kernels(const std::array<Point, 3>& tri, const QuadRule& rule);

/// Bubble 27 λ0 λ1 λ2 and its gradient for given barycentric coordinates.
double bubble_value(const std::array<double, 3>& l);
Vec2 bubble_gradient(const std::array<double, 3>& l, const std::array<Vec2, 3>& grad_lambda);

/// P2 basis: vertex functions λi(2λi-1) then edge functions 4 λa λb on edges
/// (0,1), (1,2), (2,0).
std::array<double, 6> p2_values(const std::array<double, 3>& l);
std::array<Vec2, 6> p2_gradients(const std::array<double, 3>& l, const std::array<Vec2, 3>& grad_lambda);
inline constexpr std::array<std::array<int, 2>, 3> kP2Edges{{{0, 1}, {1, 2}, {2, 0}}};

/// Mass matrix of the 1D P1 hats on a segment of length `len`.
inline std::array<std::array<double, 2>, 2> edge_p1_mass(double len) {
  return {{{len / 3.0, len / 6.0}, {len / 6.0, len / 3.0}}};
}

}  // namespace sdms
