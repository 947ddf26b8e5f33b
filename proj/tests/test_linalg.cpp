#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "sdms/linalg.hpp"

using namespace sdms;

namespace {

SparseMatrix from_dense(const oracle::Dense& d) {
  CooAccumulator acc(static_cast<int>(d.size()), static_cast<int>(d[0].size()));
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d[i].size(); ++j)
      if (d[i][j] != 0.0) acc.add(static_cast<int>(i), static_cast<int>(j), d[i][j]);
  return acc.finalize();
}

SparseMatrix laplacian_1d(int n) {
  CooAccumulator acc(n, n);
  for (int i = 0; i < n; ++i) {
    acc.add(i, i, 2.0);
    if (i > 0) acc.add(i, i - 1, -1.0);
    if (i + 1 < n) acc.add(i, i + 1, -1.0);
  }
  return acc.finalize();
}

}  // namespace

TEST(Coo, SumsDuplicatesAndSorts) {
  CooAccumulator acc(3, 3);
  acc.add(2, 1, 1.0);
  acc.add(0, 2, 4.0);
  acc.add(2, 1, 2.5);
  acc.add(0, 0, 1.0);
  const auto a = acc.finalize();
  EXPECT_EQ(a.nnz(), 3u);
  EXPECT_EQ(a.at(2, 1), 3.5);
  EXPECT_EQ(a.col_idx()[0], 0);
  EXPECT_EQ(a.col_idx()[1], 2);
  EXPECT_EQ(a.at(1, 1), 0.0);
}

TEST(Coo, BatchingDoesNotChangeResult) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> idx(0, 19);
  std::uniform_real_distribution<double> val(-1, 1);
  std::vector<std::tuple<int, int, double>> entries;
  for (int i = 0; i < 500; ++i) entries.emplace_back(idx(rng), idx(rng), val(rng));
  CooAccumulator whole(20, 20), part1(20, 20), part2(20, 20);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto [r, c, v] = entries[i];
    whole.add(r, c, v);
    (i < 250 ? part1 : part2).add(r, c, v);
  }
  part1.append(part2);
  EXPECT_TRUE(whole.finalize() == part1.finalize());
}

TEST(Sparse, MultiplyTransposeAdd) {
  const oracle::Dense d{{1, 0, 2}, {0, 3, 0}, {4, 0, 5}};
  const auto a = from_dense(d);
  const Vector x{1, 2, 3};
  const auto y = a * x;
  EXPECT_EQ(y, (Vector{7, 6, 19}));
  const auto t = a.transpose();
  EXPECT_EQ(t.at(0, 2), 4.0);
  EXPECT_EQ(t.at(2, 0), 2.0);
  EXPECT_EQ(a.asymmetry(), 2.0);
  const auto s = add(a, t, 1.0, -1.0);
  EXPECT_EQ(s.at(0, 2), -2.0);
  EXPECT_EQ(a.norm_inf(), 9.0);
  const auto p = multiply(a, SparseMatrix::identity(3));
  EXPECT_TRUE(p == a);
  const auto aa = multiply(a, a);
  EXPECT_EQ(aa.at(0, 0), 1 + 8);
  EXPECT_EQ(aa.at(2, 2), 8 + 25);
}

TEST(Sparse, DirichletElimination) {
  const auto a0 = laplacian_1d(5);
  auto a = a0;
  Vector rhs(5, 1.0);
  std::vector<bool> mask{true, false, false, false, true};
  const Vector vals{2.0, 0, 0, 0, 3.0};
  apply_dirichlet(a, rhs, mask, vals);
  EXPECT_EQ(a.at(0, 0), 1.0);
  EXPECT_EQ(a.at(1, 0), 0.0);
  EXPECT_EQ(a.at(0, 1), 0.0);
  EXPECT_EQ(a.asymmetry(), 0.0);
  EXPECT_EQ(rhs[0], 2.0);
  EXPECT_EQ(rhs[1], 1.0 + 2.0);
  const auto x = lu_solve(a, {rhs})[0];
  // Linear-plus-quadratic exact solution of -u'' = 1 with u(0)=2, u(4)=3 on the grid.
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(x[i], 2.0 + 0.25 * i + 0.5 * i * (4 - i), 1e-12);
  Vector rhs2(5, 1.0);
  dirichlet_rhs(a0, rhs2, mask, vals);
  EXPECT_EQ(rhs2, rhs);
}

TEST(Cg, TwoByTwo) {
  const auto a = from_dense({{4, 1}, {1, 3}});
  const auto r = cg_solve(a, Vector{1, 2}, 1e-14, 10);
  EXPECT_NEAR(r.x[0], 1.0 / 11.0, 1e-12);
  EXPECT_NEAR(r.x[1], 7.0 / 11.0, 1e-12);
}

TEST(Cg, IdentityOneIteration) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  Vector b(100);
  for (auto& v : b) v = u(rng);
  const auto r = cg_solve(SparseMatrix::identity(100), b, 1e-12, 10);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_LT(oracle::max_abs_diff(r.x, b), 1e-14);
}

TEST(Cg, LaplacianMatchesDirect) {
  const auto a = laplacian_1d(50);
  const Vector b(50, 1.0);
  const auto r = cg_solve(a, b, 1e-12, 200);
  const auto x = oracle::dense_solve(oracle::to_dense(a), b);
  EXPECT_LE(oracle::max_abs_diff(r.x, x), 1e-12 * oracle::max_abs(x) * 50);
  const auto res = a * r.x;
  double rn = 0;
  for (int i = 0; i < 50; ++i) rn += (res[i] - b[i]) * (res[i] - b[i]);
  EXPECT_LE(std::sqrt(rn), 1e-12 * norm2(b));
}

TEST(Cg, EnergyErrorMonotone) {
  const auto a = laplacian_1d(40);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  Vector b(40);
  for (auto& v : b) v = u(rng);
  const auto x = oracle::dense_solve(oracle::to_dense(a), b);
  std::vector<double> energy;
  cg_solve(a, b, 1e-13, 200, {}, {}, [&](std::span<const double> xk) {
    Vector e(40);
    for (int i = 0; i < 40; ++i) e[i] = xk[i] - x[i];
    energy.push_back(dot(e, a * e));
  });
  ASSERT_GT(energy.size(), 3u);
  for (std::size_t k = 1; k < energy.size(); ++k) EXPECT_LE(energy[k], energy[k - 1] * (1 + 1e-12) + 1e-28);
}

TEST(Cg, NonConvergenceReportsResidual) {
  const auto a = laplacian_1d(200);
  try {
    cg_solve(a, Vector(200, 1.0), 1e-14, 3);
    FAIL();
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.iterations, 3);
    EXPECT_GT(e.residual, 0.0);
  }
}

TEST(Lu, PermutationNeedsPivoting) {
  const auto a = from_dense({{0, 1}, {1, 0}});
  const auto x = lu_solve(a, {{2, 3}})[0];
  EXPECT_NEAR(x[0], 3.0, 1e-15);
  EXPECT_NEAR(x[1], 2.0, 1e-15);
}

TEST(Lu, Identity) {
  const Vector b{1, -2, 3, 4};
  EXPECT_EQ(lu_solve(SparseMatrix::identity(4), {b})[0], b);
}

TEST(Lu, RandomSparseMatchesDenseOracle) {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_int_distribution<int> col(0, 19);
  oracle::Dense d(20, std::vector<double>(20, 0.0));
  for (int i = 0; i < 20; ++i) {
    d[i][i] = 4.0 + u(rng);
    for (int k = 0; k < 3; ++k) d[i][col(rng)] += u(rng);
  }
  Vector b(20);
  for (auto& v : b) v = u(rng);
  const auto a = from_dense(d);
  const auto x = lu_solve(a, {b})[0];
  const auto xo = oracle::dense_solve(d, b);
  EXPECT_LE(oracle::max_abs_diff(x, xo), 1e-10);
  const auto ax = a * x;
  double rn = 0;
  for (int i = 0; i < 20; ++i) rn += (ax[i] - b[i]) * (ax[i] - b[i]);
  EXPECT_LE(std::sqrt(rn), 1e-10 * (a.norm_inf() * norm2(x) + norm2(b)));
}

TEST(Lu, FactorOnceMatchesFactorPerSolve) {
  const auto a = laplacian_1d(30);
  std::vector<Vector> rhs;
  for (int k = 0; k < 3; ++k) {
    Vector b(30);
    for (int i = 0; i < 30; ++i) b[i] = std::sin(0.3 * (k + 1) * i);
    rhs.push_back(b);
  }
  const SparseLu lu(a);
  for (const auto& b : rhs) {
    EXPECT_EQ(lu.solve(b), lu_solve(a, {b})[0]);
    EXPECT_EQ(lu.solve(b), lu.solve(b));
  }
}

TEST(Lu, SingularNamesRow) {
  const auto a = from_dense({{1, 2, 0}, {2, 4, 0}, {0, 0, 1}});
  try {
    SparseLu lu(a);
    FAIL();
  } catch (const SingularMatrixError& e) {
    EXPECT_GE(e.row, 0);
    EXPECT_LT(e.row, 2);
  }
}

TEST(Ldlt, MatchesLu) {
  const auto a = laplacian_1d(25);
  Vector b(25);
  for (int i = 0; i < 25; ++i) b[i] = 1.0 + i;
  const SparseLdlt ldlt(a);
  EXPECT_LE(oracle::max_abs_diff(ldlt.solve(b), lu_solve(a, {b})[0]), 1e-10);
}

TEST(Gmres, NonsymmetricSystem) {
  const oracle::Dense d{{4, 1, 0}, {-1, 3, 1}, {0, 2, 5}};
  const auto a = from_dense(d);
  const Vector b{1, 2, 3};
  const auto r = gmres([&](std::span<const double> x, std::span<double> y) { a.multiply(x, y); }, b, 1e-13, 50);
  EXPECT_LE(oracle::max_abs_diff(r.x, oracle::dense_solve(d, b)), 1e-12);
}
