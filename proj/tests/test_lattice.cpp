#include <catch2/catch_amalgamated.hpp>

#include "contactlab/lattice.hpp"
#include "contactlab/manifold.hpp"

using namespace contactlab;

namespace {

IntMat from_rows(std::vector<std::vector<long long>> rows) {
  IntMat m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) m.at(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  return m;
}

std::vector<Int> ints(std::vector<long long> v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("Smith invariants on pinned matrices") {
  for (int k = 1; k <= 5; ++k) {
    auto inv = smith_invariants(IntMat::identity(k));
    REQUIRE(inv == ints(std::vector<long long>(static_cast<std::size_t>(k), 1)));
  }
  REQUIRE(smith_invariants(from_rows({{1, 1}, {0, 2}})) == ints({1, 2}));
  // the 2D example normals as columns: determinant -1, so (1, 1)
  REQUIRE(smith_invariants(from_rows({{0, -1}, {1, 1}})) == ints({1, 1}));
  // rank-deficient padding
  REQUIRE(smith_invariants(from_rows({{2, 4}, {4, 8}})) == ints({2, 0}));
  // 3 x 2 with a genuine index-2 sublattice
  REQUIRE(smith_invariants(from_rows({{1, 1}, {0, 2}, {0, 0}})) == ints({1, 2}));
}

TEST_CASE("Smith invariants are unimodular invariants") {
  Sampler rng(77);
  std::vector<IntMat> pool = {
      from_rows({{1, 1}, {0, 2}}),
      from_rows({{2, 0, 0}, {0, 3, 0}}),
      from_rows({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}}),
      from_rows({{6, 4}, {2, 8}, {10, 2}}),
  };
  for (const auto& A : pool) {
    auto base = smith_invariants(A);
    for (int trial = 0; trial < 20; ++trial) {
      IntMat U = random_unimodular(A.rows, rng);
      IntMat V = random_unimodular(A.cols, rng);
      REQUIRE(smith_invariants(U * (A * V)) == base);
    }
  }
}

TEST_CASE("Hermite column reduction produces kernels and right inverses") {
  // tau for normals (1,0), (0,1), (1,1): kernel spanned by +-(1,1,-1)
  IntMat tau = from_rows({{1, 0, 1}, {0, 1, 1}});
  auto K = kernel_basis(tau);
  REQUIRE(K.cols == 1);
  Int sign = K.at(0, 0) > 0 ? 1 : -1;
  REQUIRE(K.at(0, 0) == sign * 1);
  REQUIRE(K.at(1, 0) == sign * 1);
  REQUIRE(K.at(2, 0) == sign * -1);
  // kernel columns actually lie in the kernel
  IntMat prod = tau * K;
  for (const Int& x : prod.data) REQUIRE(x == 0);

  auto sigma = right_inverse(tau);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      Rat acc(0);
      for (int k = 0; k < 3; ++k) acc += Rat(tau.at(i, k)) * sigma[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
      REQUIRE(acc == (i == j ? Rat(1) : Rat(0)));
    }
  }

  // unimodular square matrix: trivial kernel
  IntMat uni = from_rows({{0, 1}, {-1, 1}});
  REQUIRE(kernel_basis(uni).cols == 0);

  // row-rank-deficient input has no right inverse
  IntMat flat = from_rows({{1, 2}, {2, 4}});
  REQUIRE_THROWS_AS(right_inverse(flat), RightInverseNotFound);
}

TEST_CASE("random unimodular matrices have determinant +-1 (via SNF)") {
  Sampler rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    IntMat U = random_unimodular(4, rng);
    auto inv = smith_invariants(U);
    REQUIRE(inv == ints({1, 1, 1, 1}));
  }
}
