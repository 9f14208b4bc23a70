#ifndef CONTACTLAB_LATTICE_HPP
#define CONTACTLAB_LATTICE_HPP

#include <boost/multiprecision/cpp_int.hpp>
#include <vector>

#include "contactlab/errors.hpp"

namespace contactlab {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

/// Dense arbitrary-precision integer matrix, row major.
struct IntMat {
  int rows = 0;
  int cols = 0;
  std::vector<Int> data;

  IntMat() = default;
  IntMat(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, Int(0)) {}

  Int& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  const Int& at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  static IntMat identity(int n) {
    IntMat m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }

  IntMat transposed() const {
    IntMat t(cols, rows);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) t.at(c, r) = at(r, c);
    }
    return t;
  }

  bool operator==(const IntMat& o) const {
    return rows == o.rows && cols == o.cols && data == o.data;
  }
};

inline IntMat operator*(const IntMat& a, const IntMat& b) {
  if (a.cols != b.rows) throw DimensionMismatch("integer matrix product size mismatch");
  IntMat out(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    for (int k = 0; k < a.cols; ++k) {
      if (a.at(i, k) == 0) continue;
      for (int j = 0; j < b.cols; ++j) out.at(i, j) += a.at(i, k) * b.at(k, j);
    }
  }
  return out;
}

inline Int gcd_int(Int a, Int b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    Int t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline Int content(const std::vector<Int>& v) {
  Int g = 0;
  for (const Int& x : v) g = gcd_int(g, x);
  return g;
}

/// Smith normal form invariant factors: nonnegative, divisibility-ordered,
/// min(rows, cols) entries with zeros padding the rank deficiency.
inline std::vector<Int> smith_invariants(IntMat A) {
  const int m = A.rows;
  const int n = A.cols;
  const int steps = std::min(m, n);
  std::vector<Int> result(static_cast<std::size_t>(steps), Int(0));

  for (int t = 0; t < steps; ++t) {
    // find a nonzero pivot in the trailing block
    int pr = -1;
    int pc = -1;
    for (int i = t; i < m && pr < 0; ++i) {
      for (int j = t; j < n; ++j) {
        if (A.at(i, j) != 0) {
          pr = i;
          pc = j;
          break;
        }
      }
    }
    if (pr < 0) break;  // trailing block zero; remaining invariants stay 0
    for (int j = 0; j < n; ++j) std::swap(A.at(t, j), A.at(pr, j));
    for (int i = 0; i < m; ++i) std::swap(A.at(i, t), A.at(i, pc));

    for (;;) {
      bool clean = true;
      // clear the pivot column
      for (int i = t + 1; i < m; ++i) {
        while (A.at(i, t) != 0) {
          Int q = A.at(i, t) / A.at(t, t);
          for (int j = t; j < n; ++j) A.at(i, j) -= q * A.at(t, j);
          if (A.at(i, t) != 0) {
            for (int j = t; j < n; ++j) std::swap(A.at(t, j), A.at(i, j));
            clean = false;
          }
        }
      }
      // clear the pivot row
      for (int j = t + 1; j < n; ++j) {
        while (A.at(t, j) != 0) {
          Int q = A.at(t, j) / A.at(t, t);
          for (int i = t; i < m; ++i) A.at(i, j) -= q * A.at(i, t);
          if (A.at(t, j) != 0) {
            for (int i = t; i < m; ++i) std::swap(A.at(i, t), A.at(i, j));
            clean = false;
          }
        }
      }
      if (!clean) continue;
      // enforce divisibility of the trailing block by the pivot
      bool fixed = true;
      for (int i = t + 1; i < m && fixed; ++i) {
        for (int j = t + 1; j < n; ++j) {
          if (A.at(i, j) % A.at(t, t) != 0) {
            for (int jj = t; jj < n; ++jj) A.at(t, jj) += A.at(i, jj);
            fixed = false;
            break;
          }
        }
      }
      if (fixed) break;
    }
    if (A.at(t, t) < 0) {
      for (int j = t; j < n; ++j) A.at(t, j) = -A.at(t, j);
    }
    result[static_cast<std::size_t>(t)] = A.at(t, t);
  }
  return result;
}

/// Column-style Hermite reduction A U = [H | 0] with U unimodular.
struct HermiteDecomposition {
  IntMat H;        // same shape as A, trailing columns zero
  IntMat U;        // cols x cols unimodular
  int rank = 0;
  std::vector<int> pivot_rows;  // row of the pivot for each of the first `rank` columns
};

inline HermiteDecomposition hermite_columns(IntMat A) {
  const int m = A.rows;
  const int n = A.cols;
  IntMat U = IntMat::identity(n);
  int t = 0;
  std::vector<int> pivots;
  for (int r = 0; r < m && t < n; ++r) {
    int j0 = -1;
    for (int j = t; j < n; ++j) {
      if (A.at(r, j) != 0) {
        j0 = j;
        break;
      }
    }
    if (j0 < 0) continue;
    auto swap_cols = [&](IntMat& M, int a, int b) {
      for (int i = 0; i < M.rows; ++i) std::swap(M.at(i, a), M.at(i, b));
    };
    if (j0 != t) {
      swap_cols(A, j0, t);
      swap_cols(U, j0, t);
    }
    for (int j = t + 1; j < n; ++j) {
      while (A.at(r, j) != 0) {
        Int q = A.at(r, j) / A.at(r, t);
        for (int i = 0; i < m; ++i) A.at(i, j) -= q * A.at(i, t);
        for (int i = 0; i < n; ++i) U.at(i, j) -= q * U.at(i, t);
        if (A.at(r, j) != 0) {
          swap_cols(A, j, t);
          swap_cols(U, j, t);
        }
      }
    }
    if (A.at(r, t) < 0) {
      for (int i = 0; i < m; ++i) A.at(i, t) = -A.at(i, t);
      for (int i = 0; i < n; ++i) U.at(i, t) = -U.at(i, t);
    }
    pivots.push_back(r);
    ++t;
  }
  return {std::move(A), std::move(U), t, std::move(pivots)};
}

/// Integer basis of ker A (columns), from the Hermite factorization.
inline IntMat kernel_basis(const IntMat& A) {
  auto hd = hermite_columns(A);
  IntMat K(A.cols, A.cols - hd.rank);
  for (int j = hd.rank; j < A.cols; ++j) {
    for (int i = 0; i < A.cols; ++i) K.at(i, j - hd.rank) = hd.U.at(i, j);
  }
  return K;
}

/// Rational right inverse of A (A sigma = I) with smallest-index pivots;
/// requires full row rank.
inline std::vector<std::vector<Rat>> right_inverse(const IntMat& A) {
  auto hd = hermite_columns(A);
  const int m = A.rows;
  if (hd.rank != m) {
    throw RightInverseNotFound("matrix has row rank " + std::to_string(hd.rank) + " < " +
                               std::to_string(m));
  }
  // H restricted to the pivot structure is lower triangular over the pivot
  // rows in order, so solve H y_k = e_k by forward substitution.
  std::vector<std::vector<Rat>> sigma(static_cast<std::size_t>(A.cols),
                                      std::vector<Rat>(static_cast<std::size_t>(m), Rat(0)));
  for (int k = 0; k < m; ++k) {
    std::vector<Rat> y(static_cast<std::size_t>(m), Rat(0));
    for (int idx = 0; idx < m; ++idx) {
      int row = hd.pivot_rows[static_cast<std::size_t>(idx)];
      Rat acc = row == k ? Rat(1) : Rat(0);
      for (int jj = 0; jj < idx; ++jj) {
        acc -= Rat(hd.H.at(row, jj)) * y[static_cast<std::size_t>(jj)];
      }
      y[static_cast<std::size_t>(idx)] = acc / Rat(hd.H.at(row, idx));
    }
    // sigma column k = U[:, :m] * y
    for (int i = 0; i < A.cols; ++i) {
      Rat acc(0);
      for (int jj = 0; jj < m; ++jj) {
        acc += Rat(hd.U.at(i, jj)) * y[static_cast<std::size_t>(jj)];
      }
      sigma[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = acc;
    }
  }
  return sigma;
}

/// Seeded random unimodular matrix as a product of elementary operations.
template <class Rng>
IntMat random_unimodular(int n, Rng& rng, int ops = 12) {
  IntMat U = IntMat::identity(n);
  for (int k = 0; k < ops; ++k) {
    int i = static_cast<int>(rng.raw() % static_cast<std::uint64_t>(n));
    int j = static_cast<int>(rng.raw() % static_cast<std::uint64_t>(n));
    if (i == j) {
      for (int c = 0; c < n; ++c) U.at(i, c) = -U.at(i, c);
      continue;
    }
    Int q = static_cast<long long>(rng.raw() % 5) - 2;
    if (q == 0) q = 1;
    for (int c = 0; c < n; ++c) U.at(i, c) += q * U.at(j, c);
  }
  return U;
}

}  // namespace contactlab

#endif
