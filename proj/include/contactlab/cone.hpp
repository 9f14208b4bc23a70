#ifndef CONTACTLAB_CONE_HPP
#define CONTACTLAB_CONE_HPP

#include <algorithm>
#include <optional>
#include <string>

#include "contactlab/lattice.hpp"

namespace contactlab {

using RatVec = std::vector<Rat>;

namespace fm {

/// One linear condition a . x >= b.
struct Row {
  RatVec a;
  Rat b;
};

/// Fourier-Motzkin elimination; returns a witness when the system is
/// feasible.  Sizes here are desk scale, so the pairwise blowup is fine.
inline std::optional<RatVec> feasible(std::vector<Row> rows, int k) {
  if (k == 0) {
    for (const auto& r : rows) {
      if (r.b > 0) return std::nullopt;
    }
    return RatVec{};
  }
  std::vector<Row> lower;  // x_k >= bound
  std::vector<Row> upper;  // x_k <= bound
  std::vector<Row> rest;
  for (auto& r : rows) {
    Rat c = r.a[static_cast<std::size_t>(k - 1)];
    r.a.pop_back();
    if (c > 0) {
      // x_k >= (b - a'.x') / c
      for (auto& v : r.a) v /= c;
      r.b /= c;
      lower.push_back(std::move(r));
    } else if (c < 0) {
      for (auto& v : r.a) v /= c;
      r.b /= c;
      upper.push_back(std::move(r));
    } else {
      rest.push_back(std::move(r));
    }
  }
  std::vector<Row> reduced = rest;
  for (const auto& lo : lower) {
    for (const auto& up : upper) {
      // lower bound <= upper bound:  (up.b - up.a x) - (lo.b - lo.a x) >= 0
      Row r;
      r.a.resize(static_cast<std::size_t>(k - 1));
      for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] = lo.a[i] - up.a[i];
      r.b = lo.b - up.b;
      reduced.push_back(std::move(r));
    }
  }
  auto sub = feasible(std::move(reduced), k - 1);
  if (!sub) return std::nullopt;
  RatVec x = *sub;
  // pick x_k inside [max lower, min upper]
  bool has_lo = false;
  bool has_up = false;
  Rat lo_val(0);
  Rat up_val(0);
  auto eval_bound = [&x](const Row& r) {
    Rat acc = r.b;
    for (std::size_t i = 0; i < r.a.size(); ++i) acc -= r.a[i] * x[i];
    return acc;
  };
  for (const auto& r : lower) {
    Rat v = eval_bound(r);
    if (!has_lo || v > lo_val) lo_val = v;
    has_lo = true;
  }
  for (const auto& r : upper) {
    Rat v = eval_bound(r);
    if (!has_up || v < up_val) up_val = v;
    has_up = true;
  }
  Rat pick(0);
  if (has_lo && has_up) {
    pick = (lo_val + up_val) / 2;
  } else if (has_lo) {
    pick = lo_val + 1;
  } else if (has_up) {
    pick = up_val - 1;
  }
  x.push_back(pick);
  return x;
}

}  // namespace fm

/// Rational polyhedral cone in the dual Lie algebra of an n-torus, given by
/// integer normals: C = { eta | <eta, v_i> >= 0 for all i }.  Normals must be
/// primitive; redundancy is a reported property rather than a hard error
/// since the quotient pipeline accepts generating sets.
class ConeSpec {
 public:
  ConeSpec(int n, std::vector<std::vector<long long>> normals) : n_(n) {
    if (n_ < 1) throw BadParams("cone needs torus dimension >= 1");
    for (const auto& v : normals) {
      if (static_cast<int>(v.size()) != n_) {
        throw DimensionMismatch("cone normal has wrong length");
      }
      std::vector<Int> row(v.begin(), v.end());
      Int g = content(row);
      if (g == 0) throw NotPrimitive("zero vector cannot be a cone normal");
      if (g != 1) throw NotPrimitive("cone normal is not primitive (content " + g.str() + ")");
      normals_.push_back(std::move(row));
    }
    if (normals_.empty()) throw BadParams("cone needs at least one normal");
  }

  int torus_dim() const { return n_; }
  int normal_count() const { return static_cast<int>(normals_.size()); }
  const std::vector<std::vector<Int>>& normals() const { return normals_; }

  /// n x d matrix with the normals as columns (the map tau of the quotient
  /// construction).
  IntMat tau() const {
    IntMat A(n_, normal_count());
    for (int j = 0; j < normal_count(); ++j) {
      for (int i = 0; i < n_; ++i) A.at(i, j) = normals_[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
    }
    return A;
  }

  /// Rational interior witness (<eta, v_i> >= 1 for all i), if any.
  std::optional<RatVec> interior_point() const {
    std::vector<fm::Row> rows;
    for (const auto& v : normals_) {
      fm::Row r;
      for (const Int& x : v) r.a.push_back(Rat(x));
      r.b = 1;
      rows.push_back(std::move(r));
    }
    return fm::feasible(std::move(rows), n_);
  }

  /// Relative-interior witness of the face with active set J:
  /// <eta, v_j> = 0 exactly on J, >= 1 off J.
  std::optional<RatVec> face_point(const std::vector<int>& J) const {
    std::vector<fm::Row> rows;
    for (int j : J) {
      fm::Row ge;
      fm::Row le;
      for (const Int& x : normals_[static_cast<std::size_t>(j)]) {
        ge.a.push_back(Rat(x));
        le.a.push_back(Rat(-x));
      }
      ge.b = 0;
      le.b = 0;
      rows.push_back(std::move(ge));
      rows.push_back(std::move(le));
    }
    for (int i = 0; i < normal_count(); ++i) {
      if (std::find(J.begin(), J.end(), i) != J.end()) continue;
      fm::Row r;
      for (const Int& x : normals_[static_cast<std::size_t>(i)]) r.a.push_back(Rat(x));
      r.b = 1;
      rows.push_back(std::move(r));
    }
    return fm::feasible(std::move(rows), n_);
  }

  /// Indices of normals whose removal leaves the cone unchanged.
  std::vector<int> redundant_normals() const {
    std::vector<int> out;
    for (int i = 0; i < normal_count(); ++i) {
      std::vector<fm::Row> rows;
      for (int j = 0; j < normal_count(); ++j) {
        fm::Row r;
        for (const Int& x : normals_[static_cast<std::size_t>(j)]) {
          r.a.push_back(j == i ? Rat(-x) : Rat(x));
        }
        r.b = j == i ? Rat(1) : Rat(0);
        rows.push_back(std::move(r));
      }
      // <eta, v_i> <= -1 while all others stay >= 0: feasible means v_i cuts
      if (!fm::feasible(std::move(rows), n_)) out.push_back(i);
    }
    return out;
  }

 private:
  int n_;
  std::vector<std::vector<Int>> normals_;
};

struct FaceReport {
  std::vector<int> active_set;
  int dimension = 0;                  // dimension of the face itself
  std::vector<Int> invariant_factors; // SNF of the active normal columns
  bool zbasis_flag = false;
  RatVec witness;                     // relative-interior point
};

namespace detail {

inline IntMat columns_of(const ConeSpec& C, const std::vector<int>& J) {
  IntMat A(C.torus_dim(), static_cast<int>(J.size()));
  for (std::size_t c = 0; c < J.size(); ++c) {
    for (int i = 0; i < C.torus_dim(); ++i) {
      A.at(i, static_cast<int>(c)) = C.normals()[static_cast<std::size_t>(J[c])][static_cast<std::size_t>(i)];
    }
  }
  return A;
}

inline bool zbasis_test(const std::vector<Int>& inv, int active_count) {
  int nonzero = 0;
  for (const Int& s : inv) {
    if (s != 0 && s != 1) return false;
    if (s != 0) ++nonzero;
  }
  return nonzero == active_count;
}

}  // namespace detail

/// Enumerate the proper faces of codimension 1..n-1 by exact rational
/// feasibility over active subsets.
inline std::vector<FaceReport> cone_faces(const ConeSpec& C) {
  if (!C.interior_point()) throw EmptyInterior("cone has empty interior");
  const int d = C.normal_count();
  const int n = C.torus_dim();
  std::vector<FaceReport> out;
  for (unsigned mask = 1; mask < (1u << d); ++mask) {
    std::vector<int> J;
    for (int j = 0; j < d; ++j) {
      if (mask & (1u << j)) J.push_back(j);
    }
    IntMat cols = detail::columns_of(C, J);
    auto inv = smith_invariants(cols);
    int rank = 0;
    for (const Int& s : inv) {
      if (s != 0) ++rank;
    }
    int face_dim = n - rank;
    if (face_dim <= 0 || face_dim >= n) continue;
    auto witness = C.face_point(J);
    if (!witness) continue;
    FaceReport rep;
    rep.active_set = J;
    rep.dimension = face_dim;
    rep.invariant_factors = inv;
    rep.zbasis_flag = detail::zbasis_test(inv, static_cast<int>(J.size()));
    rep.witness = *witness;
    out.push_back(std::move(rep));
  }
  return out;
}

struct GoodnessReport {
  bool good = false;
  std::optional<FaceReport> witness;  // failing face, if any
  int faces_checked = 0;
};

/// Good cone test: nonempty interior and every proper face's active normals
/// form a Z-basis of the lattice of their span.
inline GoodnessReport is_good(const ConeSpec& C) {
  GoodnessReport rep;
  auto faces = cone_faces(C);
  rep.faces_checked = static_cast<int>(faces.size());
  for (const auto& f : faces) {
    if (!f.zbasis_flag) {
      rep.witness = f;
      rep.good = false;
      return rep;
    }
  }
  rep.good = true;
  return rep;
}

/// Lens space L(p, q) bookkeeping with canonical aliases.
struct LensSpace {
  long long p = 0;
  long long q = 0;
  long long p_normalized = 0;
  long long q_normalized = 0;
  std::string alias;  // empty when no standard name applies
};

inline LensSpace lens_space_info(long long p, long long q) {
  long long a = std::abs(p);
  long long b = std::abs(q);
  while (b != 0) {
    long long t = a % b;
    a = b;
    b = t;
  }
  if (a != 1) throw NotCoprime("lens space needs coprime (p, q), gcd = " + std::to_string(a));
  LensSpace out;
  out.p = p;
  out.q = q;
  out.p_normalized = std::abs(p);
  if (out.p_normalized > 0) {
    out.q_normalized = ((q % out.p_normalized) + out.p_normalized) % out.p_normalized;
  } else {
    out.q_normalized = 1;  // L(0, +-1) only
  }
  if (out.p_normalized == 0) {
    out.alias = "S^1 x S^2";
  } else if (out.p_normalized == 1) {
    out.alias = "S^3";
  } else if (out.p_normalized == 2 && out.q_normalized == 1) {
    out.alias = "RP^3";
  }
  return out;
}

}  // namespace contactlab

#endif
