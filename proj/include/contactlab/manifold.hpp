#ifndef CONTACTLAB_MANIFOLD_HPP
#define CONTACTLAB_MANIFOLD_HPP

#include <cstdint>
#include <optional>
#include <random>

#include "contactlab/forms.hpp"

namespace contactlab {

/// Deterministic seeded sampler.  Uniform and normal draws are hand-rolled
/// from the raw engine stream so the byte-for-byte output of a run depends
/// only on the seed.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) {
    double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u;
    double v;
    double s;
    do {
      u = uniform(-1.0, 1.0);
      v = uniform(-1.0, 1.0);
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  std::uint64_t raw() { return rng_(); }

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Chart, optionally cut out of an ambient chart as a regular level set.
/// All fields and forms on an embedded spec live in the ambient chart;
/// checks restrict to per-point tangent bases.
class ManifoldSpec {
 public:
  ManifoldSpec() = default;

  static ManifoldSpec intrinsic(Chart chart) {
    validate_chart(chart);
    ManifoldSpec m;
    m.chart_ = std::move(chart);
    return m;
  }

  static ManifoldSpec embedded(Chart ambient, std::vector<ScalarField> constraints) {
    validate_chart(ambient);
    ManifoldSpec m;
    m.chart_ = std::move(ambient);
    m.constraints_ = std::move(constraints);
    return m;
  }

  static void validate_chart(const Chart& chart) {
    if (chart.coords.empty()) throw DimensionMismatch("chart needs at least one coordinate");
    if (chart.periodic.size() != chart.coords.size() ||
        chart.range.size() != chart.coords.size()) {
      throw DimensionMismatch("chart flag/range lists must match the coordinate count");
    }
    for (std::size_t i = 0; i < chart.coords.size(); ++i) {
      for (std::size_t j = i + 1; j < chart.coords.size(); ++j) {
        if (chart.coords[i] == chart.coords[j]) {
          throw DimensionMismatch("duplicate coordinate name '" + chart.coords[i] + "'");
        }
      }
    }
  }

  const Chart& chart() const { return chart_; }
  bool is_embedded() const { return !constraints_.empty(); }
  const std::vector<ScalarField>& constraints() const { return constraints_; }
  int ambient_dim() const { return chart_.dim(); }
  int intrinsic_dim() const { return chart_.dim() - static_cast<int>(constraints_.size()); }

  /// Jacobian of the constraint map (rows = constraints).
  Mat constraint_jacobian(const Vec& p) const {
    Mat J(static_cast<Eigen::Index>(constraints_.size()), chart_.dim());
    for (std::size_t k = 0; k < constraints_.size(); ++k) {
      J.row(static_cast<Eigen::Index>(k)) = constraints_[k].gradient(p).transpose();
    }
    return J;
  }

  Vec constraint_values(const Vec& p) const {
    Vec F(static_cast<Eigen::Index>(constraints_.size()));
    for (std::size_t k = 0; k < constraints_.size(); ++k) F[static_cast<Eigen::Index>(k)] = constraints_[k].value(p);
    return F;
  }

  /// Orthonormal tangent basis (columns).  Intrinsic charts use the
  /// coordinate frame; embedded specs take the nullspace of the constraint
  /// Jacobian from a column-pivoted QR of its transpose.
  Mat tangent_basis(const Vec& p) const {
    if (!is_embedded()) return Mat::Identity(chart_.dim(), chart_.dim());
    Mat J = constraint_jacobian(p);
    Eigen::ColPivHouseholderQR<Mat> qr(J.transpose());
    const auto rank = qr.rank();
    if (rank < J.rows()) {
      throw DegenerateTangentBasis("constraint Jacobian is rank deficient at a sample point");
    }
    Mat Q = qr.householderQ();
    return Q.rightCols(chart_.dim() - rank);
  }

  /// Newton projection onto the constraint set along the constraint gradient.
  /// Returns false if the iteration fails to reach |F| < tol.
  bool project(Vec& p, int max_iter = 25, double tol = 1e-12) const {
    if (!is_embedded()) return true;
    for (int it = 0; it < max_iter; ++it) {
      Vec F = constraint_values(p);
      if (F.lpNorm<Eigen::Infinity>() < tol) return true;
      Mat J = constraint_jacobian(p);
      Mat JJt = J * J.transpose();
      Vec lambda = JJt.ldlt().solve(F);
      p -= J.transpose() * lambda;
    }
    return constraint_values(p).lpNorm<Eigen::Infinity>() < tol;
  }

  bool satisfies_domain(const Vec& p) const {
    std::span<const double> ps(p.data(), static_cast<std::size_t>(p.size()));
    for (const auto& c : chart_.domain_constraints) {
      if (c.eval<double>(ps) <= 0.0) return false;
    }
    return true;
  }

  /// One seeded sample respecting constraints; rejection plus Newton
  /// projection for embedded specs.
  Vec sample(Sampler& rng) const {
    const int n = chart_.dim();
    for (int attempt = 0; attempt < 200; ++attempt) {
      Vec p(n);
      if (is_embedded()) {
        for (int i = 0; i < n; ++i) p[i] = rng.normal();
        if (p.norm() < 1e-6) continue;
        if (!project(p)) continue;
      } else {
        for (int i = 0; i < n; ++i) {
          auto [lo, hi] = chart_.range[static_cast<std::size_t>(i)];
          p[i] = rng.uniform(lo, hi);
        }
      }
      if (!satisfies_domain(p)) continue;
      return p;
    }
    throw DomainError("sampler failed to produce a point satisfying the constraints");
  }

  std::vector<Vec> sample_many(Sampler& rng, int count) const {
    std::vector<Vec> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(sample(rng));
    return out;
  }

 private:
  Chart chart_;
  std::vector<ScalarField> constraints_;
};

/// Residual of a form on the tangent frame at p (frame-restricted norm).
inline double tangent_residual(const ManifoldSpec& M, const DifferentialForm& a, const Vec& p) {
  return frame_norm(a, p, M.tangent_basis(p));
}

/// Random smooth scalar field adapted to the chart: trig monomials in
/// periodic coordinates, low-degree polynomials elsewhere.  Coefficients are
/// small so compositions stay well-scaled.
inline ScalarField random_scalar_field(const Chart& chart, Sampler& rng) {
  const int n = chart.dim();
  struct Term {
    double coeff;
    // per coordinate: 0 -> 1, 1 -> x (or cos x), 2 -> sin x, 3 -> x^2
    std::vector<int> shape;
  };
  std::vector<Term> terms;
  terms.push_back({rng.uniform(-1.0, 1.0), std::vector<int>(static_cast<std::size_t>(n), 0)});
  const int extra = 4;
  for (int t = 0; t < extra; ++t) {
    Term term;
    term.coeff = rng.uniform(-1.0, 1.0);
    term.shape.assign(static_cast<std::size_t>(n), 0);
    int touched = 0;
    for (int i = 0; i < n; ++i) {
      double roll = rng.uniform(0.0, 1.0);
      if (touched < 2 && roll < 0.6) {
        if (chart.periodic[static_cast<std::size_t>(i)]) {
          term.shape[static_cast<std::size_t>(i)] = roll < 0.3 ? 1 : 2;
        } else {
          term.shape[static_cast<std::size_t>(i)] = roll < 0.2 ? 3 : 1;
        }
        ++touched;
      }
    }
    terms.push_back(std::move(term));
  }
  std::vector<bool> periodic = chart.periodic;
  return make_field(chart, [terms, periodic](auto p) {
    using S = typename std::decay_t<decltype(p)>::value_type;
    S acc(0.0);
    for (const auto& term : terms) {
      S prod(term.coeff);
      for (std::size_t i = 0; i < p.size(); ++i) {
        switch (term.shape[i]) {
          case 0: break;
          case 1:
            prod = prod * (periodic[i] ? cos(p[i]) : p[i]);
            break;
          case 2:
            prod = prod * sin(p[i]);
            break;
          case 3:
            prod = prod * p[i] * p[i];
            break;
          default: break;
        }
      }
      acc = acc + prod;
    }
    return acc;
  });
}

inline VectorField random_vector_field(const Chart& chart, Sampler& rng) {
  std::vector<ScalarField> comps;
  for (int i = 0; i < chart.dim(); ++i) comps.push_back(random_scalar_field(chart, rng));
  return VectorField(chart, comps);
}

inline DifferentialForm random_form(const Chart& chart, int degree, Sampler& rng) {
  DifferentialForm out(degree, chart);
  const int n = chart.dim();
  std::vector<int> pick(static_cast<std::size_t>(degree));
  if (degree == 0) {
    out.set_coefficient({}, random_scalar_field(chart, rng));
    return out;
  }
  for (int i = 0; i < degree; ++i) pick[static_cast<std::size_t>(i)] = i;
  for (;;) {
    out.set_coefficient(MultiIndex(pick.begin(), pick.end()), random_scalar_field(chart, rng));
    int pos = degree - 1;
    while (pos >= 0 && pick[static_cast<std::size_t>(pos)] == n - degree + pos) --pos;
    if (pos < 0) break;
    ++pick[static_cast<std::size_t>(pos)];
    for (int q = pos + 1; q < degree; ++q) {
      pick[static_cast<std::size_t>(q)] = pick[static_cast<std::size_t>(q - 1)] + 1;
    }
  }
  return out;
}

}  // namespace contactlab

#endif
