#ifndef CONTACTLAB_FORMS_HPP
#define CONTACTLAB_FORMS_HPP

#include <algorithm>
#include <map>
#include <span>
#include <vector>

#include "contactlab/field.hpp"

namespace contactlab {

/// Strictly increasing multi-index; the empty index addresses a 0-form.
using MultiIndex = std::vector<int>;

namespace detail {

/// Insert coordinate j into increasing index I.  Returns the sign of the
/// permutation moving j to its sorted slot, or 0 when j already occurs.
inline int insert_index(const MultiIndex& I, int j, MultiIndex& out) {
  out.clear();
  out.reserve(I.size() + 1);
  int sign = 1;
  bool placed = false;
  for (int v : I) {
    if (v == j) return 0;
    if (!placed && v > j) {
      out.push_back(j);
      placed = true;
    }
    if (!placed) sign = -sign;
    out.push_back(v);
  }
  if (!placed) out.push_back(j);
  return sign;
}

/// Merge two increasing indices with the shuffle sign; 0 if they intersect.
inline int merge_indices(const MultiIndex& I, const MultiIndex& J, MultiIndex& out) {
  out.clear();
  out.reserve(I.size() + J.size());
  std::size_t a = 0;
  std::size_t b = 0;
  int sign = 1;
  while (a < I.size() && b < J.size()) {
    if (I[a] == J[b]) return 0;
    if (I[a] < J[b]) {
      out.push_back(I[a++]);
    } else {
      // J[b] hops over the remaining entries of I
      if ((I.size() - a) % 2 == 1) sign = -sign;
      out.push_back(J[b++]);
    }
  }
  while (a < I.size()) out.push_back(I[a++]);
  while (b < J.size()) out.push_back(J[b++]);
  return sign;
}

template <class S>
S submatrix_det(const std::vector<std::vector<S>>& cols, const MultiIndex& rows,
                std::vector<int> active_cols) {
  // Laplace expansion along the first row; k is tiny here.
  const std::size_t k = rows.size();
  if (k == 0) return S(1.0);
  if (k == 1) return cols[static_cast<std::size_t>(active_cols[0])][static_cast<std::size_t>(rows[0])];
  S acc(0.0);
  MultiIndex rest(rows.begin() + 1, rows.end());
  for (std::size_t c = 0; c < active_cols.size(); ++c) {
    std::vector<int> remaining;
    remaining.reserve(active_cols.size() - 1);
    for (std::size_t cc = 0; cc < active_cols.size(); ++cc) {
      if (cc != c) remaining.push_back(active_cols[cc]);
    }
    S minor = submatrix_det(cols, rest, std::move(remaining));
    S term = cols[static_cast<std::size_t>(active_cols[c])][static_cast<std::size_t>(rows[0])] * minor;
    acc = (c % 2 == 0) ? acc + term : acc - term;
  }
  return acc;
}

}  // namespace detail

/// Degree-k form stored as scalar coefficients over increasing multi-indices.
/// Absent index means zero coefficient.
class DifferentialForm {
 public:
  DifferentialForm() = default;
  DifferentialForm(int degree, Chart chart) : degree_(degree), chart_(std::move(chart)) {
    if (degree_ < 0 || degree_ > chart_.dim()) {
      throw DegreeOverflow("form degree outside [0, dim]");
    }
  }

  int degree() const { return degree_; }
  const Chart& chart() const { return chart_; }
  const std::map<MultiIndex, ScalarField>& coefficients() const { return coeffs_; }

  void set_coefficient(MultiIndex idx, ScalarField f) {
    if (static_cast<int>(idx.size()) != degree_) {
      throw DimensionMismatch("multi-index length must equal form degree");
    }
    if (!std::is_sorted(idx.begin(), idx.end()) ||
        std::adjacent_find(idx.begin(), idx.end()) != idx.end()) {
      throw DimensionMismatch("multi-index must be strictly increasing");
    }
    for (int v : idx) {
      if (v < 0 || v >= chart_.dim()) throw DimensionMismatch("multi-index entry out of range");
    }
    coeffs_[std::move(idx)] = std::move(f);
  }

  void add_coefficient(const MultiIndex& idx, const ScalarField& f) {
    auto it = coeffs_.find(idx);
    if (it == coeffs_.end()) {
      set_coefficient(idx, f);
    } else {
      it->second = it->second + f;
    }
  }

  const ScalarField* coefficient(const MultiIndex& idx) const {
    auto it = coeffs_.find(idx);
    return it == coeffs_.end() ? nullptr : &it->second;
  }

 private:
  int degree_ = 0;
  Chart chart_;
  std::map<MultiIndex, ScalarField> coeffs_;
};

inline DifferentialForm zero_form(int degree, const Chart& chart) {
  return DifferentialForm(degree, chart);
}

inline DifferentialForm scalar_as_form(const ScalarField& f) {
  DifferentialForm out(0, f.chart());
  out.set_coefficient({}, f);
  return out;
}

/// dx_i as a 1-form.
inline DifferentialForm coordinate_form(const Chart& chart, int i) {
  DifferentialForm out(1, chart);
  out.set_coefficient({i}, constant_field(chart, 1.0));
  return out;
}

inline DifferentialForm operator+(const DifferentialForm& a, const DifferentialForm& b) {
  require_same_chart(a.chart(), b.chart(), "form sum");
  if (a.degree() != b.degree()) throw DimensionMismatch("form sum needs equal degrees");
  DifferentialForm out(a.degree(), a.chart());
  for (const auto& [idx, f] : a.coefficients()) out.add_coefficient(idx, f);
  for (const auto& [idx, f] : b.coefficients()) out.add_coefficient(idx, f);
  return out;
}

inline DifferentialForm operator-(const DifferentialForm& a, const DifferentialForm& b) {
  require_same_chart(a.chart(), b.chart(), "form difference");
  if (a.degree() != b.degree()) throw DimensionMismatch("form difference needs equal degrees");
  DifferentialForm out(a.degree(), a.chart());
  for (const auto& [idx, f] : a.coefficients()) out.add_coefficient(idx, f);
  for (const auto& [idx, f] : b.coefficients()) out.add_coefficient(idx, -f);
  return out;
}

inline DifferentialForm operator*(const ScalarField& s, const DifferentialForm& a) {
  DifferentialForm out(a.degree(), a.chart());
  for (const auto& [idx, f] : a.coefficients()) out.set_coefficient(idx, s * f);
  return out;
}

inline DifferentialForm operator*(double s, const DifferentialForm& a) {
  DifferentialForm out(a.degree(), a.chart());
  for (const auto& [idx, f] : a.coefficients()) out.set_coefficient(idx, s * f);
  return out;
}

inline DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
  require_same_chart(a.chart(), b.chart(), "wedge");
  if (a.degree() + b.degree() > a.chart().dim()) {
    throw DegreeOverflow("wedge degree exceeds chart dimension");
  }
  DifferentialForm out(a.degree() + b.degree(), a.chart());
  MultiIndex merged;
  for (const auto& [I, fa] : a.coefficients()) {
    for (const auto& [J, fb] : b.coefficients()) {
      int sign = detail::merge_indices(I, J, merged);
      if (sign == 0) continue;
      out.add_coefficient(merged, static_cast<double>(sign) * (fa * fb));
    }
  }
  return out;
}

inline DifferentialForm exterior_derivative(const DifferentialForm& a) {
  if (a.degree() >= a.chart().dim()) {
    throw DegreeOverflow("exterior derivative of a top-degree form");
  }
  DifferentialForm out(a.degree() + 1, a.chart());
  MultiIndex target;
  for (const auto& [I, f] : a.coefficients()) {
    for (int j = 0; j < a.chart().dim(); ++j) {
      int sign = detail::insert_index(I, j, target);
      if (sign == 0) continue;
      out.add_coefficient(target, static_cast<double>(sign) * partial(f, j));
    }
  }
  return out;
}

inline DifferentialForm interior_product(const VectorField& X, const DifferentialForm& a) {
  require_same_chart(X.chart(), a.chart(), "interior_product");
  if (a.degree() < 1) throw DimensionMismatch("interior product needs degree >= 1");
  DifferentialForm out(a.degree() - 1, a.chart());
  for (const auto& [I, f] : a.coefficients()) {
    // a(X, e_J) with I = sort(i :: J): the slot of i inside I fixes the sign.
    for (std::size_t slot = 0; slot < I.size(); ++slot) {
      MultiIndex J;
      J.reserve(I.size() - 1);
      for (std::size_t s = 0; s < I.size(); ++s) {
        if (s != slot) J.push_back(I[s]);
      }
      double sign = (slot % 2 == 0) ? 1.0 : -1.0;
      out.add_coefficient(J, sign * (X.component(I[slot]) * f));
    }
  }
  return out;
}

/// Cartan formula.
inline DifferentialForm lie_derivative(const VectorField& X, const DifferentialForm& a) {
  require_same_chart(X.chart(), a.chart(), "lie_derivative");
  if (a.degree() == 0) return scalar_as_form(derive_along(*a.coefficient({}), X));
  if (a.degree() == a.chart().dim()) {
    return exterior_derivative(interior_product(X, a));
  }
  return exterior_derivative(interior_product(X, a)) +
         interior_product(X, exterior_derivative(a));
}

/// Pointwise evaluation on argument vectors.  Arguments are first put in a
/// canonical order so that swapping two of them negates the result exactly.
inline double evaluate(const DifferentialForm& a, const Vec& p, std::span<const Vec> vectors) {
  if (static_cast<int>(vectors.size()) != a.degree()) {
    throw DimensionMismatch("form evaluation needs degree-many vectors");
  }
  std::span<const double> ps(p.data(), static_cast<std::size_t>(p.size()));
  if (a.degree() == 0) return (*a.coefficient({}))(ps);

  std::vector<int> order(vectors.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  double sign = 1.0;
  // insertion sort by lexicographic comparison, tracking parity
  for (std::size_t i = 1; i < order.size(); ++i) {
    for (std::size_t j = i; j > 0; --j) {
      const Vec& u = vectors[static_cast<std::size_t>(order[j - 1])];
      const Vec& v = vectors[static_cast<std::size_t>(order[j])];
      bool swap = std::lexicographical_compare(v.data(), v.data() + v.size(), u.data(),
                                               u.data() + u.size());
      if (!swap) break;
      std::swap(order[j - 1], order[j]);
      sign = -sign;
    }
  }
  std::vector<std::vector<double>> cols(vectors.size());
  for (std::size_t c = 0; c < vectors.size(); ++c) {
    const Vec& v = vectors[static_cast<std::size_t>(order[c])];
    cols[c].assign(v.data(), v.data() + v.size());
  }
  std::vector<int> active(vectors.size());
  for (std::size_t i = 0; i < active.size(); ++i) active[i] = static_cast<int>(i);
  double acc = 0.0;
  for (const auto& [I, f] : a.coefficients()) {
    acc += f(ps) * detail::submatrix_det<double>(cols, I, active);
  }
  return sign * acc;
}

/// Frobenius-style size of a form restricted to a frame: sqrt of the sum of
/// squared evaluations over increasing frame tuples.
inline double frame_norm(const DifferentialForm& a, const Vec& p, const Mat& frame) {
  const int k = a.degree();
  const int m = static_cast<int>(frame.cols());
  if (k == 0) {
    std::span<const double> ps(p.data(), static_cast<std::size_t>(p.size()));
    return std::abs((*a.coefficient({}))(ps));
  }
  if (k > m) return 0.0;
  std::vector<int> pick(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) pick[static_cast<std::size_t>(i)] = i;
  double acc = 0.0;
  std::vector<Vec> args(static_cast<std::size_t>(k));
  for (;;) {
    for (int i = 0; i < k; ++i) args[static_cast<std::size_t>(i)] = frame.col(pick[static_cast<std::size_t>(i)]);
    double v = evaluate(a, p, std::span<const Vec>(args));
    acc += v * v;
    int pos = k - 1;
    while (pos >= 0 && pick[static_cast<std::size_t>(pos)] == m - k + pos) --pos;
    if (pos < 0) break;
    ++pick[static_cast<std::size_t>(pos)];
    for (int q = pos + 1; q < k; ++q) pick[static_cast<std::size_t>(q)] = pick[static_cast<std::size_t>(q - 1)] + 1;
  }
  return std::sqrt(acc);
}

/// Smooth map between charts, one scalar component per target coordinate.
class SmoothMap {
 public:
  SmoothMap(Chart source, Chart target, std::vector<ScalarField> components)
      : source_(std::move(source)), target_(std::move(target)), components_(std::move(components)) {
    if (static_cast<int>(components_.size()) != target_.dim()) {
      throw DimensionMismatch("smooth map needs one component per target coordinate");
    }
  }

  const Chart& source() const { return source_; }
  const Chart& target() const { return target_; }

  Vec apply(const Vec& p) const {
    Vec q(target_.dim());
    for (int i = 0; i < target_.dim(); ++i) q[i] = components_[static_cast<std::size_t>(i)].value(p);
    return q;
  }

  template <class S>
  std::vector<S> apply_t(std::span<const S> p) const {
    std::vector<S> q(components_.size());
    for (std::size_t i = 0; i < components_.size(); ++i) q[i] = components_[i](p);
    return q;
  }

  const std::vector<ScalarField>& components() const { return components_; }

 private:
  Chart source_;
  Chart target_;
  std::vector<ScalarField> components_;
};

namespace detail {

/// Coefficient of the pullback at a fixed increasing source index:
/// (phi^* a)_I(p) = sum_J a_J(phi(p)) det(Dphi[J, I]).
/// Needs one derivative layer for Dphi, so supports depths 0 and 1.
class PullbackKernel final : public ScalarKernel {
 public:
  PullbackKernel(std::shared_ptr<const SmoothMap> phi, std::shared_ptr<const DifferentialForm> a,
                 MultiIndex index)
      : phi_(std::move(phi)), a_(std::move(a)), index_(std::move(index)) {}

  double eval0(std::span<const double> p) const override { return compute<double>(p); }
  Dual1 eval1(std::span<const Dual1> p) const override { return compute<Dual1>(p); }
  Dual2 eval2(std::span<const Dual2>) const override {
    throw UnsupportedDerivativeDepth("pullback coefficients carry one exact derivative layer");
  }

 private:
  template <class S>
  S compute(std::span<const S> p) const {
    std::vector<S> image = phi_->apply_t(p);
    std::span<const S> image_span(image);
    // columns of Dphi restricted to the source directions in index_
    std::vector<std::vector<S>> cols(index_.size());
    std::vector<Dual<S>> dp(p.size());
    for (std::size_t c = 0; c < index_.size(); ++c) {
      int dir = index_[c];
      for (std::size_t i = 0; i < p.size(); ++i) {
        dp[i] = Dual<S>(p[i], S(static_cast<int>(i) == dir ? 1.0 : 0.0));
      }
      std::span<const Dual<S>> dspan(dp);
      cols[c].resize(static_cast<std::size_t>(phi_->target().dim()));
      for (int t = 0; t < phi_->target().dim(); ++t) {
        cols[c][static_cast<std::size_t>(t)] = phi_->components()[static_cast<std::size_t>(t)](dspan).b;
      }
    }
    std::vector<int> active(index_.size());
    for (std::size_t i = 0; i < active.size(); ++i) active[i] = static_cast<int>(i);
    S acc(0.0);
    for (const auto& [J, f] : a_->coefficients()) {
      acc = acc + f(image_span) * submatrix_det<S>(cols, J, active);
    }
    return acc;
  }

  std::shared_ptr<const SmoothMap> phi_;
  std::shared_ptr<const DifferentialForm> a_;
  MultiIndex index_;
};

}  // namespace detail

inline DifferentialForm pullback(const SmoothMap& phi, const DifferentialForm& a) {
  require_same_chart(phi.target(), a.chart(), "pullback");
  if (a.degree() > phi.source().dim()) {
    throw DimensionMismatch("pullback degree exceeds source dimension");
  }
  auto phi_ptr = std::make_shared<SmoothMap>(phi);
  auto a_ptr = std::make_shared<DifferentialForm>(a);
  DifferentialForm out(a.degree(), phi.source());
  if (a.degree() == 0) {
    const ScalarField f = *a.coefficient({});
    out.set_coefficient({}, make_field(phi.source(), [phi_ptr, f](auto p) {
                          auto image = phi_ptr->apply_t(p);
                          using S = typename std::decay_t<decltype(p)>::value_type;
                          return f(std::span<const S>(image));
                        }));
    return out;
  }
  std::vector<int> pick(static_cast<std::size_t>(a.degree()));
  const int n = phi.source().dim();
  const int k = a.degree();
  for (int i = 0; i < k; ++i) pick[static_cast<std::size_t>(i)] = i;
  for (;;) {
    MultiIndex I(pick.begin(), pick.end());
    out.set_coefficient(I, ScalarField(std::make_shared<detail::PullbackKernel>(phi_ptr, a_ptr, I),
                                       phi.source()));
    int pos = k - 1;
    while (pos >= 0 && pick[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
    if (pos < 0) break;
    ++pick[static_cast<std::size_t>(pos)];
    for (int q = pos + 1; q < k; ++q) pick[static_cast<std::size_t>(q)] = pick[static_cast<std::size_t>(q - 1)] + 1;
  }
  return out;
}

/// Antisymmetric coefficient matrix of a 2-form at a point.
inline Mat two_form_matrix(const DifferentialForm& a, const Vec& p) {
  if (a.degree() != 2) throw DimensionMismatch("two_form_matrix needs a 2-form");
  const int n = a.chart().dim();
  Mat M = Mat::Zero(n, n);
  std::span<const double> ps(p.data(), static_cast<std::size_t>(p.size()));
  for (const auto& [I, f] : a.coefficients()) {
    double v = f(ps);
    M(I[0], I[1]) = v;
    M(I[1], I[0]) = -v;
  }
  return M;
}

/// Covector of a 1-form at a point.
inline Vec one_form_covector(const DifferentialForm& a, const Vec& p) {
  if (a.degree() != 1) throw DimensionMismatch("one_form_covector needs a 1-form");
  Vec c = Vec::Zero(a.chart().dim());
  std::span<const double> ps(p.data(), static_cast<std::size_t>(p.size()));
  for (const auto& [I, f] : a.coefficients()) c[I[0]] = f(ps);
  return c;
}

}  // namespace contactlab

#endif
