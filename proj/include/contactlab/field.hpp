#ifndef CONTACTLAB_FIELD_HPP
#define CONTACTLAB_FIELD_HPP

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "contactlab/dual.hpp"
#include "contactlab/errors.hpp"
#include "contactlab/expr.hpp"

namespace contactlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Coordinate chart: names, angle identifications and sampling box.
/// domain_constraints are strict inequalities (expression > 0).
struct Chart {
  std::vector<std::string> coords;
  std::vector<bool> periodic;                      // angle coords live in [0, 2*pi)
  std::vector<std::pair<double, double>> range;    // sampling box per coordinate
  std::vector<Expression> domain_constraints;

  int dim() const { return static_cast<int>(coords.size()); }

  static Chart cartesian(std::vector<std::string> names, double lo = -2.0, double hi = 2.0) {
    Chart c;
    c.periodic.assign(names.size(), false);
    c.range.assign(names.size(), {lo, hi});
    c.coords = std::move(names);
    return c;
  }

  static Chart angles(std::vector<std::string> names) {
    Chart c;
    c.periodic.assign(names.size(), true);
    c.range.assign(names.size(), {0.0, 6.283185307179586});
    c.coords = std::move(names);
    return c;
  }

  bool same_as(const Chart& o) const { return coords == o.coords; }

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < coords.size(); ++i) {
      if (coords[i] == name) return static_cast<int>(i);
    }
    return -1;
  }
};

inline void require_same_chart(const Chart& a, const Chart& b, const char* where) {
  if (!a.same_as(b)) throw ChartMismatch(std::string(where) + ": operands live on different charts");
}

/// Evaluation backend of a scalar field at the three supported derivative
/// depths.  Depth 1 feeds exterior derivatives, depth 2 their compositions.
class ScalarKernel {
 public:
  virtual ~ScalarKernel() = default;
  virtual double eval0(std::span<const double> p) const = 0;
  virtual Dual1 eval1(std::span<const Dual1> p) const = 0;
  virtual Dual2 eval2(std::span<const Dual2> p) const = 0;
};

namespace detail {

inline double dispatch(const ScalarKernel& k, std::span<const double> p) { return k.eval0(p); }
inline Dual1 dispatch(const ScalarKernel& k, std::span<const Dual1> p) { return k.eval1(p); }
inline Dual2 dispatch(const ScalarKernel& k, std::span<const Dual2> p) { return k.eval2(p); }

template <class F>
class GenericKernel final : public ScalarKernel {
 public:
  explicit GenericKernel(F f) : f_(std::move(f)) {}
  double eval0(std::span<const double> p) const override { return f_(p); }
  Dual1 eval1(std::span<const Dual1> p) const override { return f_(p); }
  Dual2 eval2(std::span<const Dual2> p) const override { return f_(p); }

 private:
  F f_;
};

}  // namespace detail

/// Scalar field on a chart.  Wraps a kernel; value semantics, cheap copies.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(std::shared_ptr<const ScalarKernel> kernel, Chart chart)
      : kernel_(std::move(kernel)), chart_(std::move(chart)) {}

  const Chart& chart() const { return chart_; }
  const std::shared_ptr<const ScalarKernel>& kernel() const { return kernel_; }
  bool valid() const { return kernel_ != nullptr; }

  template <class S>
  S operator()(std::span<const S> p) const {
    return detail::dispatch(*kernel_, p);
  }

  double value(const Vec& p) const {
    return kernel_->eval0(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
  }

  /// Directional derivative along dir at p (one forward pass).
  double directional(const Vec& p, const Vec& dir) const {
    const auto n = static_cast<std::size_t>(p.size());
    std::vector<Dual1> dp(n);
    for (std::size_t i = 0; i < n; ++i) dp[i] = Dual1(p[static_cast<Eigen::Index>(i)], dir[static_cast<Eigen::Index>(i)]);
    return kernel_->eval1(std::span<const Dual1>(dp)).b;
  }

  Vec gradient(const Vec& p) const {
    const auto n = static_cast<std::size_t>(p.size());
    Vec g(p.size());
    std::vector<Dual1> dp(n);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        dp[i] = Dual1(p[static_cast<Eigen::Index>(i)], i == j ? 1.0 : 0.0);
      }
      g[static_cast<Eigen::Index>(j)] = kernel_->eval1(std::span<const Dual1>(dp)).b;
    }
    return g;
  }

 private:
  std::shared_ptr<const ScalarKernel> kernel_;
  Chart chart_;
};

/// Build a field from any generic callable S(span<const S>).
template <class F>
ScalarField make_field(Chart chart, F f) {
  return ScalarField(std::make_shared<detail::GenericKernel<F>>(std::move(f)), std::move(chart));
}

inline ScalarField constant_field(const Chart& chart, double c) {
  return make_field(chart, [c](auto p) {
    using S = typename std::decay_t<decltype(p)>::value_type;
    (void)p;
    return S(c);
  });
}

inline ScalarField coordinate_field(const Chart& chart, int index) {
  return make_field(chart, [index](auto p) { return p[static_cast<std::size_t>(index)]; });
}

inline ScalarField expression_field(const Chart& chart, const Expression& e) {
  if (e.free_vars() != chart.coords) {
    throw DimensionMismatch("expression variables do not match chart coordinates");
  }
  auto ast = std::make_shared<Expression>(e);
  return make_field(chart, [ast](auto p) { return ast->eval(p); });
}

inline ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  require_same_chart(a.chart(), b.chart(), "field sum");
  auto ka = a.kernel();
  auto kb = b.kernel();
  return make_field(a.chart(),
                    [ka, kb](auto p) { return detail::dispatch(*ka, p) + detail::dispatch(*kb, p); });
}

inline ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  require_same_chart(a.chart(), b.chart(), "field difference");
  auto ka = a.kernel();
  auto kb = b.kernel();
  return make_field(a.chart(),
                    [ka, kb](auto p) { return detail::dispatch(*ka, p) - detail::dispatch(*kb, p); });
}

inline ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  require_same_chart(a.chart(), b.chart(), "field product");
  auto ka = a.kernel();
  auto kb = b.kernel();
  return make_field(a.chart(),
                    [ka, kb](auto p) { return detail::dispatch(*ka, p) * detail::dispatch(*kb, p); });
}

inline ScalarField operator*(double s, const ScalarField& a) {
  auto ka = a.kernel();
  return make_field(a.chart(), [ka, s](auto p) {
    using S = typename std::decay_t<decltype(p)>::value_type;
    return S(s) * detail::dispatch(*ka, p);
  });
}

inline ScalarField operator-(const ScalarField& a) { return -1.0 * a; }

namespace detail {

/// Coordinate partial derivative of a kernel.  Lifts the evaluation depth by
/// one; asking for the third derivative layer is unsupported.
class PartialKernel final : public ScalarKernel {
 public:
  PartialKernel(std::shared_ptr<const ScalarKernel> base, int coord)
      : base_(std::move(base)), coord_(coord) {}

  double eval0(std::span<const double> p) const override {
    std::vector<Dual1> dp(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      dp[i] = Dual1(p[i], static_cast<int>(i) == coord_ ? 1.0 : 0.0);
    }
    return base_->eval1(std::span<const Dual1>(dp)).b;
  }

  Dual1 eval1(std::span<const Dual1> p) const override {
    std::vector<Dual2> dp(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      dp[i] = Dual2(p[i], Dual1(static_cast<int>(i) == coord_ ? 1.0 : 0.0, 0.0));
    }
    return base_->eval2(std::span<const Dual2>(dp)).b;
  }

  Dual2 eval2(std::span<const Dual2>) const override {
    throw UnsupportedDerivativeDepth(
        "third derivative layer requested; kernels carry two exact layers");
  }

 private:
  std::shared_ptr<const ScalarKernel> base_;
  int coord_;
};

}  // namespace detail

inline ScalarField partial(const ScalarField& f, int coord) {
  return ScalarField(std::make_shared<detail::PartialKernel>(f.kernel(), coord), f.chart());
}

/// Vector field as one scalar component per (ambient) coordinate.
class VectorField {
 public:
  VectorField() = default;
  VectorField(Chart chart, std::vector<ScalarField> components)
      : chart_(std::move(chart)), components_(std::move(components)) {
    if (static_cast<int>(components_.size()) != chart_.dim()) {
      throw DimensionMismatch("vector field needs one component per coordinate");
    }
  }

  const Chart& chart() const { return chart_; }
  const std::vector<ScalarField>& components() const { return components_; }
  const ScalarField& component(int i) const { return components_[static_cast<std::size_t>(i)]; }

  Vec value(const Vec& p) const {
    Vec v(chart_.dim());
    for (int i = 0; i < chart_.dim(); ++i) v[i] = components_[static_cast<std::size_t>(i)].value(p);
    return v;
  }

  template <class S>
  std::vector<S> value_t(std::span<const S> p) const {
    std::vector<S> v(components_.size());
    for (std::size_t i = 0; i < components_.size(); ++i) v[i] = components_[i](p);
    return v;
  }

 private:
  Chart chart_;
  std::vector<ScalarField> components_;
};

inline VectorField zero_vector_field(const Chart& chart) {
  std::vector<ScalarField> comps;
  for (int i = 0; i < chart.dim(); ++i) comps.push_back(constant_field(chart, 0.0));
  return VectorField(chart, comps);
}

inline VectorField basis_vector_field(const Chart& chart, int index) {
  std::vector<ScalarField> comps;
  for (int i = 0; i < chart.dim(); ++i) comps.push_back(constant_field(chart, i == index ? 1.0 : 0.0));
  return VectorField(chart, comps);
}

/// X(f): derivative of f along X, as a field.
inline ScalarField derive_along(const ScalarField& f, const VectorField& X) {
  require_same_chart(f.chart(), X.chart(), "derive_along");
  ScalarField acc = constant_field(f.chart(), 0.0);
  for (int i = 0; i < f.chart().dim(); ++i) {
    acc = acc + X.component(i) * partial(f, i);
  }
  return acc;
}

/// Standard Lie bracket [X, Y] = (X . grad) Y - (Y . grad) X.
inline VectorField lie_bracket(const VectorField& X, const VectorField& Y) {
  require_same_chart(X.chart(), Y.chart(), "lie_bracket");
  std::vector<ScalarField> comps;
  for (int k = 0; k < X.chart().dim(); ++k) {
    comps.push_back(derive_along(Y.component(k), X) - derive_along(X.component(k), Y));
  }
  return VectorField(X.chart(), comps);
}

}  // namespace contactlab

#endif
