#ifndef CONTACTLAB_INTEGRABILITY_HPP
#define CONTACTLAB_INTEGRABILITY_HPP

#include "contactlab/hamiltonian.hpp"
#include "contactlab/models.hpp"

namespace contactlab {

/// Candidate contact completely integrable system: dynamics X on (M, alpha)
/// with n integrals, where X is either the Reeb field or the contact
/// Hamiltonian of the first integral.
struct IntegrableSystemSpec {
  enum class Mode { Reeb, HamiltonianOfF1 };

  StrictContactManifold base;
  VectorField dynamics;
  std::vector<ScalarField> integrals;
  Mode mode = Mode::Reeb;
};

/// Relative singular-value cutoff for rank decisions.
inline constexpr double kRankCutoff = 1e-6;

struct IndependenceFailure {
  Vec point;
  double sigma_ratio;      // sigma_n / sigma_1 at the failing sample
  double locus_residual;   // smallest |z_j| when radial loci exist, else sigma ratio
};

struct IntegrabilityReport {
  double x_invariance = 0.0;     // max |X(f_i)|
  double pairwise_bracket = 0.0; // max |[f_i, f_j]|
  double reeb_bracket = 0.0;     // max |[1, f_i]| = |R(f_i)|
  double alpha_pairing = 0.0;    // max |alpha(X) - f_1| or |alpha(X) - 1|
  double independence_fraction = 0.0;
  std::vector<IndependenceFailure> failures;
  int samples = 0;
  bool pass = false;

  static constexpr double kResidualTol = 1e-7;
  static constexpr double kPairingTol = 1e-9;
  static constexpr double kFractionTol = 0.95;
};

namespace detail {

/// Minimum |z_j| over complex blocks of an even-split ambient chart; used to
/// flag radial singular loci on the spheres and normal-form models.
inline double min_block_radius(const Vec& p) {
  if (p.size() % 2 != 0) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j + 1 < p.size(); j += 2) {
    best = std::min(best, std::hypot(p[j], p[j + 1]));
  }
  return best;
}

}  // namespace detail

inline IntegrabilityReport check_integrable(const IntegrableSystemSpec& spec,
                                            const CheckOptions& opts = {.samples = 200,
                                                                        .seed = 0}) {
  const auto& M = spec.base;
  const int n = M.n();
  if (static_cast<int>(spec.integrals.size()) != n) {
    throw DimensionMismatch("need n = (dim-1)/2 integrals, got " +
                            std::to_string(spec.integrals.size()));
  }

  IntegrabilityReport rep;
  rep.samples = opts.samples;

  std::vector<ScalarField> x_derivs;
  for (const auto& f : spec.integrals) x_derivs.push_back(derive_along(f, spec.dynamics));
  std::vector<ScalarField> reeb_derivs;
  for (const auto& f : spec.integrals) reeb_derivs.push_back(derive_along(f, M.reeb_field()));
  std::vector<ScalarField> brackets;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      brackets.push_back(jacobi_bracket(M, spec.integrals[static_cast<std::size_t>(i)],
                                        spec.integrals[static_cast<std::size_t>(j)]));
    }
  }
  DifferentialForm pairing_form = interior_product(spec.dynamics, M.alpha());
  ScalarField pairing = *pairing_form.coefficient({});

  Sampler rng(opts.seed);
  int independent = 0;
  for (int s = 0; s < opts.samples; ++s) {
    Vec p = M.manifold().sample(rng);
    for (const auto& d : x_derivs) {
      rep.x_invariance = std::max(rep.x_invariance, std::abs(d.value(p)));
    }
    for (const auto& d : reeb_derivs) {
      rep.reeb_bracket = std::max(rep.reeb_bracket, std::abs(d.value(p)));
    }
    for (const auto& b : brackets) {
      rep.pairwise_bracket = std::max(rep.pairwise_bracket, std::abs(b.value(p)));
    }
    double target = spec.mode == IntegrableSystemSpec::Mode::Reeb
                        ? 1.0
                        : spec.integrals[0].value(p);
    rep.alpha_pairing = std::max(rep.alpha_pairing, std::abs(pairing.value(p) - target));

    // independence: gradients restricted to the tangent space
    Mat T = M.manifold().tangent_basis(p);
    Mat G(n, T.cols());
    for (int i = 0; i < n; ++i) {
      G.row(i) = (T.transpose() * spec.integrals[static_cast<std::size_t>(i)].gradient(p))
                     .transpose();
    }
    Eigen::JacobiSVD<Mat> svd(G);
    double s1 = svd.singularValues()(0);
    double sn = svd.singularValues()(svd.singularValues().size() - 1);
    double ratio = s1 > 0.0 ? sn / s1 : 0.0;
    if (ratio > kRankCutoff) {
      ++independent;
    } else {
      rep.failures.push_back({p, ratio, detail::min_block_radius(p)});
    }
  }
  rep.independence_fraction = static_cast<double>(independent) / opts.samples;
  rep.pass = rep.x_invariance < IntegrabilityReport::kResidualTol &&
             rep.pairwise_bracket < IntegrabilityReport::kResidualTol &&
             rep.reeb_bracket < IntegrabilityReport::kResidualTol &&
             rep.alpha_pairing < IntegrabilityReport::kPairingTol &&
             rep.independence_fraction >= IntegrabilityReport::kFractionTol;
  return rep;
}

struct SpanDiagnostics {
  int expected_rank = 0;          // n + 1
  int min_frame_rank = 0;         // rank of {R, X_{f_1}..X_{f_n}} at regular samples
  int min_horizontal_rank = 0;    // rank of the horizontal parts
  double involutivity = 0.0;      // max |[X~_i, X~_j]| at regular samples
  int regular_samples = 0;
  int singular_samples = 0;
};

inline SpanDiagnostics span_diagnostics(const IntegrableSystemSpec& spec,
                                        const CheckOptions& opts = {.samples = 40, .seed = 0}) {
  const auto& M = spec.base;
  const int n = M.n();
  SpanDiagnostics rep;
  rep.expected_rank = n + 1;
  rep.min_frame_rank = n + 1;
  rep.min_horizontal_rank = n;

  std::vector<ContactHamiltonianField> hams;
  for (const auto& f : spec.integrals) hams.push_back(hamiltonian_field(M, f));

  // horizontal parts as fields: X~_i = X_{f_i} - f_i R
  std::vector<VectorField> horizontal;
  for (std::size_t i = 0; i < hams.size(); ++i) {
    std::vector<ScalarField> comps;
    for (int k = 0; k < M.manifold().ambient_dim(); ++k) {
      comps.push_back(hams[i].field.component(k) -
                      spec.integrals[i] * M.reeb_field().component(k));
    }
    horizontal.emplace_back(M.manifold().chart(), std::move(comps));
  }
  std::vector<VectorField> h_brackets;
  for (std::size_t i = 0; i < horizontal.size(); ++i) {
    for (std::size_t j = i + 1; j < horizontal.size(); ++j) {
      h_brackets.push_back(lie_bracket(horizontal[i], horizontal[j]));
    }
  }

  auto rank_of = [](const Mat& A) {
    Eigen::JacobiSVD<Mat> svd(A);
    double s1 = svd.singularValues()(0);
    int r = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
      if (s1 > 0.0 && svd.singularValues()(i) / s1 > kRankCutoff) ++r;
    }
    return r;
  };

  Sampler rng(opts.seed);
  for (int s = 0; s < opts.samples; ++s) {
    Vec p = M.manifold().sample(rng);

    // regularity: gradient rank n as in check_integrable
    Mat T = M.manifold().tangent_basis(p);
    Mat G(n, T.cols());
    for (int i = 0; i < n; ++i) {
      G.row(i) = (T.transpose() * spec.integrals[static_cast<std::size_t>(i)].gradient(p))
                     .transpose();
    }
    if (rank_of(G) < n) {
      ++rep.singular_samples;
      continue;
    }
    ++rep.regular_samples;

    Mat frame(T.cols(), n + 1);
    frame.col(0) = T.transpose() * M.reeb_at(p);
    for (int i = 0; i < n; ++i) {
      frame.col(i + 1) = T.transpose() * hams[static_cast<std::size_t>(i)].at(p);
    }
    rep.min_frame_rank = std::min(rep.min_frame_rank, rank_of(frame));

    Mat hframe(T.cols(), n);
    for (int i = 0; i < n; ++i) {
      hframe.col(i) = T.transpose() * horizontal[static_cast<std::size_t>(i)].value(p);
    }
    rep.min_horizontal_rank = std::min(rep.min_horizontal_rank, rank_of(hframe));

    for (const auto& hb : h_brackets) {
      rep.involutivity = std::max(rep.involutivity, hb.value(p).lpNorm<Eigen::Infinity>());
    }
  }
  return rep;
}

/// Torus action-angle model (T^{n+1} x D, y_0 dtheta_0 + sum y_i dtheta_i)
/// with y_0 a function of the action coordinates y_1..y_n.
struct ActionAngleModel {
  IntegrableSystemSpec spec;
  Expression y0;  // over y_1..y_n

  /// Closed-form Reeb frequencies at action values y:
  /// w_0 = 1 / (y_0 - sum y_i d_i y_0), w_i = -(d_i y_0) w_0.
  Vec frequencies(const Vec& y) const {
    const auto n = y.size();
    std::vector<double> yv(y.data(), y.data() + n);
    auto [v, grad] = eval_with_gradient(y0, std::span<const double>(yv));
    double denom = v;
    for (Eigen::Index i = 0; i < n; ++i) denom -= y[i] * grad[static_cast<std::size_t>(i)];
    if (std::abs(denom) < 1e-12) {
      throw DegenerateFrequencyDenominator("frequency denominator vanished");
    }
    Vec w(n + 1);
    w[0] = 1.0 / denom;
    for (Eigen::Index i = 0; i < n; ++i) w[i + 1] = -grad[static_cast<std::size_t>(i)] * w[0];
    return w;
  }
};

inline ActionAngleModel build_action_angle_model(
    int n, const Expression& y0, std::vector<std::pair<double, double>> action_box = {}) {
  if (n < 1) throw BadParams("action-angle model needs n >= 1");
  std::vector<std::string> expected;
  for (int i = 1; i <= n; ++i) expected.push_back("y" + std::to_string(i));
  if (y0.free_vars() != expected) {
    throw BadParams("y0 must be an expression over y1..yn");
  }
  if (action_box.empty()) action_box.assign(static_cast<std::size_t>(n), {0.5, 1.5});

  Chart c;
  for (int i = 0; i <= n; ++i) {
    c.coords.push_back("theta" + std::to_string(i));
    c.periodic.push_back(true);
    c.range.push_back({0.0, 6.283185307179586});
  }
  for (int i = 1; i <= n; ++i) {
    c.coords.push_back("y" + std::to_string(i));
    c.periodic.push_back(false);
    c.range.push_back(action_box[static_cast<std::size_t>(i - 1)]);
  }

  auto y0_ast = std::make_shared<Expression>(y0);
  auto y0_field = make_field(c, [y0_ast, n](auto p) { return y0_ast->eval(p.subspan(n + 1)); });

  DifferentialForm alpha(1, c);
  alpha.set_coefficient({0}, y0_field);
  for (int i = 1; i <= n; ++i) {
    alpha.set_coefficient({i}, coordinate_field(c, n + i));
  }

  // pre: the frequency denominator stays away from zero on the action box
  {
    Sampler rng(0);
    ManifoldSpec probe = ManifoldSpec::intrinsic(c);
    for (int s = 0; s < 50; ++s) {
      Vec p = probe.sample(rng);
      std::vector<double> y(p.data() + n + 1, p.data() + p.size());
      auto [v, grad] = eval_with_gradient(y0, std::span<const double>(y));
      double denom = v;
      for (int i = 0; i < n; ++i) denom -= y[static_cast<std::size_t>(i)] * grad[static_cast<std::size_t>(i)];
      if (std::abs(denom) < 1e-8) {
        throw DegenerateFrequencyDenominator(
            "y0 - sum y_i d_i y0 vanishes on the requested action box");
      }
    }
  }

  StrictContactManifold M(ManifoldSpec::intrinsic(c), alpha);
  std::vector<ScalarField> integrals;
  for (int i = 1; i <= n; ++i) integrals.push_back(coordinate_field(c, n + i));
  VectorField reeb = M.reeb_field();
  ActionAngleModel out{
      IntegrableSystemSpec{std::move(M), std::move(reeb), std::move(integrals),
                           IntegrableSystemSpec::Mode::Reeb},
      y0};
  return out;
}

enum class ComponentType { Elliptic, Hyperbolic, FocusPair };

/// Local normal-form model on T^{k+1} x U^k x V^{2(n-k)} with
/// alpha = dtheta_0 + sum p_i dtheta_i + (1/2) sum (x_i dy_i - y_i dx_i).
inline IntegrableSystemSpec build_normal_form_model(
    int n, int k, const std::vector<ComponentType>& component_types) {
  if (n < 1 || k < 0 || k > n) throw BadParams("need 0 <= k <= n, n >= 1");
  // validate the component list fills slots k+1..n, focus pairs taking two
  int slots = 0;
  for (ComponentType t : component_types) {
    slots += t == ComponentType::FocusPair ? 2 : 1;
  }
  if (slots != n - k) {
    throw BadComponentList("component list must fill indices k+1..n exactly");
  }

  Chart c;
  for (int i = 0; i <= k; ++i) {
    c.coords.push_back("theta" + std::to_string(i));
    c.periodic.push_back(true);
    c.range.push_back({0.0, 6.283185307179586});
  }
  for (int i = 1; i <= k; ++i) {
    c.coords.push_back("p" + std::to_string(i));
    c.periodic.push_back(false);
    c.range.push_back({-1.0, 1.0});
  }
  const int m = n - k;  // singular block pairs
  for (int i = 1; i <= m; ++i) {
    c.coords.push_back("x" + std::to_string(i));
    c.periodic.push_back(false);
    c.range.push_back({-1.0, 1.0});
    c.coords.push_back("y" + std::to_string(i));
    c.periodic.push_back(false);
    c.range.push_back({-1.0, 1.0});
  }

  const int p_base = k + 1;        // first momentum coordinate index
  const int xy_base = 2 * k + 1;   // first singular-block coordinate index

  DifferentialForm alpha(1, c);
  alpha.set_coefficient({0}, constant_field(c, 1.0));
  for (int i = 1; i <= k; ++i) {
    alpha.set_coefficient({i}, coordinate_field(c, p_base + i - 1));
  }
  for (int i = 0; i < m; ++i) {
    const int xi = xy_base + 2 * i;
    const int yi = xi + 1;
    alpha.add_coefficient({yi}, 0.5 * coordinate_field(c, xi));
    alpha.add_coefficient({xi}, (-0.5) * coordinate_field(c, yi));
  }

  VectorField reeb = basis_vector_field(c, 0);
  StrictContactManifold M(ManifoldSpec::intrinsic(c), alpha, reeb);

  std::vector<ScalarField> integrals;
  for (int i = 1; i <= k; ++i) integrals.push_back(coordinate_field(c, p_base + i - 1));
  int block = 0;
  for (ComponentType t : component_types) {
    const int xi = xy_base + 2 * block;
    const int yi = xi + 1;
    switch (t) {
      case ComponentType::Elliptic:
        integrals.push_back(coordinate_field(c, xi) * coordinate_field(c, xi) +
                            coordinate_field(c, yi) * coordinate_field(c, yi));
        block += 1;
        break;
      case ComponentType::Hyperbolic:
        integrals.push_back(coordinate_field(c, xi) * coordinate_field(c, yi));
        block += 1;
        break;
      case ComponentType::FocusPair: {
        const int xj = xy_base + 2 * (block + 1);
        const int yj = xj + 1;
        integrals.push_back(coordinate_field(c, xi) * coordinate_field(c, yj) -
                            coordinate_field(c, xj) * coordinate_field(c, yi));
        integrals.push_back(coordinate_field(c, xi) * coordinate_field(c, yi) +
                            coordinate_field(c, xj) * coordinate_field(c, yj));
        block += 2;
        break;
      }
    }
  }

  VectorField dynamics = M.reeb_field();
  return IntegrableSystemSpec{std::move(M), std::move(dynamics), std::move(integrals),
                              IntegrableSystemSpec::Mode::Reeb};
}

/// The weighted sphere as an integrable system: X = Reeb, integrals
/// |z_1|^2 .. |z_n|^2 (the zeroth radial function is dependent on them).
inline IntegrableSystemSpec weighted_sphere_system(const ContactEntry& entry) {
  if (entry.integrals.empty()) throw BadParams("entry carries no radial integrals");
  std::vector<ScalarField> integrals(entry.integrals.begin() + 1, entry.integrals.end());
  VectorField dynamics = entry.manifold.reeb_field();
  return IntegrableSystemSpec{entry.manifold, std::move(dynamics), std::move(integrals),
                              IntegrableSystemSpec::Mode::Reeb};
}

}  // namespace contactlab

#endif
