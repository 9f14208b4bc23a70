#ifndef CONTACTLAB_CONTACT_HPP
#define CONTACTLAB_CONTACT_HPP

#include <functional>
#include <limits>
#include <optional>

#include "contactlab/manifold.hpp"

namespace contactlab {

/// Options shared by the sampled checks.  Defaults follow the project-wide
/// convention: 100 points, seed 0.
struct CheckOptions {
  int samples = 100;
  std::uint64_t seed = 0;
};

/// Scale-invariant degeneracy threshold for the contact condition.
inline constexpr double kContactThreshold = 1e-10;
/// Residual gate for the pointwise linear solves.
inline constexpr double kSolveResidualTol = 1e-9;
/// Classification tolerance for (strict) contact vector fields; sits above
/// the finite-difference noise of solver-backed fields.
inline constexpr double kClassifyTol = 1e-6;

struct ContactReport {
  bool is_contact = false;
  double min_abs_top = 0.0;  // min |alpha ^ (d alpha)^n| over samples, orthonormal frame
  Vec witness;               // point where the minimum occurs
  int samples = 0;
};

namespace detail {

struct StackedSolve {
  Vec x;
  double residual = 0.0;
  double cond = 0.0;
};

/// Solve the stacked tangency + kernel + pairing system in ambient
/// coordinates:  J_F X = 0,  dalpha(X, t_i) = tangent_rhs_i,  alpha(X) = a_rhs.
inline StackedSolve solve_stacked(const ManifoldSpec& m, const Vec& alpha_cov, const Mat& Md,
                                  const Vec& p, const Mat& T, const Vec& tangent_rhs,
                                  double alpha_rhs) {
  const int amb = m.ambient_dim();
  const int k = static_cast<int>(m.constraints().size());
  const int t = static_cast<int>(T.cols());
  Mat A(k + t + 1, amb);
  Vec b(k + t + 1);
  if (k > 0) {
    A.topRows(k) = m.constraint_jacobian(p);
    b.head(k).setZero();
  }
  for (int i = 0; i < t; ++i) {
    A.row(k + i) = (Md * T.col(i)).transpose();
    b[k + i] = tangent_rhs[i];
  }
  A.row(k + t) = alpha_cov.transpose();
  b[k + t] = alpha_rhs;

  Eigen::ColPivHouseholderQR<Mat> qr(A);
  StackedSolve out;
  out.x = qr.solve(b);
  out.residual = (A * out.x - b).norm();
  const auto& R = qr.matrixR();
  double r0 = std::abs(R(0, 0));
  double rn = std::abs(R(std::min<Eigen::Index>(amb, A.rows()) - 1,
                         std::min<Eigen::Index>(amb, A.cols()) - 1));
  out.cond = rn > 0.0 ? r0 / rn : std::numeric_limits<double>::infinity();
  return out;
}

/// Vector field backed by a pointwise solver.  Exact at depth 0; dual depths
/// use central finite differences of the solver (h = 1e-5).
class SolverComponentKernel final : public ScalarKernel {
 public:
  using Solver = std::function<Vec(const Vec&)>;

  SolverComponentKernel(std::shared_ptr<const Solver> solver, int component)
      : solver_(std::move(solver)), component_(component) {}

  double eval0(std::span<const double> p) const override {
    Vec q = Eigen::Map<const Vec>(p.data(), static_cast<Eigen::Index>(p.size()));
    return (*solver_)(q)[component_];
  }

  Dual1 eval1(std::span<const Dual1> p) const override {
    const auto n = static_cast<Eigen::Index>(p.size());
    Vec a(n);
    Vec dir(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      a[i] = p[static_cast<std::size_t>(i)].a;
      dir[i] = p[static_cast<std::size_t>(i)].b;
    }
    double value = (*solver_)(a)[component_];
    double deriv = 0.0;
    if (dir.norm() > 0.0) {
      deriv = ((*solver_)(a + kFdStep * dir)[component_] -
               (*solver_)(a - kFdStep * dir)[component_]) /
              (2.0 * kFdStep);
    }
    return {value, deriv};
  }

  Dual2 eval2(std::span<const Dual2> p) const override {
    const std::size_t n = p.size();
    std::vector<Dual1> a(n);
    std::vector<Dual1> hi(n);
    std::vector<Dual1> lo(n);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = p[i].a;
      hi[i] = p[i].a + kFdStep * p[i].b;
      lo[i] = p[i].a - kFdStep * p[i].b;
      any = any || p[i].b.a != 0.0 || p[i].b.b != 0.0;
    }
    Dual1 value = eval1(std::span<const Dual1>(a));
    if (!any) return {value, Dual1(0.0, 0.0)};
    Dual1 deriv = (eval1(std::span<const Dual1>(hi)) - eval1(std::span<const Dual1>(lo))) /
                  (2.0 * kFdStep);
    return {value, deriv};
  }

  static constexpr double kFdStep = 1e-5;

 private:
  std::shared_ptr<const Solver> solver_;
  int component_;
};

inline VectorField solver_vector_field(const Chart& chart,
                                       std::shared_ptr<const SolverComponentKernel::Solver> s) {
  std::vector<ScalarField> comps;
  for (int i = 0; i < chart.dim(); ++i) {
    comps.emplace_back(std::make_shared<SolverComponentKernel>(s, i), chart);
  }
  return VectorField(chart, comps);
}

}  // namespace detail

/// Verify alpha ^ (d alpha)^n != 0 on a tangent frame at seeded samples.
inline ContactReport verify_contact(const ManifoldSpec& M, const DifferentialForm& alpha,
                                    const CheckOptions& opts = {}) {
  const int t = M.intrinsic_dim();
  if (t % 2 == 0) throw EvenDimension("contact check needs odd intrinsic dimension");
  const int n = (t - 1) / 2;
  DifferentialForm top = alpha;
  DifferentialForm dalpha = exterior_derivative(alpha);
  for (int i = 0; i < n; ++i) top = wedge(top, dalpha);

  Sampler rng(opts.seed);
  ContactReport rep;
  rep.samples = opts.samples;
  rep.min_abs_top = std::numeric_limits<double>::infinity();
  std::vector<Vec> frame(static_cast<std::size_t>(t));
  for (int s = 0; s < opts.samples; ++s) {
    Vec p = M.sample(rng);
    Mat T = M.tangent_basis(p);
    for (int i = 0; i < t; ++i) frame[static_cast<std::size_t>(i)] = T.col(i);
    double v = std::abs(evaluate(top, p, std::span<const Vec>(frame)));
    if (v < rep.min_abs_top) {
      rep.min_abs_top = v;
      rep.witness = p;
    }
  }
  rep.is_contact = rep.min_abs_top > kContactThreshold;
  return rep;
}

/// Strict contact manifold: spec + contact form + cached pointwise Reeb
/// solver.  Construction verifies the contact condition.
class StrictContactManifold {
 public:
  StrictContactManifold(ManifoldSpec spec, DifferentialForm alpha,
                        std::optional<VectorField> closed_form_reeb = std::nullopt,
                        const CheckOptions& self_check = {.samples = 25, .seed = 0})
      : spec_(std::move(spec)),
        alpha_(std::move(alpha)),
        dalpha_(exterior_derivative(alpha_)),
        closed_reeb_(std::move(closed_form_reeb)) {
    if (spec_.intrinsic_dim() % 2 == 0) {
      throw EvenDimension("strict contact manifold needs odd intrinsic dimension");
    }
    if (self_check.samples > 0) {
      ContactReport rep = verify_contact(spec_, alpha_, self_check);
      if (!rep.is_contact) {
        throw NotSymplectic("form fails the contact condition at a sample point");
      }
    }
    auto solver = std::make_shared<detail::SolverComponentKernel::Solver>(
        [spec = spec_, alpha = alpha_, dalpha = dalpha_](const Vec& p) {
          return reeb_solve(spec, alpha, dalpha, p, false);
        });
    reeb_field_ = detail::solver_vector_field(spec_.chart(), solver);
  }

  const ManifoldSpec& manifold() const { return spec_; }
  const DifferentialForm& alpha() const { return alpha_; }
  const DifferentialForm& dalpha() const { return dalpha_; }
  int n() const { return (spec_.intrinsic_dim() - 1) / 2; }
  const std::optional<VectorField>& closed_form_reeb() const { return closed_reeb_; }

  /// Pointwise Reeb solve; reverse_basis re-runs it with the tangent frame
  /// in opposite order (uniqueness diagnostics).
  Vec reeb_at(const Vec& p, bool reverse_basis = false) const {
    return reeb_solve(spec_, alpha_, dalpha_, p, reverse_basis);
  }

  /// Solver-backed Reeb field (finite differences supply dual depths).
  const VectorField& reeb_field() const { return reeb_field_; }

  static Vec reeb_solve(const ManifoldSpec& spec, const DifferentialForm& alpha,
                        const DifferentialForm& dalpha, const Vec& p, bool reverse_basis) {
    Mat T = spec.tangent_basis(p);
    if (reverse_basis) T = T.rowwise().reverse().eval();
    Mat Md = two_form_matrix(dalpha, p);
    Vec ac = one_form_covector(alpha, p);
    Vec rhs = Vec::Zero(T.cols());
    auto sol = detail::solve_stacked(spec, ac, Md, p, T, rhs, 1.0);
    if (sol.residual > kSolveResidualTol) {
      throw SingularSystem("Reeb system has no solution: form not contact here", sol.cond);
    }
    return sol.x;
  }

 private:
  ManifoldSpec spec_;
  DifferentialForm alpha_;
  DifferentialForm dalpha_;
  std::optional<VectorField> closed_reeb_;
  VectorField reeb_field_;
};

/// X = alpha(X) R + horizontal.
inline std::pair<double, Vec> decompose_vector(const StrictContactManifold& M, const Vec& X,
                                               const Vec& p) {
  Vec ac = one_form_covector(M.alpha(), p);
  double coeff = ac.dot(X);
  Vec horizontal = X - coeff * M.reeb_at(p);
  return {coeff, horizontal};
}

/// beta = beta(R) alpha + semibasic.
inline std::pair<double, Vec> decompose_form(const StrictContactManifold& M,
                                             const DifferentialForm& beta, const Vec& p) {
  if (beta.degree() != 1) throw DimensionMismatch("decompose_form needs a 1-form");
  Vec bc = one_form_covector(beta, p);
  Vec R = M.reeb_at(p);
  double coeff = bc.dot(R);
  Vec ac = one_form_covector(M.alpha(), p);
  return {coeff, bc - coeff * ac};
}

/// alpha-flat of a horizontal vector: -iota_X d(alpha), as a covector.
inline Vec alpha_flat(const StrictContactManifold& M, const Vec& X, const Vec& p) {
  Vec ac = one_form_covector(M.alpha(), p);
  if (std::abs(ac.dot(X)) > 1e-8 * (1.0 + X.norm())) {
    throw NotHorizontal("alpha_flat needs alpha(X) = 0");
  }
  Mat Md = two_form_matrix(M.dalpha(), p);
  // (iota_X dalpha)(v) = X^T Md v, so -iota_X dalpha has covector Md X
  return Md * X;
}

/// Inverse of alpha_flat: solve -iota_X d(alpha) = eta for horizontal X.
inline Vec alpha_sharp(const StrictContactManifold& M, const Vec& eta, const Vec& p) {
  Vec R = M.reeb_at(p);
  if (std::abs(eta.dot(R)) > 1e-8 * (1.0 + eta.norm())) {
    throw NotSemibasic("alpha_sharp needs eta(R) = 0");
  }
  Mat T = M.manifold().tangent_basis(p);
  Mat Md = two_form_matrix(M.dalpha(), p);
  Vec ac = one_form_covector(M.alpha(), p);
  Vec rhs(T.cols());
  for (int i = 0; i < T.cols(); ++i) rhs[i] = -eta.dot(T.col(i));
  auto sol = detail::solve_stacked(M.manifold(), ac, Md, p, T, rhs, 0.0);
  if (sol.residual > kSolveResidualTol) {
    throw SingularSystem("alpha_sharp system unsolvable", sol.cond);
  }
  return sol.x;
}

enum class FieldClass { StrictContact, Contact, NotContact };

struct VFClass {
  FieldClass kind = FieldClass::NotContact;
  double max_strict_residual = 0.0;          // max |L_X alpha| on tangent frames
  double max_proportionality_residual = 0.0; // max |(L_X alpha) ^ alpha|
  std::vector<double> mu_samples;            // mu = (L_X alpha)(R) at samples
  Vec witness;                               // where proportionality fails
};

/// L_X alpha = mu alpha test: strict when the Lie derivative vanishes,
/// contact when it is proportional to alpha.
inline VFClass classify_vector_field(const StrictContactManifold& M, const VectorField& X,
                                     const CheckOptions& opts = {}) {
  DifferentialForm lie = lie_derivative(X, M.alpha());
  DifferentialForm prop = wedge(lie, M.alpha());
  Sampler rng(opts.seed);
  VFClass out;
  double worst_prop = -1.0;
  for (int s = 0; s < opts.samples; ++s) {
    Vec p = M.manifold().sample(rng);
    double rs = tangent_residual(M.manifold(), lie, p);
    double rp = tangent_residual(M.manifold(), prop, p);
    out.max_strict_residual = std::max(out.max_strict_residual, rs);
    out.max_proportionality_residual = std::max(out.max_proportionality_residual, rp);
    if (rp > worst_prop) {
      worst_prop = rp;
      out.witness = p;
    }
    Vec R = M.reeb_at(p);
    std::vector<Vec> arg = {R};
    out.mu_samples.push_back(evaluate(lie, p, std::span<const Vec>(arg)));
  }
  if (out.max_strict_residual < kClassifyTol) {
    out.kind = FieldClass::StrictContact;
  } else if (out.max_proportionality_residual < kClassifyTol) {
    out.kind = FieldClass::Contact;
  } else {
    out.kind = FieldClass::NotContact;
  }
  return out;
}

struct LiouvilleReport {
  bool is_liouville = false;
  double residual = 0.0;        // max |d(iota_Y omega) - omega|
  double closedness = 0.0;      // max |d omega|
  double min_nondegeneracy = 0.0;
};

/// L_Y omega = omega, checked as d(iota_Y omega) = omega since omega is
/// required closed.
inline LiouvilleReport liouville_check(const ManifoldSpec& W, const DifferentialForm& omega,
                                       const VectorField& Y, const CheckOptions& opts = {}) {
  if (omega.degree() != 2) throw DimensionMismatch("liouville_check needs a 2-form");
  const bool top_degree = omega.degree() == W.chart().dim();  // trivially closed
  std::optional<DifferentialForm> domega;
  if (!top_degree) domega = exterior_derivative(omega);
  DifferentialForm diff = exterior_derivative(interior_product(Y, omega)) - omega;
  Sampler rng(opts.seed);
  LiouvilleReport rep;
  rep.min_nondegeneracy = std::numeric_limits<double>::infinity();
  for (int s = 0; s < opts.samples; ++s) {
    Vec p = W.sample(rng);
    if (domega) rep.closedness = std::max(rep.closedness, tangent_residual(W, *domega, p));
    rep.residual = std::max(rep.residual, tangent_residual(W, diff, p));
    Mat Md = two_form_matrix(omega, p);
    Eigen::JacobiSVD<Mat> svd(Md);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    double smax = svd.singularValues()(0);
    rep.min_nondegeneracy = std::min(rep.min_nondegeneracy, smax > 0 ? smin / smax : 0.0);
  }
  if (rep.closedness > 1e-8) throw NotSymplectic("omega is not closed");
  if (rep.min_nondegeneracy < 1e-10) throw NotSymplectic("omega is degenerate at a sample");
  rep.is_liouville = rep.residual < 1e-8;
  return rep;
}

/// Restrict iota_Y omega to the level set S = 0 of a Liouville-transverse
/// hypersurface; returns the resulting strict contact manifold.
inline StrictContactManifold contactise(const ManifoldSpec& W, const DifferentialForm& omega,
                                        const VectorField& Y, const ScalarField& S,
                                        const CheckOptions& opts = {}) {
  LiouvilleReport liou = liouville_check(W, omega, Y, opts);
  if (!liou.is_liouville) {
    throw LiouvilleFailed("Y is not a Liouville field for omega (residual " +
                          std::to_string(liou.residual) + ")");
  }
  ManifoldSpec hyper = ManifoldSpec::embedded(W.chart(), {S});
  Sampler rng(opts.seed);
  for (int s = 0; s < opts.samples; ++s) {
    Vec p = hyper.sample(rng);
    Vec grad = S.gradient(p);
    Vec y = Y.value(p);
    double denom = grad.norm() * y.norm();
    if (denom == 0.0 || std::abs(grad.dot(y)) / denom <= 1e-6) {
      throw NotTransverse("Liouville field tangent to the hypersurface at a sample");
    }
  }
  DifferentialForm alpha = interior_product(Y, omega);
  return StrictContactManifold(std::move(hyper), alpha, std::nullopt, opts);
}

struct Symplectisation {
  ManifoldSpec space;            // R x M with a leading cone coordinate
  DifferentialForm omega;        // e^s (ds ^ alpha + d alpha), assembled directly
  DifferentialForm scaled_alpha; // e^s p^* alpha (1-form whose d is omega)
  VectorField liouville;         // d/ds
  int cone_coordinate = 0;
};

/// Product R x M with the exact symplectic form d(e^s p^* alpha).
inline Symplectisation symplectise(const StrictContactManifold& M) {
  if (M.manifold().is_embedded()) {
    throw DimensionMismatch("symplectisation expects an intrinsic chart");
  }
  const Chart& base = M.manifold().chart();
  std::string cone_name = "s";
  while (base.index_of(cone_name) >= 0) cone_name += "_";
  Chart W;
  W.coords.push_back(cone_name);
  W.periodic.push_back(false);
  W.range.push_back({-1.0, 1.0});
  for (int i = 0; i < base.dim(); ++i) {
    W.coords.push_back(base.coords[static_cast<std::size_t>(i)]);
    W.periodic.push_back(base.periodic[static_cast<std::size_t>(i)]);
    W.range.push_back(base.range[static_cast<std::size_t>(i)]);
  }

  auto lift = [&W](const ScalarField& f) {
    auto k = f.kernel();
    return make_field(W, [k](auto p) { return detail::dispatch(*k, p.subspan(1)); });
  };
  ScalarField scale = make_field(W, [](auto p) { return exp(p[0]); });

  DifferentialForm omega(2, W);
  DifferentialForm scaled_alpha(1, W);
  for (const auto& [I, f] : M.alpha().coefficients()) {
    omega.add_coefficient({0, I[0] + 1}, scale * lift(f));
    scaled_alpha.add_coefficient({I[0] + 1}, scale * lift(f));
  }
  for (const auto& [I, f] : M.dalpha().coefficients()) {
    omega.add_coefficient({I[0] + 1, I[1] + 1}, scale * lift(f));
  }

  Symplectisation out{ManifoldSpec::intrinsic(W), std::move(omega), std::move(scaled_alpha),
                      basis_vector_field(W, 0), 0};
  return out;
}

}  // namespace contactlab

#endif
