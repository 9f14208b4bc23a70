#ifndef CONTACTLAB_HAMILTONIAN_HPP
#define CONTACTLAB_HAMILTONIAN_HPP

#include "contactlab/contact.hpp"

namespace contactlab {

/// Contact Hamiltonian field of H: the unique field with alpha(X_H) = H and
/// iota_{X_H} d(alpha) = dH(R) alpha - dH, realized as a pointwise stacked
/// solve in ambient coordinates.
struct ContactHamiltonianField {
  ScalarField H;
  VectorField field;

  Vec at(const Vec& p) const { return field.value(p); }
};

namespace detail {

inline Vec hamiltonian_solve(const ManifoldSpec& spec, const DifferentialForm& alpha,
                             const DifferentialForm& dalpha, const ScalarField& H, const Vec& p) {
  Mat T = spec.tangent_basis(p);
  Mat Md = two_form_matrix(dalpha, p);
  Vec ac = one_form_covector(alpha, p);
  Vec R = StrictContactManifold::reeb_solve(spec, alpha, dalpha, p, false);
  Vec gradH = H.gradient(p);
  double h = H.value(p);
  double dHR = gradH.dot(R);
  Vec rhs(T.cols());
  for (int i = 0; i < T.cols(); ++i) {
    rhs[i] = dHR * ac.dot(T.col(i)) - gradH.dot(T.col(i));
  }
  auto sol = solve_stacked(spec, ac, Md, p, T, rhs, h);
  if (sol.residual > kSolveResidualTol * (1.0 + std::abs(h) + gradH.norm())) {
    throw SingularSystem("contact Hamiltonian system unsolvable", sol.cond);
  }
  return sol.x;
}

}  // namespace detail

inline ContactHamiltonianField hamiltonian_field(const StrictContactManifold& M,
                                                 const ScalarField& H) {
  require_same_chart(M.manifold().chart(), H.chart(), "hamiltonian_field");
  auto solver = std::make_shared<detail::SolverComponentKernel::Solver>(
      [spec = M.manifold(), alpha = M.alpha(), dalpha = M.dalpha(), H](const Vec& p) {
        return detail::hamiltonian_solve(spec, alpha, dalpha, H, p);
      });
  return {H, detail::solver_vector_field(M.manifold().chart(), solver)};
}

/// H_X = alpha(X); requires X to be a contact vector field.
inline ScalarField function_of_field(const StrictContactManifold& M, const VectorField& X,
                                     const CheckOptions& opts = {}) {
  auto cls = classify_vector_field(M, X, opts);
  if (cls.kind == FieldClass::NotContact) {
    throw NotContactField("alpha(X) is only a Hamiltonian for contact fields");
  }
  DifferentialForm pairing = interior_product(X, M.alpha());
  return *pairing.coefficient({});
}

enum class BracketMode { Lie, Char1, Char2 };

/// Jacobi bracket [f, g] as a scalar field.
///   char2 (default): X_f(g) - g R(f)          -- one Hamiltonian solve
///   char1:           d(alpha)(X_f, X_g) + f R(g) - g R(f)
///   lie:             alpha([X_f, X_g])         -- derivatives of the solvers
inline ScalarField jacobi_bracket(const StrictContactManifold& M, const ScalarField& f,
                                  const ScalarField& g, BracketMode mode = BracketMode::Char2) {
  const VectorField& R = M.reeb_field();
  switch (mode) {
    case BracketMode::Char2: {
      auto Xf = hamiltonian_field(M, f);
      return derive_along(g, Xf.field) - g * derive_along(f, R);
    }
    case BracketMode::Char1: {
      auto Xf = hamiltonian_field(M, f);
      auto Xg = hamiltonian_field(M, g);
      DifferentialForm paired = interior_product(Xg.field, interior_product(Xf.field, M.dalpha()));
      return *paired.coefficient({}) + f * derive_along(g, R) - g * derive_along(f, R);
    }
    case BracketMode::Lie: {
      auto Xf = hamiltonian_field(M, f);
      auto Xg = hamiltonian_field(M, g);
      VectorField commutator = lie_bracket(Xf.field, Xg.field);
      DifferentialForm paired = interior_product(commutator, M.alpha());
      return *paired.coefficient({});
    }
  }
  throw DomainError("unreachable bracket mode");
}

/// Residuals of the algebraic laws of the Jacobi bracket over seeded
/// function tuples evaluated at seeded points.
struct BracketLawReport {
  double bilinearity = 0.0;
  double antisymmetry = 0.0;
  double jacobi_identity = 0.0;
  double leibniz_defect = 0.0;   // [ff', g] - f[f', g] - f'[f, g] + ff'[1, g]
  double product_rule = 0.0;     // X_{ff'} - f X_{f'} - f' X_f + ff' R
  double morphism = 0.0;         // X_{[f,g]} - [X_f, X_g]
  double mode_agreement = 0.0;   // char1/char2 and lie/char2 spread
  int tuples = 0;
  int points_per_tuple = 0;
};

inline BracketLawReport check_bracket_laws(const StrictContactManifold& M,
                                           const std::vector<ScalarField>& sample_functions,
                                           int points_per_tuple = 20, std::uint64_t seed = 0) {
  if (sample_functions.size() < 3) {
    throw DimensionMismatch("check_bracket_laws needs at least three functions");
  }
  BracketLawReport rep;
  rep.points_per_tuple = points_per_tuple;
  Sampler rng(seed);
  const auto& chart = M.manifold().chart();
  const VectorField& R = M.reeb_field();

  const std::size_t m = sample_functions.size();
  for (std::size_t t = 0; t + 2 < m; ++t) {
    const ScalarField& f = sample_functions[t];
    const ScalarField& fp = sample_functions[t + 1];
    const ScalarField& g = sample_functions[t + 2];
    double lambda = rng.uniform(-2.0, 2.0);

    auto Xf = hamiltonian_field(M, f);
    auto Xfp = hamiltonian_field(M, fp);
    auto Xg = hamiltonian_field(M, g);

    ScalarField fg = jacobi_bracket(M, f, g);
    ScalarField gf = jacobi_bracket(M, g, f);
    ScalarField fpg = jacobi_bracket(M, fp, g);
    ScalarField one_g = jacobi_bracket(M, constant_field(chart, 1.0), g);

    // bilinearity: [lambda f + f', g] = lambda [f, g] + [f', g]
    ScalarField lin_lhs = jacobi_bracket(M, lambda * f + fp, g);
    // Jacobi identity over the cyclic triple (f, f', g)
    ScalarField j1 = jacobi_bracket(M, f, jacobi_bracket(M, fp, g));
    ScalarField j2 = jacobi_bracket(M, fp, jacobi_bracket(M, g, f));
    ScalarField j3 = jacobi_bracket(M, g, jacobi_bracket(M, f, fp));
    ScalarField ffp_g = jacobi_bracket(M, f * fp, g);

    ScalarField char1 = jacobi_bracket(M, f, g, BracketMode::Char1);
    ScalarField lie = jacobi_bracket(M, f, g, BracketMode::Lie);

    auto Xfg = hamiltonian_field(M, fg);
    auto Xffp = hamiltonian_field(M, f * fp);
    VectorField commutator = lie_bracket(Xf.field, Xg.field);

    for (int s = 0; s < points_per_tuple; ++s) {
      Vec p = M.manifold().sample(rng);
      double vf = f.value(p);
      double vfp = fp.value(p);

      rep.bilinearity = std::max(
          rep.bilinearity, std::abs(lin_lhs.value(p) - lambda * fg.value(p) - fpg.value(p)));
      rep.antisymmetry = std::max(rep.antisymmetry, std::abs(fg.value(p) + gf.value(p)));
      rep.jacobi_identity = std::max(
          rep.jacobi_identity, std::abs(j1.value(p) + j2.value(p) + j3.value(p)));
      rep.leibniz_defect =
          std::max(rep.leibniz_defect,
                   std::abs(ffp_g.value(p) - vf * fpg.value(p) - vfp * fg.value(p) +
                            vf * vfp * one_g.value(p)));

      Vec pr = Xffp.at(p) - vf * Xfp.at(p) - vfp * Xf.at(p) + vf * vfp * R.value(p);
      rep.product_rule = std::max(rep.product_rule, pr.lpNorm<Eigen::Infinity>());

      Vec mor = Xfg.at(p) - commutator.value(p);
      rep.morphism = std::max(rep.morphism, mor.lpNorm<Eigen::Infinity>());

      double c2 = fg.value(p);
      rep.mode_agreement = std::max(rep.mode_agreement, std::abs(char1.value(p) - c2));
      rep.mode_agreement = std::max(rep.mode_agreement, std::abs(lie.value(p) - c2));
    }
    ++rep.tuples;
  }
  return rep;
}

/// Poisson-like behaviour of the bracket on Reeb integrals.
struct ReebIntegralReport {
  double membership_f = 0.0;  // max |R(f)|
  double membership_g = 0.0;
  double x_f_of_g = 0.0;
  double x_g_of_f = 0.0;
  double bracket = 0.0;
  bool flags_agree = false;
};

inline ReebIntegralReport reeb_integral_properties(const StrictContactManifold& M,
                                                   const ScalarField& f, const ScalarField& g,
                                                   const CheckOptions& opts = {},
                                                   double tol = 1e-8) {
  const VectorField& R = M.reeb_field();
  ScalarField rf = derive_along(f, R);
  ScalarField rg = derive_along(g, R);
  auto Xf = hamiltonian_field(M, f);
  auto Xg = hamiltonian_field(M, g);
  ScalarField xfg = derive_along(g, Xf.field);
  ScalarField xgf = derive_along(f, Xg.field);
  ScalarField fg = jacobi_bracket(M, f, g);

  ReebIntegralReport rep;
  Sampler rng(opts.seed);
  for (int s = 0; s < opts.samples; ++s) {
    Vec p = M.manifold().sample(rng);
    rep.membership_f = std::max(rep.membership_f, std::abs(rf.value(p)));
    rep.membership_g = std::max(rep.membership_g, std::abs(rg.value(p)));
    rep.x_f_of_g = std::max(rep.x_f_of_g, std::abs(xfg.value(p)));
    rep.x_g_of_f = std::max(rep.x_g_of_f, std::abs(xgf.value(p)));
    rep.bracket = std::max(rep.bracket, std::abs(fg.value(p)));
  }
  if (rep.membership_f > tol || rep.membership_g > tol) {
    throw NotReebIntegral("inputs must be integrals of the Reeb field");
  }
  bool a = rep.x_f_of_g < tol;
  bool b = rep.x_g_of_f < tol;
  bool c = rep.bracket < tol;
  rep.flags_agree = (a == b) && (b == c);
  return rep;
}

/// Closure: integrals of X_f are closed under the bracket.
inline double reeb_integral_closure(const StrictContactManifold& M, const ScalarField& f,
                                    const ScalarField& g1, const ScalarField& g2,
                                    const CheckOptions& opts = {}) {
  auto Xf = hamiltonian_field(M, f);
  ScalarField bracket = jacobi_bracket(M, g1, g2);
  ScalarField drift = derive_along(bracket, Xf.field);
  Sampler rng(opts.seed);
  double worst = 0.0;
  for (int s = 0; s < opts.samples; ++s) {
    Vec p = M.manifold().sample(rng);
    worst = std::max(worst, std::abs(drift.value(p)));
  }
  return worst;
}

}  // namespace contactlab

#endif
