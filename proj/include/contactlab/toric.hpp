#ifndef CONTACTLAB_TORIC_HPP
#define CONTACTLAB_TORIC_HPP

#include "contactlab/cone.hpp"
#include "contactlab/flows.hpp"
#include "contactlab/models.hpp"

namespace contactlab {

/// Torus action on a strict contact manifold, given by the infinitesimal
/// generators of the circle factors.  Validation checks that the generators
/// commute and preserve alpha.
struct TorusActionSpec {
  StrictContactManifold base;
  std::vector<VectorField> generators;

  int torus_dim() const { return static_cast<int>(generators.size()); }
};

struct ActionValidation {
  double commutation = 0.0;   // max |[X_i, X_j]|
  double invariance = 0.0;    // max |L_{X_i} alpha| on tangent frames
  bool ok = false;
};

inline ActionValidation validate_action(const TorusActionSpec& spec,
                                        const CheckOptions& opts = {.samples = 25, .seed = 0}) {
  ActionValidation rep;
  std::vector<VectorField> brackets;
  for (std::size_t i = 0; i < spec.generators.size(); ++i) {
    for (std::size_t j = i + 1; j < spec.generators.size(); ++j) {
      brackets.push_back(lie_bracket(spec.generators[i], spec.generators[j]));
    }
  }
  std::vector<DifferentialForm> lies;
  for (const auto& g : spec.generators) {
    lies.push_back(lie_derivative(g, spec.base.alpha()));
  }
  Sampler rng(opts.seed);
  for (int s = 0; s < opts.samples; ++s) {
    Vec p = spec.base.manifold().sample(rng);
    for (const auto& b : brackets) {
      rep.commutation = std::max(rep.commutation, b.value(p).lpNorm<Eigen::Infinity>());
    }
    for (const auto& l : lies) {
      rep.invariance = std::max(rep.invariance, tangent_residual(spec.base.manifold(), l, p));
    }
  }
  rep.ok = rep.commutation < 1e-7 && rep.invariance < 1e-7;
  return rep;
}

/// alpha-moment map at a point: component j = alpha_p(X_j(p)).
inline Vec alpha_moment_map(const TorusActionSpec& spec, const Vec& p) {
  Vec ac = one_form_covector(spec.base.alpha(), p);
  Vec out(spec.torus_dim());
  for (int j = 0; j < spec.torus_dim(); ++j) {
    out[j] = ac.dot(spec.generators[static_cast<std::size_t>(j)].value(p));
  }
  return out;
}

/// Moment-map components as scalar fields.
inline std::vector<ScalarField> moment_fields(const TorusActionSpec& spec) {
  std::vector<ScalarField> out;
  for (const auto& g : spec.generators) {
    DifferentialForm paired = interior_product(g, spec.base.alpha());
    out.push_back(*paired.coefficient({}));
  }
  return out;
}

/// Rescale alpha pointwise so the moment map lands on the unit sphere of the
/// dual Lie algebra.  Throws ZeroMomentValue when the moment map vanishes at
/// a sample (zero is never in the image for a completely integrable action).
inline TorusActionSpec normalize_contact_form(const TorusActionSpec& spec,
                                              const CheckOptions& opts = {}) {
  auto psi = moment_fields(spec);
  const Chart& chart = spec.base.manifold().chart();
  ScalarField norm2 = constant_field(chart, 0.0);
  for (const auto& f : psi) norm2 = norm2 + f * f;

  Sampler rng(opts.seed);
  for (int s = 0; s < opts.samples; ++s) {
    Vec p = spec.base.manifold().sample(rng);
    if (norm2.value(p) < 1e-18) {
      throw ZeroMomentValue("moment map vanishes at a sample point");
    }
  }

  auto n2k = norm2.kernel();
  ScalarField inv_norm = make_field(chart, [n2k](auto q) {
    using S = typename std::decay_t<decltype(q)>::value_type;
    return S(1.0) / sqrt_checked(detail::dispatch(*n2k, q));
  });
  DifferentialForm scaled = inv_norm * spec.base.alpha();
  StrictContactManifold rescaled(spec.base.manifold(), scaled, std::nullopt,
                                 CheckOptions{.samples = 25, .seed = opts.seed});
  return TorusActionSpec{std::move(rescaled), spec.generators};
}

struct MomentConeReport {
  Mat rays;                      // one sampled moment value per row
  bool all_contained = false;    // every ray satisfies the cone inequalities
  double worst_violation = 0.0;  // most negative normalized pairing
  std::vector<double> facet_angles;  // per normal: best angular proximity of a ray
  bool facets_covered = false;   // every facet approached within 1e-2
};

/// Sample rays of the moment cone and compare against a claimed ConeSpec:
/// containment of every ray plus angular coverage of every facet.
inline MomentConeReport moment_cone_sample(const TorusActionSpec& spec, const ConeSpec& claimed,
                                           const std::vector<Vec>& points) {
  MomentConeReport rep;
  const int n = claimed.torus_dim();
  if (spec.torus_dim() != n) throw DimensionMismatch("cone dimension mismatch");
  rep.rays.resize(static_cast<Eigen::Index>(points.size()), n);
  rep.facet_angles.assign(static_cast<std::size_t>(claimed.normal_count()), 1e9);
  rep.all_contained = true;
  for (std::size_t s = 0; s < points.size(); ++s) {
    Vec psi = alpha_moment_map(spec, points[s]);
    rep.rays.row(static_cast<Eigen::Index>(s)) = psi.transpose();
    double pn = psi.norm();
    if (pn == 0.0) continue;
    for (int i = 0; i < claimed.normal_count(); ++i) {
      Vec v(n);
      for (int c = 0; c < n; ++c) {
        v[c] = static_cast<double>(claimed.normals()[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)]);
      }
      double pairing = psi.dot(v) / (pn * v.norm());
      if (pairing < -1e-9) {
        rep.all_contained = false;
        rep.worst_violation = std::min(rep.worst_violation, pairing);
      }
      double angle = std::asin(std::min(1.0, std::abs(pairing)));
      rep.facet_angles[static_cast<std::size_t>(i)] =
          std::min(rep.facet_angles[static_cast<std::size_t>(i)], angle);
    }
  }
  rep.facets_covered = true;
  for (double a : rep.facet_angles) rep.facets_covered = rep.facets_covered && a < 1e-2;
  return rep;
}

/// Standard rotation action on a weighted-sphere catalog entry.
inline TorusActionSpec sphere_action(const ContactEntry& entry) {
  if (entry.torus_generators.empty()) {
    throw BadParams("catalog entry carries no torus generators");
  }
  return TorusActionSpec{entry.manifold, entry.torus_generators};
}

/// Sphere sample set with deliberate points on every |z_j| = 0 locus so the
/// moment cone's facets are hit exactly.
inline std::vector<Vec> sphere_moment_points(const ContactEntry& entry, int bulk,
                                             std::uint64_t seed) {
  Sampler rng(seed);
  const auto& M = entry.manifold.manifold();
  std::vector<Vec> pts = M.sample_many(rng, bulk);
  const int blocks = static_cast<int>(entry.weights.size());
  for (int j = 0; j < blocks; ++j) {
    Vec p = M.sample(rng);
    p[2 * j] = 0.0;
    p[2 * j + 1] = 0.0;
    if (p.norm() < 1e-9) continue;
    p /= p.norm();
    pts.push_back(p);
  }
  return pts;
}

struct LermanSample {
  RatVec eta;                 // sampled cone point
  std::vector<Rat> u;         // tau^T eta = pairings with the normals
  std::vector<int> support_zeros;  // J_z = { j : u_j = 0 }
  bool freeness_ok = false;   // active normals pass the Z-basis test
  bool image_ok = false;      // sigma^T u recovers a point of C \ {0}
  double float_error = 0.0;   // |sigma^T h(z) * |u|_1 / pi - eta| with float z
};

struct LermanReport {
  IntMat tau;
  int rank = 0;
  IntMat kernel;                    // integer basis of ker tau (columns)
  int dim_n = 0;                    // dimension of the reduced torus N
  std::vector<Int> discrete_invariants;  // SNF invariant factors of tau
  std::vector<std::vector<Rat>> sigma;   // right inverse used for the image map
  bool sigma_exactness = false;     // tau sigma == identity, checked exactly
  bool right_inverse_agreement = false;  // alternative sigma gives the same image
  std::vector<LermanSample> samples;
  bool all_samples_ok = false;
};

/// Desk-scale verification of the cone-to-manifold quotient construction:
/// exact kernel/right-inverse data for tau, level-set membership of the
/// sampled moment values, the freeness certificate on every sampled support
/// pattern, and recovery of the cone through the induced map.
inline LermanReport lerman_pipeline(const ConeSpec& C, int extra_samples = 10,
                                    std::uint64_t seed = 0) {
  auto good = is_good(C);
  if (!good.good) {
    throw NotGoodCone("the quotient construction needs a good cone");
  }
  LermanReport rep;
  rep.tau = C.tau();
  const int n = C.torus_dim();
  const int d = C.normal_count();

  auto hd = hermite_columns(rep.tau);
  rep.rank = hd.rank;
  rep.kernel = kernel_basis(rep.tau);
  rep.dim_n = d - hd.rank;
  rep.discrete_invariants = smith_invariants(rep.tau);
  rep.sigma = right_inverse(rep.tau);  // throws RightInverseNotFound if rank < n

  // exactness: tau sigma = identity over the rationals
  rep.sigma_exactness = true;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Rat acc(0);
      for (int k = 0; k < d; ++k) {
        acc += Rat(rep.tau.at(i, k)) * rep.sigma[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
      }
      if (acc != (i == j ? Rat(1) : Rat(0))) rep.sigma_exactness = false;
    }
  }

  // an alternative right inverse from a reversed column order
  std::vector<std::vector<Rat>> sigma_alt;
  {
    IntMat rev(n, d);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) rev.at(i, j) = rep.tau.at(i, d - 1 - j);
    }
    auto alt = right_inverse(rev);
    sigma_alt.assign(static_cast<std::size_t>(d), std::vector<Rat>(static_cast<std::size_t>(n)));
    for (int k = 0; k < d; ++k) sigma_alt[static_cast<std::size_t>(k)] = alt[static_cast<std::size_t>(d - 1 - k)];
  }

  // sample points: relative-interior witnesses of every face, the interior
  // witness, and seeded nonnegative integer combinations of those
  std::vector<RatVec> etas;
  if (auto inside = C.interior_point()) etas.push_back(*inside);
  for (const auto& f : cone_faces(C)) etas.push_back(f.witness);
  {
    Sampler rng(seed);
    std::size_t base_count = etas.size();
    for (int s = 0; s < extra_samples; ++s) {
      RatVec eta(static_cast<std::size_t>(n), Rat(0));
      bool nonzero = false;
      for (std::size_t b = 0; b < base_count; ++b) {
        long long c = static_cast<long long>(rng.raw() % 4);
        if (c == 0) continue;
        nonzero = true;
        for (int i = 0; i < n; ++i) {
          eta[static_cast<std::size_t>(i)] += Rat(c) * etas[b][static_cast<std::size_t>(i)];
        }
      }
      if (nonzero) etas.push_back(std::move(eta));
    }
  }

  Sampler phase_rng(seed + 1);
  rep.all_samples_ok = true;
  rep.right_inverse_agreement = true;
  for (const auto& eta : etas) {
    LermanSample sample;
    sample.eta = eta;
    sample.u.assign(static_cast<std::size_t>(d), Rat(0));
    bool nonneg = true;
    Rat u_total(0);
    for (int j = 0; j < d; ++j) {
      Rat acc(0);
      for (int i = 0; i < n; ++i) acc += Rat(rep.tau.at(i, j)) * eta[static_cast<std::size_t>(i)];
      sample.u[static_cast<std::size_t>(j)] = acc;
      if (acc < 0) nonneg = false;
      if (acc == 0) sample.support_zeros.push_back(j);
      u_total += acc;
    }

    // freeness certificate on the sampled support pattern
    if (sample.support_zeros.empty()) {
      sample.freeness_ok = true;
    } else {
      IntMat active = detail::columns_of(C, sample.support_zeros);
      auto inv = smith_invariants(active);
      sample.freeness_ok =
          detail::zbasis_test(inv, static_cast<int>(sample.support_zeros.size()));
    }

    // image route: F = sigma^T u must equal eta and lie in C \ {0}
    bool image_ok = nonneg && u_total > 0;
    if (image_ok) {
      RatVec F(static_cast<std::size_t>(n), Rat(0));
      for (int i = 0; i < n; ++i) {
        Rat acc(0);
        Rat acc_alt(0);
        for (int k = 0; k < d; ++k) {
          acc += rep.sigma[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] *
                 sample.u[static_cast<std::size_t>(k)];
          acc_alt += sigma_alt[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] *
                     sample.u[static_cast<std::size_t>(k)];
        }
        F[static_cast<std::size_t>(i)] = acc;
        if (acc != acc_alt) rep.right_inverse_agreement = false;
        if (acc != eta[static_cast<std::size_t>(i)]) image_ok = false;
      }
      // membership of F in C, exactly
      bool in_cone = false;
      for (const auto& v : C.normals()) {
        Rat pairing(0);
        for (int i = 0; i < n; ++i) pairing += F[static_cast<std::size_t>(i)] * Rat(v[static_cast<std::size_t>(i)]);
        if (pairing < 0) image_ok = false;
        if (pairing != 0) in_cone = true;
      }
      image_ok = image_ok && in_cone;  // F != 0 because some pairing is positive
    }
    sample.image_ok = image_ok;

    // float route: z on the unit sphere with |z_j|^2 = u_j / |u|_1 and
    // seeded phases, then F = sigma^T h(z) rescaled by |u|_1 / pi
    if (u_total > 0) {
      double total = static_cast<double>(u_total);
      double err = 0.0;
      std::vector<double> h_of_z(static_cast<std::size_t>(d));
      const double pi = 3.141592653589793;
      for (int j = 0; j < d; ++j) {
        double r = std::sqrt(static_cast<double>(sample.u[static_cast<std::size_t>(j)]) / total);
        double phi = phase_rng.uniform(0.0, 2.0 * pi);
        double x = r * std::cos(phi);
        double y = r * std::sin(phi);
        h_of_z[static_cast<std::size_t>(j)] = pi * (x * x + y * y);
      }
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = 0; k < d; ++k) {
          acc += static_cast<double>(rep.sigma[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]) *
                 h_of_z[static_cast<std::size_t>(k)];
        }
        acc *= total / pi;
        err = std::max(err, std::abs(acc - static_cast<double>(eta[static_cast<std::size_t>(i)])));
      }
      sample.float_error = err;
    }

    rep.all_samples_ok = rep.all_samples_ok && sample.freeness_ok && sample.image_ok &&
                         sample.float_error < 1e-9;
    rep.samples.push_back(std::move(sample));
  }
  return rep;
}

}  // namespace contactlab

#endif
