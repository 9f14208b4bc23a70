#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "contactlab/hamiltonian.hpp"
#include "contactlab/models.hpp"

using namespace contactlab;

namespace {

Vec vec3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

}  // namespace

TEST_CASE("standard form is contact, dz alone is not") {
  auto entry = models::standard(1);
  auto rep = verify_contact(entry.manifold.manifold(), entry.manifold.alpha());
  REQUIRE(rep.is_contact);

  Chart c = entry.manifold.manifold().chart();
  DifferentialForm dz_only(1, c);
  dz_only.set_coefficient({0}, constant_field(c, 1.0));
  auto bad = verify_contact(ManifoldSpec::intrinsic(c), dz_only);
  REQUIRE_FALSE(bad.is_contact);
  REQUIRE(bad.min_abs_top == 0.0);
}

TEST_CASE("torus family forms are contact for n = 1, 2, 3") {
  for (int n = 1; n <= 3; ++n) {
    auto entry = models::torus_family(n);
    auto rep = verify_contact(entry.manifold.manifold(), entry.manifold.alpha());
    REQUIRE(rep.is_contact);
  }
}

TEST_CASE("contact condition is invariant under nonvanishing rescaling") {
  auto entry = models::standard(1);
  Chart c = entry.manifold.manifold().chart();
  Sampler rng(101);
  for (int trial = 0; trial < 5; ++trial) {
    double c0 = rng.uniform(0.5, 1.5);
    double c1 = rng.uniform(-0.3, 0.3);
    auto lambda = make_field(c, [c0, c1](auto p) { return c0 + c1 * sin(p[1]); });
    auto scaled = lambda * entry.manifold.alpha();
    auto rep = verify_contact(entry.manifold.manifold(), scaled);
    REQUIRE(rep.is_contact);
  }
}

TEST_CASE("Reeb of the standard form is d/dz") {
  auto entry = models::standard(1);
  Sampler rng(0);
  for (int s = 0; s < 100; ++s) {
    Vec p = entry.manifold.manifold().sample(rng);
    Vec R = entry.manifold.reeb_at(p);
    REQUIRE(std::abs(R[0] - 1.0) < 1e-10);
    REQUIRE(std::abs(R[1]) < 1e-10);
    REQUIRE(std::abs(R[2]) < 1e-10);
  }
}

TEST_CASE("Reeb on the torus matches (0, cos nt, sin nt)") {
  for (int n : {1, 2, 3}) {
    auto entry = models::torus_family(n);
    Sampler rng(7);
    for (int s = 0; s < 25; ++s) {
      Vec p = entry.manifold.manifold().sample(rng);
      Vec R = entry.manifold.reeb_at(p);
      REQUIRE(std::abs(R[0]) < 1e-10);
      REQUIRE(R[1] == Catch::Approx(std::cos(n * p[0])).margin(1e-10));
      REQUIRE(R[2] == Catch::Approx(std::sin(n * p[0])).margin(1e-10));
    }
  }
}

TEST_CASE("Reeb on the cylinder chart: closed form and the r = pi/2 value") {
  auto entry = models::cylindrical_u();
  const auto& M = entry.manifold;
  Vec p = vec3(M_PI / 2.0, 1.0, 0.3);
  Vec R = M.reeb_at(p);
  REQUIRE(std::abs(R[0]) < 1e-10);
  REQUIRE(R[1] == Catch::Approx(2.0 / M_PI).margin(1e-10));
  REQUIRE(R[2] == Catch::Approx(2.0 / M_PI).margin(1e-10));

  Sampler rng(3);
  for (int s = 0; s < 50; ++s) {
    Vec q = M.manifold().sample(rng);
    Vec solver = M.reeb_at(q);
    Vec closed = M.closed_form_reeb()->value(q);
    REQUIRE((solver - closed).lpNorm<Eigen::Infinity>() < 1e-8);
  }
}

TEST_CASE("every catalog entry: Reeb axioms and closed-form agreement") {
  for (const auto& entry : contact_catalog()) {
    const auto& M = entry.manifold;
    Sampler rng(0);
    double worst_pairing = 0.0;
    double worst_kernel = 0.0;
    double worst_closed = 0.0;
    for (int s = 0; s < 100; ++s) {
      Vec p = M.manifold().sample(rng);
      Vec R = M.reeb_at(p);
      Vec ac = one_form_covector(M.alpha(), p);
      worst_pairing = std::max(worst_pairing, std::abs(ac.dot(R) - 1.0));
      // iota_R d(alpha) restricted to the tangent frame
      Mat T = M.manifold().tangent_basis(p);
      Mat Md = two_form_matrix(M.dalpha(), p);
      worst_kernel = std::max(worst_kernel, (T.transpose() * (Md * R)).norm());
      if (M.closed_form_reeb()) {
        worst_closed =
            std::max(worst_closed, (R - M.closed_form_reeb()->value(p)).lpNorm<Eigen::Infinity>());
      }
    }
    INFO(entry.key);
    REQUIRE(worst_pairing < 1e-9);
    REQUIRE(worst_kernel < 1e-9);
    REQUIRE(worst_closed < 1e-8);
  }
}

TEST_CASE("Reeb solve is basis-order independent") {
  for (const auto& entry : contact_catalog()) {
    Sampler rng(17);
    for (int s = 0; s < 10; ++s) {
      Vec p = entry.manifold.manifold().sample(rng);
      Vec a = entry.manifold.reeb_at(p, false);
      Vec b = entry.manifold.reeb_at(p, true);
      REQUIRE((a - b).lpNorm<Eigen::Infinity>() < 1e-9);
    }
  }
}

TEST_CASE("weighted sphere generators are tangent") {
  auto entry = models::weighted_sphere(2, {1.0, 2.0, 3.0});
  const auto& M = entry.manifold;
  const auto& F = M.manifold().constraints()[0];
  Sampler rng(5);
  for (int s = 0; s < 50; ++s) {
    Vec p = M.manifold().sample(rng);
    Vec g = F.gradient(p);
    for (const auto& Y : entry.torus_generators) {
      REQUIRE(std::abs(g.dot(Y.value(p))) < 1e-9);
    }
  }
}

TEST_CASE("vector decomposition on the standard entry") {
  auto entry = models::standard(1);
  const auto& M = entry.manifold;
  Vec p = vec3(0.0, 2.0, 1.0);  // coordinates (z, x1, y1); x = 2

  // X = R -> (1, 0)
  auto [c_r, h_r] = decompose_vector(M, M.reeb_at(p), p);
  REQUIRE(c_r == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(h_r.norm() < 1e-12);

  // X = d/dx -> (0, d/dx)
  Vec dx = Vec::Zero(3);
  dx[1] = 1.0;
  auto [c_x, h_x] = decompose_vector(M, dx, p);
  REQUIRE(c_x == 0.0);
  REQUIRE((h_x - dx).norm() < 1e-12);

  // X = d/dy at x=2 -> alpha(X) = 2, horizontal = d/dy - 2 d/dz
  Vec dy = Vec::Zero(3);
  dy[2] = 1.0;
  auto [c_y, h_y] = decompose_vector(M, dy, p);
  REQUIRE(c_y == Catch::Approx(2.0));
  Vec expect = dy;
  expect[0] -= 2.0;
  REQUIRE((h_y - expect).norm() < 1e-12);
  // alpha annihilates the horizontal part; sum reconstructs X exactly
  REQUIRE(std::abs(one_form_covector(M.alpha(), p).dot(h_y)) < 1e-10);
  REQUIRE((c_y * M.reeb_at(p) + h_y - dy).norm() < 1e-12);
}

TEST_CASE("form decomposition on the standard entry") {
  auto entry = models::standard(1);
  const auto& M = entry.manifold;
  Chart c = M.manifold().chart();
  Vec p = vec3(0.4, 1.3, -0.2);

  auto [ca, sa] = decompose_form(M, M.alpha(), p);
  REQUIRE(ca == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(sa.norm() < 1e-12);

  // beta = dz: coefficient 1, semibasic part -x dy
  auto [cz, sz] = decompose_form(M, coordinate_form(c, 0), p);
  REQUIRE(cz == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(sz[0] == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(sz[1] == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(sz[2] == Catch::Approx(-1.3));

  // beta = dy: dy(R) = 0
  auto [cy, sy] = decompose_form(M, coordinate_form(c, 2), p);
  REQUIRE(cy == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(sy[2] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("alpha flat and sharp on the standard entry") {
  auto entry = models::standard(1);
  const auto& M = entry.manifold;
  Vec p = vec3(0.0, 1.7, 0.3);  // x = 1.7

  // X = x d/dx (horizontal) -> -x dy
  Vec X = Vec::Zero(3);
  X[1] = p[1];
  Vec flat = alpha_flat(M, X, p);
  REQUIRE(flat[0] == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(flat[1] == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(flat[2] == Catch::Approx(-1.7));

  // eta = dy -> -d/dx
  Vec eta = Vec::Zero(3);
  eta[2] = 1.0;
  Vec sharp = alpha_sharp(M, eta, p);
  REQUIRE(sharp[0] == Catch::Approx(0.0).margin(1e-10));
  REQUIRE(sharp[1] == Catch::Approx(-1.0));
  REQUIRE(sharp[2] == Catch::Approx(0.0).margin(1e-10));

  // zero maps to zero
  REQUIRE(alpha_flat(M, Vec::Zero(3), p).norm() == 0.0);
  REQUIRE(alpha_sharp(M, Vec::Zero(3), p).norm() < 1e-12);

  // non-horizontal and non-semibasic inputs are rejected
  REQUIRE_THROWS_AS(alpha_flat(M, M.reeb_at(p), p), NotHorizontal);
  Vec bad = one_form_covector(M.alpha(), p);
  REQUIRE_THROWS_AS(alpha_sharp(M, bad, p), NotSemibasic);
}

TEST_CASE("sharp inverts flat on seeded horizontal vectors") {
  for (const auto& key : {std::string("standard_n1"), std::string("sphere_n1")}) {
    ContactEntry entry = key == "standard_n1" ? models::standard(1)
                                              : models::weighted_sphere(1, {1.0, 2.0});
    const auto& M = entry.manifold;
    Sampler rng(13);
    for (int s = 0; s < 100; ++s) {
      Vec p = M.manifold().sample(rng);
      Mat T = M.manifold().tangent_basis(p);
      Vec raw = Vec::Zero(M.manifold().ambient_dim());
      for (int i = 0; i < T.cols(); ++i) raw += rng.uniform(-1, 1) * T.col(i);
      auto [coef, horizontal] = decompose_vector(M, raw, p);
      Vec eta = alpha_flat(M, horizontal, p);
      Vec back = alpha_sharp(M, eta, p);
      REQUIRE((back - horizontal).lpNorm<Eigen::Infinity>() < 1e-9);
    }
  }
}

TEST_CASE("classification: Reeb strict, X2 strict, d/dx not contact") {
  auto entry = models::standard(1);
  const auto& M = entry.manifold;
  Chart c = M.manifold().chart();
  CheckOptions opts{.samples = 40, .seed = 2};

  auto reeb_class = classify_vector_field(M, M.reeb_field(), opts);
  REQUIRE(reeb_class.kind == FieldClass::StrictContact);

  // X2 = -x e^y d/dx + e^y d/dy + 2 d/dz (coordinates are (z, x, y))
  VectorField X2(c, {constant_field(c, 2.0),
                     make_field(c, [](auto p) { return -p[1] * exp(p[2]); }),
                     make_field(c, [](auto p) { return exp(p[2]); })});
  auto x2_class = classify_vector_field(M, X2, opts);
  REQUIRE(x2_class.kind == FieldClass::StrictContact);

  auto dx_class = classify_vector_field(M, basis_vector_field(c, 1), opts);
  REQUIRE(dx_class.kind == FieldClass::NotContact);
  REQUIRE(dx_class.witness.size() == 3);

  // a contact-but-not-strict field: X_H for H = z has mu = dH(R) = 1
  VectorField XH(c, {coordinate_field(c, 0), coordinate_field(c, 1), constant_field(c, 0.0)});
  auto xh_class = classify_vector_field(M, XH, opts);
  REQUIRE(xh_class.kind == FieldClass::Contact);
  for (double mu : xh_class.mu_samples) REQUIRE(mu == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("further probe fields on the standard entry") {
  auto entry = models::standard(1);
  const auto& M = entry.manifold;
  Chart c = M.manifold().chart();  // (z, x1, y1)
  CheckOptions opts{.samples = 40, .seed = 5};

  // X1 = d/dx + x d/dz preserves neither the form nor the structure
  VectorField X1(c, {coordinate_field(c, 1), constant_field(c, 1.0), constant_field(c, 0.0)});
  REQUIRE(classify_vector_field(M, X1, opts).kind == FieldClass::NotContact);

  // the Hamiltonian field of H = y cos z + x ln(y^2+1) is contact but not
  // strict, with mu = dH(R) = -y sin z
  auto H = make_field(c, [](auto p) {
    return p[2] * cos(p[0]) + p[1] * log_checked(p[2] * p[2] + 1.0);
  });
  auto XH = hamiltonian_field(M, H);
  auto cls = classify_vector_field(M, XH.field, opts);
  REQUIRE(cls.kind == FieldClass::Contact);
  Sampler rng(6);
  DifferentialForm lie = lie_derivative(XH.field, M.alpha());
  for (int s = 0; s < 10; ++s) {
    Vec p = M.manifold().sample(rng);
    Vec R = M.reeb_at(p);
    std::vector<Vec> arg = {R};
    double mu = evaluate(lie, p, std::span<const Vec>(arg));
    REQUIRE(mu == Catch::Approx(-p[2] * std::sin(p[0])).margin(1e-7));
  }
}

TEST_CASE("the dilation flow scales the symplectic form exponentially") {
  // pullback along phi_t(x) = e^{t/2} x gives e^t omega_st, the flow-level
  // face of the radial field being Liouville
  auto w = models::symplectic_std(2);
  Chart c = w.space.chart();
  for (double t : {-0.7, 0.0, 0.9}) {
    double scale = std::exp(t / 2.0);
    std::vector<ScalarField> comps;
    for (int i = 0; i < 4; ++i) comps.push_back(scale * coordinate_field(c, i));
    SmoothMap dilation(c, c, comps);
    auto pulled = pullback(dilation, w.omega);
    auto expected = std::exp(t) * w.omega;
    Sampler rng(7);
    for (int s = 0; s < 15; ++s) {
      Vec p(4);
      for (int i = 0; i < 4; ++i) p[i] = rng.uniform(-1, 1);
      REQUIRE(tangent_residual(w.space, pulled - expected, p) < 1e-12);
    }
  }
}

TEST_CASE("Reeb field is strict on every catalog entry") {
  for (const auto& entry : contact_catalog()) {
    CheckOptions opts{.samples = 25, .seed = 4};
    auto cls = classify_vector_field(entry.manifold, entry.manifold.reeb_field(), opts);
    INFO(entry.key);
    REQUIRE(cls.kind == FieldClass::StrictContact);
    REQUIRE(cls.max_strict_residual < 1e-8);  // L_R alpha vanishes to solver noise
  }
}

TEST_CASE("catalog builder rejects bad parameters") {
  ModelParams zero;
  zero.n = 0;
  REQUIRE_THROWS_AS(build("torus", zero), BadParams);
  REQUIRE_THROWS_AS(build("standard", zero), BadParams);
  REQUIRE_THROWS_AS(models::weighted_sphere(1, {1.0}), BadParams);
  REQUIRE_THROWS_AS(models::weighted_sphere(1, {1.0, -2.0}), BadParams);
  REQUIRE_THROWS_AS(build("no_such_model", {}), BadParams);
}

TEST_CASE("round weighted sphere matches its closed-form Reeb field") {
  auto entry = models::weighted_sphere(1, {1.0, 1.0});
  Sampler rng(2);
  for (int s = 0; s < 50; ++s) {
    Vec p = entry.manifold.manifold().sample(rng);
    Vec solver = entry.manifold.reeb_at(p);
    Vec closed = entry.manifold.closed_form_reeb()->value(p);
    REQUIRE((solver - closed).lpNorm<Eigen::Infinity>() < 1e-8);
  }
}

TEST_CASE("top power of the standard form on R^5 carries the 2! factor") {
  auto entry = models::standard(2);
  auto top = wedge(wedge(entry.manifold.alpha(), entry.manifold.dalpha()),
                   entry.manifold.dalpha());
  Sampler rng(3);
  std::vector<Vec> basis;
  for (int i = 0; i < 5; ++i) {
    Vec e = Vec::Zero(5);
    e[i] = 1.0;
    basis.push_back(e);
  }
  for (int s = 0; s < 10; ++s) {
    Vec p = entry.manifold.manifold().sample(rng);
    REQUIRE(evaluate(top, p, std::span<const Vec>(basis)) == Catch::Approx(2.0));
  }
}

TEST_CASE("Liouville checks") {
  auto w = models::symplectic_std(2);
  auto rep = liouville_check(w.space, w.omega, w.liouville);
  REQUIRE(rep.is_liouville);
  REQUIRE(rep.residual < 1e-8);

  // Y = 0 fails with residual = |omega|
  auto zero = liouville_check(w.space, w.omega, zero_vector_field(w.space.chart()));
  REQUIRE_FALSE(zero.is_liouville);
  REQUIRE(zero.residual > 0.5);

  // Y = x d/dx on (R^2, dx ^ dy)
  Chart plane = Chart::cartesian({"x", "y"});
  DifferentialForm dxdy(2, plane);
  dxdy.set_coefficient({0, 1}, constant_field(plane, 1.0));
  VectorField Y(plane, {coordinate_field(plane, 0), constant_field(plane, 0.0)});
  auto rep2 = liouville_check(ManifoldSpec::intrinsic(plane), dxdy, Y);
  REQUIRE(rep2.is_liouville);
}

TEST_CASE("contactisation of the round sphere, n = 1 and 2") {
  for (int n : {1, 2}) {
    auto w = models::symplectic_std(n);
    auto sphere = contactise(w.space, w.omega, w.liouville, w.sphere_constraint,
                             CheckOptions{.samples = 50, .seed = 1});
    auto rep = verify_contact(sphere.manifold(), sphere.alpha(),
                              CheckOptions{.samples = 50, .seed = 2});
    REQUIRE(rep.is_contact);

    // proof identity: alpha ^ (d alpha)^{n-1} = (1/n) iota_Y (omega^n)
    DifferentialForm lhs = sphere.alpha();
    DifferentialForm da = sphere.dalpha();
    for (int i = 0; i < n - 1; ++i) lhs = wedge(lhs, da);
    DifferentialForm wn = w.omega;
    for (int i = 0; i < n - 1; ++i) wn = wedge(wn, w.omega);
    DifferentialForm rhs = (1.0 / n) * interior_product(w.liouville, wn);
    Sampler rng(9);
    for (int s = 0; s < 30; ++s) {
      Vec p = sphere.manifold().sample(rng);
      REQUIRE(tangent_residual(sphere.manifold(), lhs - rhs, p) < 1e-8);
    }
  }
}

TEST_CASE("contactisation rejects tangent Liouville fields") {
  // the hyperplane S = {x1 = 0} passes through the origin, so the radial
  // Liouville field is tangent to it everywhere
  auto w = models::symplectic_std(2);
  Chart c = w.space.chart();
  auto S = coordinate_field(c, 0);
  ManifoldSpec hyper = ManifoldSpec::embedded(c, {S});
  Sampler rng(0);
  Vec p = hyper.sample(rng);
  REQUIRE(std::abs(S.gradient(p).dot(w.liouville.value(p))) < 1e-12);
  REQUIRE_THROWS_AS(contactise(w.space, w.omega, w.liouville, S), NotTransverse);
}

TEST_CASE("symplectisation of the standard entry") {
  auto entry = models::standard(1);
  auto sym = symplectise(entry.manifold);
  REQUIRE(sym.space.chart().dim() == 4);

  // top power nonzero at samples
  auto top = wedge(sym.omega, sym.omega);
  Sampler rng(21);
  for (int s = 0; s < 100; ++s) {
    Vec p = sym.space.sample(rng);
    std::vector<Vec> frame;
    for (int i = 0; i < 4; ++i) {
      Vec e = Vec::Zero(4);
      e[i] = 1.0;
      frame.push_back(e);
    }
    REQUIRE(std::abs(evaluate(top, p, std::span<const Vec>(frame))) > 1e-10);
  }

  // omega agrees with the generic exterior derivative of e^s p^* alpha
  auto generic = exterior_derivative(sym.scaled_alpha);
  for (int s = 0; s < 30; ++s) {
    Vec p = sym.space.sample(rng);
    REQUIRE(tangent_residual(sym.space, generic - sym.omega, p) < 1e-9);
  }

  // closedness of the assembled form
  auto dw = exterior_derivative(sym.omega);
  for (int s = 0; s < 20; ++s) {
    Vec p = sym.space.sample(rng);
    REQUIRE(tangent_residual(sym.space, dw, p) < 1e-9);
  }

  // e^t p^* alpha on M-tangent vectors equals e^t alpha
  for (int s = 0; s < 20; ++s) {
    Vec p = sym.space.sample(rng);
    Vec v4 = Vec::Zero(4);
    v4[1] = rng.uniform(-1, 1);
    v4[2] = rng.uniform(-1, 1);
    v4[3] = rng.uniform(-1, 1);
    Vec base_p = p.tail(3);
    Vec base_v = v4.tail(3);
    std::vector<Vec> args4 = {v4};
    std::vector<Vec> args3 = {base_v};
    double lhs = evaluate(sym.scaled_alpha, p, std::span<const Vec>(args4));
    double rhs = std::exp(p[0]) * evaluate(entry.manifold.alpha(), base_p,
                                           std::span<const Vec>(args3));
    REQUIRE(lhs == Catch::Approx(rhs).margin(1e-12));
  }
}

TEST_CASE("symplectise then contactise reproduces alpha on the zero slice") {
  auto entry = models::standard(1);
  auto sym = symplectise(entry.manifold);
  auto slice = coordinate_field(sym.space.chart(), 0);
  auto back = contactise(sym.space, sym.omega, sym.liouville, slice,
                         CheckOptions{.samples = 40, .seed = 6});
  Sampler rng(31);
  for (int s = 0; s < 50; ++s) {
    Vec p = back.manifold().sample(rng);
    REQUIRE(std::abs(p[0]) < 1e-12);  // on the t = 0 slice
    Vec v4 = Vec::Zero(4);
    for (int i = 1; i < 4; ++i) v4[i] = rng.uniform(-1, 1);
    std::vector<Vec> args4 = {v4};
    Vec base_p = p.tail(3);
    Vec base_v = v4.tail(3);
    std::vector<Vec> args3 = {base_v};
    double lhs = evaluate(back.alpha(), p, std::span<const Vec>(args4));
    double rhs = evaluate(entry.manifold.alpha(), base_p, std::span<const Vec>(args3));
    REQUIRE(std::abs(lhs - rhs) < 1e-9);
  }
}
