#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstring>
#include <vector>

#include "contactlab/forms.hpp"
#include "contactlab/manifold.hpp"

using namespace contactlab;

namespace {

// ---- independent oracles -------------------------------------------------

// Brute-force wedge evaluation straight from the shuffle definition:
// (a ^ b)(v_1..v_{p+q}) = sum over (p,q)-shuffles of sign * a(v_I) * b(v_J).
double wedge_oracle(const DifferentialForm& a, const DifferentialForm& b, const Vec& p,
                    const std::vector<Vec>& vs) {
  const int deg_a = a.degree();
  const int total = deg_a + b.degree();
  std::vector<int> idx(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i) idx[static_cast<std::size_t>(i)] = i;
  double acc = 0.0;
  // enumerate subsets of size deg_a as the a-arguments
  std::vector<int> pick(static_cast<std::size_t>(deg_a));
  for (int i = 0; i < deg_a; ++i) pick[static_cast<std::size_t>(i)] = i;
  auto run = [&](const std::vector<int>& sel) {
    std::vector<bool> in(static_cast<std::size_t>(total), false);
    for (int s : sel) in[static_cast<std::size_t>(s)] = true;
    std::vector<Vec> av;
    std::vector<Vec> bv;
    int inversions = 0;
    int seen_b = 0;
    for (int i = 0; i < total; ++i) {
      if (in[static_cast<std::size_t>(i)]) {
        av.push_back(vs[static_cast<std::size_t>(i)]);
        inversions += seen_b;
      } else {
        bv.push_back(vs[static_cast<std::size_t>(i)]);
        ++seen_b;
      }
    }
    double sign = (inversions % 2 == 0) ? 1.0 : -1.0;
    acc += sign * evaluate(a, p, std::span<const Vec>(av)) *
           evaluate(b, p, std::span<const Vec>(bv));
  };
  if (deg_a == 0) {
    std::vector<int> none;
    run(none);
  } else {
    for (;;) {
      run(pick);
      int pos = deg_a - 1;
      while (pos >= 0 && pick[static_cast<std::size_t>(pos)] == total - deg_a + pos) --pos;
      if (pos < 0) break;
      ++pick[static_cast<std::size_t>(pos)];
      for (int q = pos + 1; q < deg_a; ++q) {
        pick[static_cast<std::size_t>(q)] = pick[static_cast<std::size_t>(q - 1)] + 1;
      }
    }
  }
  return acc;
}

// Tiny test-local RK4 used only as a flow oracle; dual-typed so the
// pushforward rides along in the derivative slot.
template <class S>
std::vector<S> rk4_oracle(const VectorField& X, std::vector<S> z, double t_end, int steps) {
  const double h = t_end / steps;
  auto rhs = [&X](const std::vector<S>& s) { return X.value_t(std::span<const S>(s)); };
  for (int step = 0; step < steps; ++step) {
    auto add = [](const std::vector<S>& u, const std::vector<S>& v, double c) {
      std::vector<S> out(u.size());
      for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] + c * v[i];
      return out;
    };
    auto k1 = rhs(z);
    auto k2 = rhs(add(z, k1, h / 2));
    auto k3 = rhs(add(z, k2, h / 2));
    auto k4 = rhs(add(z, k3, h));
    for (std::size_t i = 0; i < z.size(); ++i) {
      z[i] = z[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }
  return z;
}

Chart r3() { return Chart::cartesian({"x", "y", "z"}); }

// standard contact form dz + x dy on R^3 (coordinate order x,y,z)
DifferentialForm alpha_st_r3() {
  Chart c = r3();
  DifferentialForm a(1, c);
  a.set_coefficient({2}, constant_field(c, 1.0));
  a.set_coefficient({1}, coordinate_field(c, 0));
  return a;
}

Vec vec3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

}  // namespace

TEST_CASE("wedge of coordinate forms") {
  Chart c = r3();
  auto dx = coordinate_form(c, 0);
  auto dy = coordinate_form(c, 1);
  auto w = wedge(dx, dy);
  Vec p = vec3(0.3, -0.7, 1.1);
  std::span<const double> ps(p.data(), 3);
  REQUIRE((*w.coefficient({0, 1}))(ps) == 1.0);
  REQUIRE(w.coefficients().size() == 1);
}

TEST_CASE("alpha_st wedge d(alpha_st) is the volume form on R^3") {
  Chart c = r3();
  auto alpha = alpha_st_r3();
  auto dalpha = exterior_derivative(alpha);
  auto top = wedge(alpha, dalpha);
  Vec p = vec3(0.4, 2.0, -1.0);
  std::vector<Vec> basis = {vec3(1, 0, 0), vec3(0, 1, 0), vec3(0, 0, 1)};
  // n=1: coefficient of dz ^ dx ^ dy = dx ^ dy ^ dz (even permutation)
  REQUIRE(evaluate(top, p, std::span<const Vec>(basis)) == Catch::Approx(1.0));
}

TEST_CASE("wedge matches the shuffle-definition oracle and graded antisymmetry") {
  Chart c = Chart::cartesian({"x", "y", "z", "w"});
  Sampler rng(77);
  int pairs = 0;
  for (int trial = 0; trial < 200; ++trial) {
    int da = 1 + static_cast<int>(rng.raw() % 2);  // 1 or 2
    int db = (da == 2) ? 1 : 1 + static_cast<int>(rng.raw() % 2);
    auto a = random_form(c, da, rng);
    auto b = random_form(c, db, rng);
    auto ab = wedge(a, b);
    auto ba = wedge(b, a);
    Vec p(4);
    for (int i = 0; i < 4; ++i) p[i] = rng.uniform(-1, 1);
    std::vector<Vec> vs;
    for (int k = 0; k < da + db; ++k) {
      Vec v(4);
      for (int i = 0; i < 4; ++i) v[i] = rng.uniform(-1, 1);
      vs.push_back(v);
    }
    double lhs = evaluate(ab, p, std::span<const Vec>(vs));
    double oracle = wedge_oracle(a, b, p, vs);
    REQUIRE(std::abs(lhs - oracle) < 1e-10);
    double sign = (da * db) % 2 == 0 ? 1.0 : -1.0;
    double rhs = sign * evaluate(ba, p, std::span<const Vec>(vs));
    REQUIRE(std::abs(lhs - rhs) < 1e-10);
    ++pairs;
  }
  REQUIRE(pairs == 200);
}

TEST_CASE("d of the standard contact form") {
  auto alpha = alpha_st_r3();
  auto da = exterior_derivative(alpha);
  Vec p = vec3(1.2, 0.1, -0.4);
  std::span<const double> ps(p.data(), 3);
  REQUIRE((*da.coefficient({0, 1}))(ps) == Catch::Approx(1.0));
  if (const ScalarField* c02 = da.coefficient({0, 2})) REQUIRE((*c02)(ps) == 0.0);
  if (const ScalarField* c12 = da.coefficient({1, 2})) REQUIRE((*c12)(ps) == 0.0);
}

TEST_CASE("d o d vanishes on seeded scalar fields") {
  Chart c = r3();
  Sampler rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto f = random_scalar_field(c, rng);
    auto ddf = exterior_derivative(exterior_derivative(scalar_as_form(f)));
    Vec p = vec3(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5));
    std::span<const double> ps(p.data(), 3);
    for (const auto& [idx, coeff] : ddf.coefficients()) {
      REQUIRE(std::abs(coeff(ps)) < 1e-8);
    }
  }
}

TEST_CASE("d of the torus family form, term-by-term oracle") {
  // d(cos(nt) dtheta1 + sin(nt) dtheta2) = -n sin(nt) dt^dtheta1 + n cos(nt) dt^dtheta2
  Chart c = Chart::angles({"t", "theta1", "theta2"});
  for (int n = 1; n <= 3; ++n) {
    DifferentialForm alpha(1, c);
    double nn = n;
    alpha.set_coefficient({1}, make_field(c, [nn](auto p) { return contactlab::cos(nn * p[0]); }));
    alpha.set_coefficient({2}, make_field(c, [nn](auto p) { return contactlab::sin(nn * p[0]); }));
    auto da = exterior_derivative(alpha);
    Sampler rng(5);
    for (int s = 0; s < 20; ++s) {
      Vec p = vec3(rng.uniform(0, 6.28), rng.uniform(0, 6.28), rng.uniform(0, 6.28));
      std::span<const double> ps(p.data(), 3);
      REQUIRE((*da.coefficient({0, 1}))(ps) == Catch::Approx(-nn * std::sin(nn * p[0])).margin(1e-12));
      REQUIRE((*da.coefficient({0, 2}))(ps) == Catch::Approx(nn * std::cos(nn * p[0])).margin(1e-12));
    }
  }
}

TEST_CASE("interior products") {
  Chart c = r3();
  auto alpha = alpha_st_r3();
  auto dz_dir = basis_vector_field(c, 2);
  auto pairing = interior_product(dz_dir, alpha);
  Vec p = vec3(5.0, -3.0, 2.0);
  std::span<const double> ps(p.data(), 3);
  REQUIRE(pairing.degree() == 0);
  REQUIRE((*pairing.coefficient({}))(ps) == 1.0);

  auto dxdy = wedge(coordinate_form(c, 0), coordinate_form(c, 1));
  auto dy = interior_product(basis_vector_field(c, 0), dxdy);
  REQUIRE((*dy.coefficient({1}))(ps) == 1.0);

  Sampler rng(19);
  for (int trial = 0; trial < 30; ++trial) {
    auto X = random_vector_field(c, rng);
    auto a = random_form(c, 2, rng);
    auto xxa = interior_product(X, interior_product(X, a));
    Vec q = vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    std::span<const double> qs(q.data(), 3);
    REQUIRE(std::abs((*xxa.coefficient({}))(qs)) < 1e-10);
  }
}

TEST_CASE("Lie derivative basics") {
  Chart line = Chart::cartesian({"x"});
  DifferentialForm dx(1, line);
  dx.set_coefficient({0}, constant_field(line, 1.0));
  VectorField X(line, {coordinate_field(line, 0)});  // x d/dx
  auto lie = lie_derivative(X, dx);
  Vec p(1);
  p << 0.7;
  std::span<const double> ps(p.data(), 1);
  REQUIRE((*lie.coefficient({0}))(ps) == Catch::Approx(1.0));
}

TEST_CASE("radial field is Liouville for the standard symplectic form") {
  for (int n = 1; n <= 2; ++n) {
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) {
      names.push_back("x" + std::to_string(i + 1));
      names.push_back("y" + std::to_string(i + 1));
    }
    Chart c = Chart::cartesian(names);
    DifferentialForm omega(2, c);
    for (int i = 0; i < n; ++i) {
      // omega_st = sum dy_i ^ dx_i: increasing index (2i, 2i+1) carries -1
      omega.set_coefficient({2 * i, 2 * i + 1}, constant_field(c, -1.0));
    }
    std::vector<ScalarField> comps;
    for (int i = 0; i < 2 * n; ++i) comps.push_back(0.5 * coordinate_field(c, i));
    VectorField Y(c, comps);
    auto lie = lie_derivative(Y, omega);
    auto diff = lie - omega;
    Sampler rng(3);
    for (int s = 0; s < 20; ++s) {
      Vec p(2 * n);
      for (int i = 0; i < 2 * n; ++i) p[i] = rng.uniform(-2, 2);
      std::span<const double> ps(p.data(), static_cast<std::size_t>(2 * n));
      for (const auto& [idx, coeff] : diff.coefficients()) {
        REQUIRE(std::abs(coeff(ps)) < 1e-8);
      }
    }
  }
}

TEST_CASE("Lie brackets with the componentwise differentiation oracle") {
  Chart c = r3();
  auto zero = lie_bracket(basis_vector_field(c, 0), basis_vector_field(c, 1));
  Vec p = vec3(0.2, 0.4, 0.8);
  REQUIRE(zero.value(p).norm() == 0.0);

  // [d/dy, y d/dz - d/dx] = d/dz
  VectorField A = basis_vector_field(c, 1);
  VectorField B(c, {constant_field(c, -1.0), constant_field(c, 0.0), coordinate_field(c, 1)});
  auto bracket = lie_bracket(A, B);
  Vec v = bracket.value(p);
  REQUIRE(v[0] == Catch::Approx(0.0).margin(1e-14));
  REQUIRE(v[1] == Catch::Approx(0.0).margin(1e-14));
  REQUIRE(v[2] == Catch::Approx(1.0));
}

TEST_CASE("Jacobi identity for the Lie bracket on seeded triples") {
  Chart c = r3();
  Sampler rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    auto X = random_vector_field(c, rng);
    auto Y = random_vector_field(c, rng);
    auto Z = random_vector_field(c, rng);
    auto total = lie_bracket(X, lie_bracket(Y, Z));
    auto t2 = lie_bracket(Y, lie_bracket(Z, X));
    auto t3 = lie_bracket(Z, lie_bracket(X, Y));
    for (int s = 0; s < 20; ++s) {
      Vec p = vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
      Vec sum = total.value(p) + t2.value(p) + t3.value(p);
      REQUIRE(sum.lpNorm<Eigen::Infinity>() < 1e-7);
    }
  }
}

TEST_CASE("pullback along the identity is the identity") {
  Chart c = r3();
  std::vector<ScalarField> comps = {coordinate_field(c, 0), coordinate_field(c, 1),
                                    coordinate_field(c, 2)};
  SmoothMap id(c, c, comps);
  auto alpha = alpha_st_r3();
  auto back = pullback(id, alpha);
  Sampler rng(9);
  for (int s = 0; s < 20; ++s) {
    Vec p = vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    Vec v = vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    std::vector<Vec> args = {v};
    REQUIRE(evaluate(back, p, std::span<const Vec>(args)) ==
            Catch::Approx(evaluate(alpha, p, std::span<const Vec>(args))).margin(1e-12));
  }
}

TEST_CASE("the map (x,y,z) -> (-y, x+y, 2z) carries alpha_st to -y dx - y dy + 2 dz") {
  // phi(x,y,z) = (-y, x+y, 2z) satisfies phi^* alpha_st = -y dx - y dy + 2 dz
  Chart c = r3();
  std::vector<ScalarField> comps = {-coordinate_field(c, 1),
                                    coordinate_field(c, 0) + coordinate_field(c, 1),
                                    2.0 * coordinate_field(c, 2)};
  SmoothMap phi(c, c, comps);
  auto back = pullback(phi, alpha_st_r3());

  DifferentialForm target(1, c);
  target.set_coefficient({0}, -coordinate_field(c, 1));
  target.set_coefficient({1}, -coordinate_field(c, 1));
  target.set_coefficient({2}, constant_field(c, 2.0));

  Sampler rng(42);
  for (int s = 0; s < 100; ++s) {
    Vec p = vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    for (int dir = 0; dir < 3; ++dir) {
      Vec v = Vec::Zero(3);
      v[dir] = 1.0;
      std::vector<Vec> args = {v};
      double lhs = evaluate(back, p, std::span<const Vec>(args));
      double rhs = evaluate(target, p, std::span<const Vec>(args));
      REQUIRE(std::abs(lhs - rhs) < 1e-9);
    }
  }
}

TEST_CASE("Leibniz rule for d over wedge on seeded forms") {
  Chart c = r3();
  Sampler rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    auto a = random_form(c, 1, rng);
    auto b = random_form(c, 1, rng);
    auto lhs = exterior_derivative(wedge(a, b));
    auto rhs = wedge(exterior_derivative(a), b) - wedge(a, exterior_derivative(b));
    auto diff = lhs - rhs;
    for (int s = 0; s < 10; ++s) {
      Vec p = vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
      std::span<const double> ps(p.data(), 3);
      for (const auto& [idx, coeff] : diff.coefficients()) {
        REQUIRE(std::abs(coeff(ps)) < 1e-8);
      }
    }
  }
}

TEST_CASE("Cartan formula agrees with the flow-based finite difference") {
  Chart c = r3();
  Sampler rng(57);
  const double h = 1e-5;
  for (int trial = 0; trial < 5; ++trial) {
    auto X = random_vector_field(c, rng);
    auto a = random_form(c, 1, rng);
    auto lie = lie_derivative(X, a);
    for (int s = 0; s < 5; ++s) {
      Vec p = vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
      Vec v = vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
      // (psi_h^* a)(v)|_p = a_{psi_h(p)}(T psi_h v)
      std::vector<Dual1> z(3);
      for (int i = 0; i < 3; ++i) z[static_cast<std::size_t>(i)] = Dual1(p[i], v[i]);
      auto moved = rk4_oracle(X, z, h, 4);
      Vec q(3);
      Vec pushed(3);
      for (int i = 0; i < 3; ++i) {
        q[i] = moved[static_cast<std::size_t>(i)].a;
        pushed[i] = moved[static_cast<std::size_t>(i)].b;
      }
      std::vector<Vec> args_q = {pushed};
      std::vector<Vec> args_p = {v};
      double fd = (evaluate(a, q, std::span<const Vec>(args_q)) -
                   evaluate(a, p, std::span<const Vec>(args_p))) /
                  h;
      double formula = evaluate(lie, p, std::span<const Vec>(args_p));
      REQUIRE(std::abs(fd - formula) < 1e-3);
    }
  }
}

TEST_CASE("form evaluation negates exactly under argument swap") {
  Chart c = Chart::cartesian({"x", "y", "z", "w"});
  Sampler rng(63);
  for (int trial = 0; trial < 50; ++trial) {
    auto a = random_form(c, 2, rng);
    Vec p(4);
    Vec u(4);
    Vec v(4);
    for (int i = 0; i < 4; ++i) {
      p[i] = rng.uniform(-1, 1);
      u[i] = rng.uniform(-1, 1);
      v[i] = rng.uniform(-1, 1);
    }
    std::vector<Vec> uv = {u, v};
    std::vector<Vec> vu = {v, u};
    double x = evaluate(a, p, std::span<const Vec>(uv));
    double y = -evaluate(a, p, std::span<const Vec>(vu));
    REQUIRE(std::memcmp(&x, &y, sizeof x) == 0);
  }
}

TEST_CASE("embedded sphere sampling respects constraints and rank") {
  Chart amb = Chart::cartesian({"x1", "y1", "x2", "y2"});
  auto sphere_constraint = make_field(amb, [](auto p) {
    using S = typename std::decay_t<decltype(p)>::value_type;
    S acc(-1.0);
    for (std::size_t i = 0; i < p.size(); ++i) acc = acc + p[i] * p[i];
    return acc;
  });
  auto M = ManifoldSpec::embedded(amb, {sphere_constraint});
  REQUIRE(M.intrinsic_dim() == 3);
  Sampler rng(0);
  for (int s = 0; s < 100; ++s) {
    Vec p = M.sample(rng);
    REQUIRE(std::abs(M.constraint_values(p)[0]) < 1e-12);
    Mat T = M.tangent_basis(p);
    REQUIRE(T.cols() == 3);
    REQUIRE((T.transpose() * T - Mat::Identity(3, 3)).norm() < 1e-12);
    REQUIRE((M.constraint_jacobian(p) * T).norm() < 1e-10);
  }
}
