#ifndef CONTACTLAB_MODELS_HPP
#define CONTACTLAB_MODELS_HPP

#include <numeric>
#include <variant>

#include "contactlab/contact.hpp"

namespace contactlab {

/// Concrete contact manifold with the extras its construction provides:
/// a closed-form Reeb field when one is known, torus generators and radial
/// integrals for the spheres.
struct ContactEntry {
  std::string key;
  std::string description;
  StrictContactManifold manifold;
  std::vector<VectorField> torus_generators;  // rotation generators, spheres only
  std::vector<ScalarField> integrals;         // |z_j|^2 per block, spheres only
  std::vector<double> weights;                // a_j, spheres only
};

/// Symplectic model carrying its Liouville field and the unit-sphere
/// constraint used by the contactisation pipeline.
struct SymplecticEntry {
  std::string key;
  std::string description;
  ManifoldSpec space;
  DifferentialForm omega;
  VectorField liouville;
  ScalarField sphere_constraint;  // sum |z|^2 - 1
};

using CatalogEntry = std::variant<ContactEntry, SymplecticEntry>;

namespace models {

/// (R^{2n+1}, dz + sum x_j dy_j), coordinates (z, x_1, y_1, ..., x_n, y_n).
inline ContactEntry standard(int n) {
  if (n < 1) throw BadParams("standard model needs n >= 1");
  std::vector<std::string> names = {"z"};
  for (int j = 1; j <= n; ++j) {
    names.push_back("x" + std::to_string(j));
    names.push_back("y" + std::to_string(j));
  }
  Chart c = Chart::cartesian(std::move(names));
  DifferentialForm alpha(1, c);
  alpha.set_coefficient({0}, constant_field(c, 1.0));
  for (int j = 1; j <= n; ++j) {
    alpha.set_coefficient({2 * j}, coordinate_field(c, 2 * j - 1));
  }
  VectorField reeb = basis_vector_field(c, 0);
  StrictContactManifold M(ManifoldSpec::intrinsic(c), alpha, reeb);
  return {"standard_n" + std::to_string(n), "dz + sum x_j dy_j on R^(2n+1)",
          std::move(M), {}, {}, {}};
}

/// (S^1 x T^2, cos(nt) dtheta1 + sin(nt) dtheta2).
inline ContactEntry torus_family(int n) {
  if (n < 1) throw BadParams("torus family needs n >= 1");
  Chart c = Chart::angles({"t", "theta1", "theta2"});
  double nn = n;
  DifferentialForm alpha(1, c);
  alpha.set_coefficient({1}, make_field(c, [nn](auto p) { return cos(nn * p[0]); }));
  alpha.set_coefficient({2}, make_field(c, [nn](auto p) { return sin(nn * p[0]); }));
  VectorField reeb(c, {constant_field(c, 0.0),
                       make_field(c, [nn](auto p) { return cos(nn * p[0]); }),
                       make_field(c, [nn](auto p) { return sin(nn * p[0]); })});
  StrictContactManifold M(ManifoldSpec::intrinsic(c), alpha, reeb);
  return {"torus_n" + std::to_string(n), "cos(nt) dtheta1 + sin(nt) dtheta2 on S^1 x T^2",
          std::move(M), {}, {}, {}};
}

/// Cylindrical chart U = {r > 0, 0 < theta < 2 pi} with
/// alpha = cos(r) dz + r sin(r) dtheta.
inline ContactEntry cylindrical_u() {
  const double two_pi = 6.283185307179586;
  const double margin = 1e-3;
  Chart c;
  c.coords = {"r", "theta", "z"};
  c.periodic = {false, false, false};
  c.range = {{margin, 6.0}, {margin, two_pi - margin}, {-2.0, 2.0}};
  c.domain_constraints.push_back(parse("r", c.coords));
  c.domain_constraints.push_back(parse("theta", c.coords));
  c.domain_constraints.push_back(parse("2*pi - theta", c.coords));
  DifferentialForm alpha(1, c);
  alpha.set_coefficient({2}, make_field(c, [](auto p) { return cos(p[0]); }));
  alpha.set_coefficient({1}, make_field(c, [](auto p) { return p[0] * sin(p[0]); }));
  // denominator r + sin(r)cos(r) > 0 on r > 0
  auto denom = [](auto r) { return r + sin(r) * cos(r); };
  VectorField reeb(c, {constant_field(c, 0.0),
                       make_field(c, [denom](auto p) { return sin(p[0]) / denom(p[0]); }),
                       make_field(c, [denom](auto p) {
                         return (sin(p[0]) + p[0] * cos(p[0])) / denom(p[0]);
                       })});
  StrictContactManifold M(ManifoldSpec::intrinsic(c), alpha, reeb);
  return {"cylinder", "cos(r) dz + r sin(r) dtheta on the slit cylinder chart", std::move(M),
          {}, {}, {}};
}

/// Weighted contact sphere S^{2n+1} in R^{2n+2} with weights a_0..a_n:
/// alpha = (1/4) sum a_j (x_j dy_j - y_j dx_j) restricted to the unit sphere,
/// Reeb field sum (4/a_j)(x_j d/dy_j - y_j d/dx_j).
inline ContactEntry weighted_sphere(int n, std::vector<double> a) {
  if (n < 1) throw BadParams("weighted sphere needs n >= 1");
  if (static_cast<int>(a.size()) != n + 1) throw BadParams("weighted sphere needs n+1 weights");
  for (double w : a) {
    if (!(w > 0.0)) throw BadParams("weighted sphere weights must be positive");
  }
  std::vector<std::string> names;
  for (int j = 0; j <= n; ++j) {
    names.push_back("x" + std::to_string(j));
    names.push_back("y" + std::to_string(j));
  }
  Chart c = Chart::cartesian(std::move(names));
  auto sphere = make_field(c, [](auto p) {
    using S = typename std::decay_t<decltype(p)>::value_type;
    S acc(-1.0);
    for (std::size_t i = 0; i < p.size(); ++i) acc = acc + p[i] * p[i];
    return acc;
  });
  DifferentialForm alpha(1, c);
  std::vector<ScalarField> reeb_comps;
  std::vector<VectorField> generators;
  std::vector<ScalarField> integrals;
  for (int j = 0; j <= n; ++j) {
    const int xi = 2 * j;
    const int yi = 2 * j + 1;
    double w = a[static_cast<std::size_t>(j)];
    alpha.set_coefficient({yi}, (w / 4.0) * coordinate_field(c, xi));
    alpha.set_coefficient({xi}, (-w / 4.0) * coordinate_field(c, yi));
    reeb_comps.push_back((-4.0 / w) * coordinate_field(c, yi));
    reeb_comps.push_back((4.0 / w) * coordinate_field(c, xi));
    std::vector<ScalarField> gen(2 * static_cast<std::size_t>(n) + 2);
    for (int i = 0; i < 2 * n + 2; ++i) gen[static_cast<std::size_t>(i)] = constant_field(c, 0.0);
    gen[static_cast<std::size_t>(xi)] = -coordinate_field(c, yi);
    gen[static_cast<std::size_t>(yi)] = coordinate_field(c, xi);
    generators.emplace_back(c, std::move(gen));
    integrals.push_back(coordinate_field(c, xi) * coordinate_field(c, xi) +
                        coordinate_field(c, yi) * coordinate_field(c, yi));
  }
  VectorField reeb(c, std::move(reeb_comps));
  StrictContactManifold M(ManifoldSpec::embedded(c, {sphere}), alpha, reeb);
  return {"sphere_n" + std::to_string(n),
          "(1/4) sum a_j (x_j dy_j - y_j dx_j) on the unit sphere, weights a",
          std::move(M),
          std::move(generators),
          std::move(integrals),
          std::move(a)};
}

/// (R^{2n}, omega_st = sum dy_i ^ dx_i) with the radial Liouville field,
/// plus the unit-sphere constraint for contactisation.
inline SymplecticEntry symplectic_std(int n) {
  if (n < 1) throw BadParams("standard symplectic model needs n >= 1");
  std::vector<std::string> names;
  for (int i = 1; i <= n; ++i) {
    names.push_back("x" + std::to_string(i));
    names.push_back("y" + std::to_string(i));
  }
  Chart c = Chart::cartesian(std::move(names));
  DifferentialForm omega(2, c);
  for (int i = 0; i < n; ++i) {
    omega.set_coefficient({2 * i, 2 * i + 1}, constant_field(c, -1.0));
  }
  std::vector<ScalarField> radial;
  for (int i = 0; i < 2 * n; ++i) radial.push_back(0.5 * coordinate_field(c, i));
  auto sphere = make_field(c, [](auto p) {
    using S = typename std::decay_t<decltype(p)>::value_type;
    S acc(-1.0);
    for (std::size_t i = 0; i < p.size(); ++i) acc = acc + p[i] * p[i];
    return acc;
  });
  return {"symplectic_std", "sum dy_i ^ dx_i on R^2n with the radial Liouville field",
          ManifoldSpec::intrinsic(c), std::move(omega), VectorField(c, std::move(radial)),
          std::move(sphere)};
}

}  // namespace models

struct ModelParams {
  int n = 1;
  std::vector<double> a;  // weighted-sphere weights
};

inline CatalogEntry build(const std::string& key, const ModelParams& params = {}) {
  if (key == "standard") return models::standard(params.n);
  if (key == "torus") return models::torus_family(params.n);
  if (key == "cylinder") return models::cylindrical_u();
  if (key == "weighted_sphere") {
    std::vector<double> a = params.a;
    if (a.empty()) {
      for (int j = 0; j <= params.n; ++j) a.push_back(static_cast<double>(j + 1));
    }
    return models::weighted_sphere(params.n, std::move(a));
  }
  if (key == "symplectic_std") return models::symplectic_std(params.n);
  throw BadParams("unknown catalog key '" + key + "'");
}

/// The fixed roster the verification suites run over.
inline std::vector<ContactEntry> contact_catalog() {
  std::vector<ContactEntry> out;
  out.push_back(models::standard(1));
  out.push_back(models::standard(2));
  out.push_back(models::torus_family(1));
  out.push_back(models::torus_family(2));
  out.push_back(models::torus_family(3));
  out.push_back(models::cylindrical_u());
  out.push_back(models::weighted_sphere(1, {1.0, 2.0}));
  out.push_back(models::weighted_sphere(2, {1.0, 2.0, 3.0}));
  return out;
}

}  // namespace contactlab

#endif
