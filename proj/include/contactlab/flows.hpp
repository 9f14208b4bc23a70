#ifndef CONTACTLAB_FLOWS_HPP
#define CONTACTLAB_FLOWS_HPP

#include <fstream>
#include <iomanip>

#include "contactlab/contact.hpp"

namespace contactlab {

/// Fixed-step trajectory record with per-step conserved-quantity logs.
struct FlowTrace {
  std::vector<double> times;
  Mat states;  // one row per time
  std::vector<std::string> conserved_names;
  std::vector<std::vector<double>> conserved_logs;  // one series per name
  double step = 0.0;
  std::string method = "rk4";
};

namespace detail {

template <class Rhs>
Vec rk4_step(const Rhs& rhs, const Vec& z, double h) {
  Vec k1 = rhs(z);
  Vec k2 = rhs(z + (h / 2.0) * k1);
  Vec k3 = rhs(z + (h / 2.0) * k2);
  Vec k4 = rhs(z + h * k3);
  return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

/// Classical fixed-step RK4; embedded specs get one Newton projection back
/// to the constraint set after every step.
template <class Rhs>
FlowTrace integrate_rhs(const ManifoldSpec& M, const Rhs& rhs, Vec z0, double t_end, double h,
                        const std::vector<std::pair<std::string, ScalarField>>& conserved = {}) {
  if (!(h > 0.0)) throw BadParams("integration step must be positive");
  if (M.is_embedded() && !M.project(z0)) {
    throw StepRejected("initial point cannot be projected onto the constraint set");
  }
  if (!M.satisfies_domain(z0)) throw LeftDomain("initial state outside the chart domain");

  const int steps = static_cast<int>(std::llround(t_end / h));
  FlowTrace trace;
  trace.step = h;
  trace.times.reserve(static_cast<std::size_t>(steps) + 1);
  trace.states.resize(steps + 1, z0.size());
  for (const auto& [name, f] : conserved) {
    trace.conserved_names.push_back(name);
    trace.conserved_logs.emplace_back();
    trace.conserved_logs.back().reserve(static_cast<std::size_t>(steps) + 1);
  }

  Vec z = z0;
  for (int k = 0; k <= steps; ++k) {
    trace.times.push_back(k * h);
    trace.states.row(k) = z.transpose();
    for (std::size_t c = 0; c < conserved.size(); ++c) {
      trace.conserved_logs[c].push_back(conserved[c].second.value(z));
    }
    if (k == steps) break;
    z = detail::rk4_step(rhs, z, h);
    if (M.is_embedded()) {
      // one Newton correction per step along the constraint gradient
      M.project(z, 1);
      if (M.constraint_values(z).lpNorm<Eigen::Infinity>() > 1e-8) {
        throw StepRejected("constraint projection failed at t = " + std::to_string((k + 1) * h));
      }
    }
    if (!M.satisfies_domain(z)) {
      throw LeftDomain("trajectory left the chart domain at t = " + std::to_string((k + 1) * h));
    }
  }
  return trace;
}

inline FlowTrace integrate(const ManifoldSpec& M, const VectorField& X, const Vec& z0,
                           double t_end, double h,
                           const std::vector<std::pair<std::string, ScalarField>>& conserved = {}) {
  return integrate_rhs(M, [&X](const Vec& z) { return X.value(z); }, z0, t_end, h, conserved);
}

/// Max drift |f(z(t)) - f(z(0))| per logged function.
inline std::vector<std::pair<std::string, double>> conservation_report(const FlowTrace& trace) {
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t c = 0; c < trace.conserved_names.size(); ++c) {
    const auto& log = trace.conserved_logs[c];
    double drift = 0.0;
    for (double v : log) drift = std::max(drift, std::abs(v - log.front()));
    out.emplace_back(trace.conserved_names[c], drift);
  }
  return out;
}

/// First-order parallel transport of a frame along the flow, reporting the
/// worst drift of alpha evaluated on the transported vectors.  For a strict
/// contact field this stays near zero up to the transport's O(h) error.
inline double alpha_transport_drift(const StrictContactManifold& M, const VectorField& X,
                                    const Vec& z0, double t_end, double h) {
  const int dim = M.manifold().ambient_dim();
  Mat frame = Mat::Identity(dim, dim);
  Vec z = z0;
  std::vector<double> initial(static_cast<std::size_t>(dim));
  Vec ac = one_form_covector(M.alpha(), z);
  for (int i = 0; i < dim; ++i) initial[static_cast<std::size_t>(i)] = ac.dot(frame.col(i));
  const int steps = static_cast<int>(std::llround(t_end / h));
  double worst = 0.0;
  for (int k = 0; k < steps; ++k) {
    // transport each frame vector by v += h (DX) v, first order
    Mat DX(dim, dim);
    for (int j = 0; j < dim; ++j) {
      Vec dir = Vec::Zero(dim);
      dir[j] = 1.0;
      for (int i = 0; i < dim; ++i) {
        DX(i, j) = X.component(i).directional(z, dir);
      }
    }
    frame += h * DX * frame;
    z = detail::rk4_step([&X](const Vec& q) { return X.value(q); }, z, h);
    Vec cov = one_form_covector(M.alpha(), z);
    for (int i = 0; i < dim; ++i) {
      worst = std::max(worst,
                       std::abs(cov.dot(frame.col(i)) - initial[static_cast<std::size_t>(i)]));
    }
  }
  return worst;
}

struct CollinearityReport {
  double max_sine = 0.0;       // worst sine of the angle between X^H and R
  double level_spread = 0.0;   // max |H - H(first sample)| over S
  int samples = 0;
};

/// Symplectic Hamiltonian field X^H (iota_{X^H} omega = -dH) versus the Reeb
/// field of the contact form iota_Y omega on the level hypersurface S.
inline CollinearityReport hamiltonian_vs_reeb_trajectories(
    const ManifoldSpec& W, const DifferentialForm& omega, const ScalarField& H,
    const VectorField& Y, const ScalarField& S, const CheckOptions& opts = {}) {
  StrictContactManifold contact = contactise(W, omega, Y, S, opts);
  const ManifoldSpec& hyper = contact.manifold();

  Sampler rng(opts.seed);
  CollinearityReport rep;
  rep.samples = opts.samples;
  double h0 = 0.0;
  for (int s = 0; s < opts.samples; ++s) {
    Vec p = hyper.sample(rng);
    double hv = H.value(p);
    if (s == 0) {
      h0 = hv;
    } else {
      rep.level_spread = std::max(rep.level_spread, std::abs(hv - h0));
    }
    Mat Om = two_form_matrix(omega, p);
    Vec gradH = H.gradient(p);
    Vec xh = Om.colPivHouseholderQr().solve(-gradH);
    if ((Om * xh + gradH).norm() > 1e-9 * (1.0 + gradH.norm())) {
      throw SingularSystem("symplectic Hamiltonian solve failed", 0.0);
    }
    Vec r = contact.reeb_at(p);
    double denom = xh.norm() * r.norm();
    if (denom == 0.0) continue;
    Vec rhat = r / r.norm();
    Vec residual = xh - xh.dot(rhat) * rhat;
    rep.max_sine = std::max(rep.max_sine, residual.norm() / xh.norm());
  }
  if (rep.level_spread > 1e-8) {
    throw NotLevelSet("S is not a level set of H");
  }
  return rep;
}

/// CSV export: header t,<coords...>,<conserved...>, 17 significant digits.
inline void write_csv(const FlowTrace& trace, const Chart& chart, std::ostream& out) {
  out << "t";
  for (const auto& name : chart.coords) out << "," << name;
  for (const auto& name : trace.conserved_names) out << "," << name;
  out << "\n";
  out << std::setprecision(17);
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    out << trace.times[k];
    for (Eigen::Index j = 0; j < trace.states.cols(); ++j) {
      out << "," << trace.states(static_cast<Eigen::Index>(k), j);
    }
    for (const auto& log : trace.conserved_logs) out << "," << log[k];
    out << "\n";
  }
}

inline void write_csv(const FlowTrace& trace, const Chart& chart, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_csv(trace, chart, out);
}

}  // namespace contactlab

#endif
