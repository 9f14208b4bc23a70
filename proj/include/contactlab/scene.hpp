#ifndef CONTACTLAB_SCENE_HPP
#define CONTACTLAB_SCENE_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "contactlab/integrability.hpp"
#include "contactlab/toric.hpp"

namespace contactlab::scene {

/// Line-oriented scene file:
///   seed = 0
///   [manifold M]
///   catalog = standard
///   n = 1
///   [task verify-contact]
///   manifold = M
/// Sections declare manifolds, scalars, vector fields, forms, cones and
/// tasks; tasks run in order and write one report each.

inline std::string fmt17(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct KeyValue {
  std::string key;
  std::vector<std::string> args;  // parenthesized argument list, if any
  std::string value;
  std::size_t line = 0;
};

struct Section {
  std::string kind;   // manifold | scalar | vfield | form | cone | task
  std::string name;   // entity name, or task kind
  std::string label;  // optional task label
  std::vector<KeyValue> entries;
  std::size_t line = 0;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline double parse_number(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw SceneError(line, 1, "expected a number, found '" + s + "'");
  }
}

inline long long parse_integer(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw SceneError(line, 1, "expected an integer, found '" + s + "'");
  }
}

}  // namespace detail

inline std::vector<Section> parse_scene(std::istream& in) {
  std::vector<Section> sections;
  // implicit top-level section for scene-wide keys
  sections.push_back({"scene", "", "", {}, 0});
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = detail::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw SceneError(line_no, line.size(), "unterminated section header");
      auto fields = detail::split(line.substr(1, line.size() - 2), ' ');
      std::vector<std::string> parts;
      for (auto& f : fields) {
        if (!f.empty()) parts.push_back(f);
      }
      if (parts.empty()) throw SceneError(line_no, 2, "empty section header");
      Section s;
      s.kind = parts[0];
      s.line = line_no;
      if (parts.size() > 1) s.name = parts[1];
      if (parts.size() > 2) s.label = parts[2];
      if (parts.size() > 3) throw SceneError(line_no, 2, "too many fields in section header");
      sections.push_back(std::move(s));
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw SceneError(line_no, 1, "expected 'key = value'");
    }
    std::string lhs = detail::trim(line.substr(0, eq));
    KeyValue kv;
    kv.value = detail::trim(line.substr(eq + 1));
    kv.line = line_no;
    std::size_t paren = lhs.find('(');
    if (paren != std::string::npos) {
      if (lhs.back() != ')') throw SceneError(line_no, paren, "unterminated key arguments");
      kv.key = detail::trim(lhs.substr(0, paren));
      for (auto& a : detail::split(lhs.substr(paren + 1, lhs.size() - paren - 2), ',')) {
        kv.args.push_back(a);
      }
    } else {
      kv.key = lhs;
    }
    if (kv.key.empty()) throw SceneError(line_no, 1, "empty key");
    sections.back().entries.push_back(std::move(kv));
  }
  return sections;
}

/// Named entities declared by a scene.
struct SceneModel {
  std::uint64_t seed = 0;
  int samples = 100;
  std::optional<double> tol;  // overrides per-task default pass thresholds

  std::map<std::string, ContactEntry> contact_entries;
  std::map<std::string, SymplecticEntry> symplectic_entries;
  std::map<std::string, ScalarField> scalars;
  std::map<std::string, VectorField> vfields;
  std::map<std::string, DifferentialForm> forms;
  std::map<std::string, ConeSpec> cones;
  std::vector<Section> tasks;

  const ContactEntry& contact(const std::string& name, std::size_t line) const {
    auto it = contact_entries.find(name);
    if (it == contact_entries.end()) {
      throw SceneError(line, 1, "unknown contact manifold '" + name + "'");
    }
    return it->second;
  }
};

namespace detail {

inline const KeyValue* find_key(const Section& s, const std::string& key) {
  for (const auto& kv : s.entries) {
    if (kv.key == key && kv.args.empty()) return &kv;
  }
  return nullptr;
}

inline std::string require_value(const Section& s, const std::string& key) {
  const KeyValue* kv = find_key(s, key);
  if (!kv) throw SceneError(s.line, 1, "section needs '" + key + " = ...'");
  return kv->value;
}

inline Chart build_inline_chart(const Section& s) {
  const KeyValue* coords = find_key(s, "coords");
  if (!coords) throw SceneError(s.line, 1, "inline manifold needs 'coords = ...'");
  Chart c;
  for (auto& name : split(coords->value, ',')) c.coords.push_back(name);
  const int n = c.dim();
  c.periodic.assign(static_cast<std::size_t>(n), false);
  if (const KeyValue* periodic = find_key(s, "periodic")) {
    auto flags = split(periodic->value, ',');
    if (static_cast<int>(flags.size()) != n) {
      throw SceneError(periodic->line, 1, "periodic needs one flag per coordinate");
    }
    for (int i = 0; i < n; ++i) c.periodic[static_cast<std::size_t>(i)] = flags[static_cast<std::size_t>(i)] == "1";
  }
  const double two_pi = 6.283185307179586;
  for (int i = 0; i < n; ++i) {
    c.range.push_back(c.periodic[static_cast<std::size_t>(i)] ? std::make_pair(0.0, two_pi)
                                                              : std::make_pair(-2.0, 2.0));
  }
  if (const KeyValue* range = find_key(s, "range")) {
    auto spans = split(range->value, ',');
    if (static_cast<int>(spans.size()) != n) {
      throw SceneError(range->line, 1, "range needs one lo:hi span per coordinate");
    }
    for (int i = 0; i < n; ++i) {
      auto lohi = split(spans[static_cast<std::size_t>(i)], ':');
      if (lohi.size() != 2) throw SceneError(range->line, 1, "range spans look like lo:hi");
      c.range[static_cast<std::size_t>(i)] = {parse_number(lohi[0], range->line),
                                              parse_number(lohi[1], range->line)};
    }
  }
  for (const auto& kv : s.entries) {
    if (kv.key == "domain" && kv.args.empty()) {
      c.domain_constraints.push_back(parse(kv.value, c.coords));
    }
  }
  return c;
}

inline DifferentialForm build_form(const Section& s, const Chart& chart, const std::string& key,
                                   int degree) {
  DifferentialForm form(degree, chart);
  for (const auto& kv : s.entries) {
    if (kv.key != key || kv.args.empty()) continue;
    if (static_cast<int>(kv.args.size()) != degree) {
      throw SceneError(kv.line, 1, key + " needs " + std::to_string(degree) + " indices");
    }
    MultiIndex idx;
    for (const auto& a : kv.args) {
      int i = chart.index_of(a);
      if (i < 0) throw SceneError(kv.line, 1, "unknown coordinate '" + a + "'");
      idx.push_back(i);
    }
    try {
      form.add_coefficient(idx, expression_field(chart, parse(kv.value, chart.coords)));
    } catch (const SyntaxError& err) {
      throw SceneError(kv.line, err.position + 1, err.what());
    } catch (const UnknownIdentifier& err) {
      throw SceneError(kv.line, 1, err.what());
    } catch (const Error& err) {
      throw SceneError(kv.line, 1, err.what());
    }
  }
  return form;
}

inline void register_manifold(SceneModel& model, const Section& s) {
  if (s.name.empty()) throw SceneError(s.line, 1, "manifold section needs a name");
  if (const KeyValue* cat = find_key(s, "catalog")) {
    ModelParams params;
    if (const KeyValue* n = find_key(s, "n")) {
      params.n = static_cast<int>(parse_integer(n->value, n->line));
    }
    if (const KeyValue* a = find_key(s, "a")) {
      for (auto& x : split(a->value, ',')) params.a.push_back(parse_number(x, a->line));
    }
    CatalogEntry entry = build(cat->value, params);
    if (std::holds_alternative<ContactEntry>(entry)) {
      auto ce = std::get<ContactEntry>(std::move(entry));
      // expose the radial integrals as named scalars: <name>.f0, <name>.f1, ...
      for (std::size_t j = 0; j < ce.integrals.size(); ++j) {
        model.scalars.emplace(s.name + ".f" + std::to_string(j), ce.integrals[j]);
      }
      model.contact_entries.emplace(s.name, std::move(ce));
    } else {
      model.symplectic_entries.emplace(s.name, std::get<SymplecticEntry>(std::move(entry)));
    }
    return;
  }
  Chart chart = build_inline_chart(s);
  std::vector<ScalarField> constraints;
  for (const auto& kv : s.entries) {
    if (kv.key == "constraint" && kv.args.empty()) {
      constraints.push_back(expression_field(chart, parse(kv.value, chart.coords)));
    }
  }
  ManifoldSpec spec = constraints.empty() ? ManifoldSpec::intrinsic(chart)
                                          : ManifoldSpec::embedded(chart, constraints);
  DifferentialForm alpha = build_form(s, chart, "alpha", 1);
  if (alpha.coefficients().empty()) {
    throw SceneError(s.line, 1, "inline manifold needs alpha(coord) = ... coefficients");
  }
  // skip the build-time self check so degenerate forms reach verify-contact
  StrictContactManifold M(std::move(spec), std::move(alpha), std::nullopt,
                          CheckOptions{.samples = 0, .seed = 0});
  model.contact_entries.emplace(
      s.name, ContactEntry{s.name, "scene-declared manifold", std::move(M), {}, {}, {}});
}

}  // namespace detail

inline SceneModel build_scene(const std::vector<Section>& sections) {
  SceneModel model;
  for (const auto& s : sections) {
    if (s.kind == "scene") {
      if (const auto* kv = detail::find_key(s, "seed")) {
        model.seed = static_cast<std::uint64_t>(detail::parse_integer(kv->value, kv->line));
      }
      if (const auto* kv = detail::find_key(s, "samples")) {
        model.samples = static_cast<int>(detail::parse_integer(kv->value, kv->line));
      }
      if (const auto* kv = detail::find_key(s, "tol")) {
        model.tol = detail::parse_number(kv->value, kv->line);
      }
    } else if (s.kind == "manifold") {
      detail::register_manifold(model, s);
    } else if (s.kind == "scalar") {
      const auto& entry = model.contact(detail::require_value(s, "manifold"), s.line);
      const Chart& chart = entry.manifold.manifold().chart();
      try {
        model.scalars.emplace(
            s.name, expression_field(chart, parse(detail::require_value(s, "expr"), chart.coords)));
      } catch (const Error& err) {
        throw SceneError(s.line, 1, err.what());
      }
    } else if (s.kind == "vfield") {
      const auto& entry = model.contact(detail::require_value(s, "manifold"), s.line);
      const Chart& chart = entry.manifold.manifold().chart();
      std::vector<ScalarField> comps(static_cast<std::size_t>(chart.dim()));
      for (int i = 0; i < chart.dim(); ++i) comps[static_cast<std::size_t>(i)] = constant_field(chart, 0.0);
      for (const auto& kv : s.entries) {
        if (kv.key != "component" || kv.args.size() != 1) continue;
        int i = chart.index_of(kv.args[0]);
        if (i < 0) throw SceneError(kv.line, 1, "unknown coordinate '" + kv.args[0] + "'");
        try {
          comps[static_cast<std::size_t>(i)] = expression_field(chart, parse(kv.value, chart.coords));
        } catch (const Error& err) {
          throw SceneError(kv.line, 1, err.what());
        }
      }
      model.vfields.emplace(s.name, VectorField(chart, std::move(comps)));
    } else if (s.kind == "form") {
      const auto& entry = model.contact(detail::require_value(s, "manifold"), s.line);
      const Chart& chart = entry.manifold.manifold().chart();
      int degree = static_cast<int>(detail::parse_integer(detail::require_value(s, "degree"), s.line));
      model.forms.emplace(s.name, detail::build_form(s, chart, "coeff", degree));
    } else if (s.kind == "cone") {
      int n = static_cast<int>(detail::parse_integer(detail::require_value(s, "n"), s.line));
      std::vector<std::vector<long long>> normals;
      for (const auto& kv : s.entries) {
        if (kv.key != "normal") continue;
        std::vector<long long> v;
        for (auto& x : detail::split(kv.value, ',')) v.push_back(detail::parse_integer(x, kv.line));
        normals.push_back(std::move(v));
      }
      try {
        model.cones.emplace(s.name, ConeSpec(n, std::move(normals)));
      } catch (const Error& err) {
        throw SceneError(s.line, 1, err.what());
      }
    } else if (s.kind == "task") {
      if (s.name.empty()) throw SceneError(s.line, 1, "task section needs a kind");
      model.tasks.push_back(s);
    } else {
      throw SceneError(s.line, 1, "unknown section kind '" + s.kind + "'");
    }
  }
  return model;
}

struct TaskResult {
  std::string label;
  bool pass = false;
  double max_residual = 0.0;
  std::string report_path;
};

namespace detail {

struct TaskContext {
  const SceneModel& model;
  const Section& task;
  CheckOptions opts;
  std::optional<double> tol_override;
  std::ostringstream report;

  std::string value_or(const std::string& key, const std::string& fallback) const {
    const KeyValue* kv = find_key(task, key);
    return kv ? kv->value : fallback;
  }
  std::string require(const std::string& key) const { return require_value(task, key); }

  const ContactEntry& manifold() const { return model.contact(require("manifold"), task.line); }

  const ScalarField& scalar(const std::string& name) const {
    auto it = model.scalars.find(name);
    if (it == model.scalars.end()) {
      throw SceneError(task.line, 1, "unknown scalar '" + name + "'");
    }
    return it->second;
  }

  const ConeSpec& cone(const std::string& name) const {
    auto it = model.cones.find(name);
    if (it == model.cones.end()) throw SceneError(task.line, 1, "unknown cone '" + name + "'");
    return it->second;
  }
};

inline VectorField resolve_field(const TaskContext& ctx, const ContactEntry& entry,
                                 const std::string& spec_text) {
  if (spec_text == "reeb") return entry.manifold.reeb_field();
  if (spec_text.rfind("hamiltonian:", 0) == 0) {
    const ScalarField& H = ctx.scalar(spec_text.substr(12));
    return hamiltonian_field(entry.manifold, H).field;
  }
  auto it = ctx.model.vfields.find(spec_text);
  if (it == ctx.model.vfields.end()) {
    throw SceneError(ctx.task.line, 1, "unknown vector field '" + spec_text + "'");
  }
  return it->second;
}

// ---- task handlers ---------------------------------------------------------

inline TaskResult task_verify_contact(TaskContext& ctx) {
  const auto& entry = ctx.manifold();
  auto rep = verify_contact(entry.manifold.manifold(), entry.manifold.alpha(), ctx.opts);
  ctx.report << "task: verify-contact\nmanifold: " << ctx.require("manifold") << "\n";
  ctx.report << "samples: " << rep.samples << "\n";
  ctx.report << "min |alpha ^ (d alpha)^n| over orthonormal frames: " << fmt17(rep.min_abs_top)
             << "\n";
  ctx.report << "witness:";
  for (Eigen::Index i = 0; i < rep.witness.size(); ++i) ctx.report << " " << fmt17(rep.witness[i]);
  ctx.report << "\nis_contact: " << (rep.is_contact ? "yes" : "no") << "\n";
  bool expect_contact = ctx.value_or("expect", "contact") == "contact";
  TaskResult out;
  out.pass = rep.is_contact == expect_contact;
  out.max_residual = rep.min_abs_top;
  return out;
}

inline TaskResult task_reeb(TaskContext& ctx) {
  const auto& entry = ctx.manifold();
  const auto& M = entry.manifold;
  Sampler rng(ctx.opts.seed);
  int shown = static_cast<int>(parse_integer(ctx.value_or("points", "5"), ctx.task.line));
  double worst = 0.0;
  ctx.report << "task: reeb\nmanifold: " << ctx.require("manifold") << "\n";
  for (int s = 0; s < ctx.opts.samples; ++s) {
    Vec p = M.manifold().sample(rng);
    Vec R = M.reeb_at(p);
    Vec ac = one_form_covector(M.alpha(), p);
    Mat T = M.manifold().tangent_basis(p);
    Mat Md = two_form_matrix(M.dalpha(), p);
    double r = std::max(std::abs(ac.dot(R) - 1.0), (T.transpose() * (Md * R)).norm());
    worst = std::max(worst, r);
    if (s < shown) {
      ctx.report << "point";
      for (Eigen::Index i = 0; i < p.size(); ++i) ctx.report << " " << fmt17(p[i]);
      ctx.report << "\nreeb ";
      for (Eigen::Index i = 0; i < R.size(); ++i) ctx.report << " " << fmt17(R[i]);
      ctx.report << "\n";
    }
  }
  ctx.report << "max residual of the Reeb axioms: " << fmt17(worst) << "\n";
  TaskResult out;
  out.max_residual = worst;
  out.pass = worst < ctx.tol_override.value_or(1e-8);
  return out;
}

inline TaskResult task_classify_field(TaskContext& ctx) {
  const auto& entry = ctx.manifold();
  VectorField X = resolve_field(ctx, entry, ctx.require("field"));
  auto cls = classify_vector_field(entry.manifold, X, ctx.opts);
  const char* kind = cls.kind == FieldClass::StrictContact ? "strict"
                     : cls.kind == FieldClass::Contact     ? "contact"
                                                           : "not-contact";
  ctx.report << "task: classify-field\nfield: " << ctx.require("field") << "\n";
  ctx.report << "class: " << kind << "\n";
  ctx.report << "max |L_X alpha|: " << fmt17(cls.max_strict_residual) << "\n";
  ctx.report << "max |(L_X alpha) ^ alpha|: " << fmt17(cls.max_proportionality_residual) << "\n";
  if (cls.kind == FieldClass::Contact) {
    double lo = cls.mu_samples[0];
    double hi = cls.mu_samples[0];
    for (double m : cls.mu_samples) {
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
    ctx.report << "mu range: [" << fmt17(lo) << ", " << fmt17(hi) << "]\n";
  }
  if (cls.kind == FieldClass::NotContact) {
    ctx.report << "witness:";
    for (Eigen::Index i = 0; i < cls.witness.size(); ++i) {
      ctx.report << " " << fmt17(cls.witness[i]);
    }
    ctx.report << "\n";
  }
  TaskResult out;
  out.max_residual = cls.max_strict_residual;
  std::string expect = ctx.value_or("expect", "");
  out.pass = expect.empty() ? true : expect == kind;
  return out;
}

inline TaskResult task_hamiltonian(TaskContext& ctx) {
  const auto& entry = ctx.manifold();
  const auto& M = entry.manifold;
  const ScalarField& H = ctx.scalar(ctx.require("h"));
  auto XH = hamiltonian_field(M, H);
  Sampler rng(ctx.opts.seed);
  double r_pairing = 0.0;
  double r_kernel = 0.0;
  for (int s = 0; s < ctx.opts.samples; ++s) {
    Vec p = M.manifold().sample(rng);
    Vec x = XH.at(p);
    Vec ac = one_form_covector(M.alpha(), p);
    r_pairing = std::max(r_pairing, std::abs(ac.dot(x) - H.value(p)));
    Mat T = M.manifold().tangent_basis(p);
    Mat Md = two_form_matrix(M.dalpha(), p);
    Vec gradH = H.gradient(p);
    double dHR = gradH.dot(M.reeb_at(p));
    for (int i = 0; i < T.cols(); ++i) {
      double lhs = x.dot(Md * T.col(i));
      double rhs = dHR * ac.dot(T.col(i)) - gradH.dot(T.col(i));
      r_kernel = std::max(r_kernel, std::abs(lhs - rhs));
    }
  }
  ctx.report << "task: hamiltonian\nh: " << ctx.require("h") << "\n";
  ctx.report << "max |alpha(X_H) - H|: " << fmt17(r_pairing) << "\n";
  ctx.report << "max |iota_{X_H} d alpha - (dH(R) alpha - dH)|: " << fmt17(r_kernel) << "\n";
  TaskResult out;
  out.max_residual = std::max(r_pairing, r_kernel);
  out.pass = r_pairing < 1e-9 && r_kernel < 1e-8;
  return out;
}

inline TaskResult task_bracket(TaskContext& ctx) {
  const auto& entry = ctx.manifold();
  const auto& M = entry.manifold;
  const ScalarField& f = ctx.scalar(ctx.require("f"));
  const ScalarField& g = ctx.scalar(ctx.require("g"));
  std::string mode_name = ctx.value_or("mode", "char2");
  BracketMode mode = mode_name == "lie"     ? BracketMode::Lie
                     : mode_name == "char1" ? BracketMode::Char1
                                            : BracketMode::Char2;
  ScalarField main = jacobi_bracket(M, f, g, mode);
  ScalarField c1 = jacobi_bracket(M, f, g, BracketMode::Char1);
  ScalarField c2 = jacobi_bracket(M, f, g, BracketMode::Char2);
  ScalarField lie = jacobi_bracket(M, f, g, BracketMode::Lie);
  Sampler rng(ctx.opts.seed);
  double agreement = 0.0;
  ctx.report << "task: bracket\nmode: " << mode_name << "\n";
  int shown = 0;
  for (int s = 0; s < ctx.opts.samples; ++s) {
    Vec p = M.manifold().sample(rng);
    double v2 = c2.value(p);
    agreement = std::max(agreement, std::abs(c1.value(p) - v2));
    agreement = std::max(agreement, std::abs(lie.value(p) - v2));
    if (shown < 5) {
      ctx.report << "[f,g] = " << fmt17(main.value(p)) << " at";
      for (Eigen::Index i = 0; i < p.size(); ++i) ctx.report << " " << fmt17(p[i]);
      ctx.report << "\n";
      ++shown;
    }
  }
  ctx.report << "max mode disagreement: " << fmt17(agreement) << "\n";
  TaskResult out;
  out.max_residual = agreement;
  out.pass = agreement < 1e-7;
  return out;
}

inline TaskResult task_bracket_laws(TaskContext& ctx) {
  const auto& entry = ctx.manifold();
  std::vector<ScalarField> funcs;
  for (auto& name : split(ctx.require("functions"), ',')) funcs.push_back(ctx.scalar(name));
  auto rep = check_bracket_laws(entry.manifold, funcs, 20, ctx.opts.seed);
  ctx.report << "task: bracket-laws\ntuples: " << rep.tuples << "\n";
  ctx.report << "bilinearity: " << fmt17(rep.bilinearity) << "\n";
  ctx.report << "antisymmetry: " << fmt17(rep.antisymmetry) << "\n";
  ctx.report << "jacobi identity: " << fmt17(rep.jacobi_identity) << "\n";
  ctx.report << "leibniz defect identity: " << fmt17(rep.leibniz_defect) << "\n";
  ctx.report << "product rule: " << fmt17(rep.product_rule) << "\n";
  ctx.report << "morphism: " << fmt17(rep.morphism) << "\n";
  ctx.report << "mode agreement: " << fmt17(rep.mode_agreement) << "\n";
  TaskResult out;
  out.max_residual = std::max({rep.bilinearity, rep.antisymmetry, rep.jacobi_identity,
                               rep.leibniz_defect, rep.product_rule, rep.morphism,
                               rep.mode_agreement});
  out.pass = rep.bilinearity < 1e-9 && rep.antisymmetry < 1e-9 && rep.jacobi_identity < 1e-6 &&
             rep.leibniz_defect < 1e-7 && rep.product_rule < 1e-7 && rep.morphism < 1e-7 &&
             rep.mode_agreement < 1e-7;
  return out;
}

inline TaskResult task_check_integrable(TaskContext& ctx) {
  const auto& entry = ctx.manifold();
  std::vector<ScalarField> integrals;
  for (auto& name : split(ctx.require("integrals"), ',')) integrals.push_back(ctx.scalar(name));
  std::string dyn = ctx.value_or("dynamics", "reeb");
  IntegrableSystemSpec spec{
      entry.manifold,
      dyn == "reeb" ? entry.manifold.reeb_field()
                    : hamiltonian_field(entry.manifold, integrals.at(0)).field,
      integrals,
      dyn == "reeb" ? IntegrableSystemSpec::Mode::Reeb
                    : IntegrableSystemSpec::Mode::HamiltonianOfF1};
  auto rep = check_integrable(spec, ctx.opts);
  ctx.report << "task: check-integrable\ndynamics: " << dyn << "\n";
  ctx.report << "max |X(f_i)|: " << fmt17(rep.x_invariance) << "\n";
  ctx.report << "max |[f_i, f_j]|: " << fmt17(rep.pairwise_bracket) << "\n";
  ctx.report << "max |[1, f_i]|: " << fmt17(rep.reeb_bracket) << "\n";
  ctx.report << "max |alpha(X) - target|: " << fmt17(rep.alpha_pairing) << "\n";
  ctx.report << "independence fraction: " << fmt17(rep.independence_fraction) << "\n";
  ctx.report << "independence failures: " << rep.failures.size() << "\n";
  for (const auto& f : rep.failures) {
    ctx.report << "  sigma ratio " << fmt17(f.sigma_ratio) << " locus residual "
               << fmt17(f.locus_residual) << "\n";
  }
  ctx.report << "pass: " << (rep.pass ? "yes" : "no") << "\n";
  bool expect_pass = ctx.value_or("expect", "pass") == "pass";
  TaskResult out;
  out.max_residual = std::max({rep.x_invariance, rep.pairwise_bracket, rep.reeb_bracket});
  out.pass = rep.pass == expect_pass;
  return out;
}

inline TaskResult task_flow(TaskContext& ctx, const std::filesystem::path& out_dir) {
  const auto& entry = ctx.manifold();
  const auto& M = entry.manifold;
  VectorField X = resolve_field(ctx, entry, ctx.value_or("field", "reeb"));
  std::vector<double> start;
  for (auto& x : split(ctx.require("start"), ',')) {
    start.push_back(parse_number(x, ctx.task.line));
  }
  if (static_cast<int>(start.size()) != M.manifold().ambient_dim()) {
    throw SceneError(ctx.task.line, 1, "start point has the wrong dimension");
  }
  Vec z0(static_cast<Eigen::Index>(start.size()));
  for (std::size_t i = 0; i < start.size(); ++i) z0[static_cast<Eigen::Index>(i)] = start[i];
  double t_end = parse_number(ctx.value_or("t_end", "1"), ctx.task.line);
  double h = parse_number(ctx.value_or("h", "0.001"), ctx.task.line);
  std::vector<std::pair<std::string, ScalarField>> conserved;
  if (const KeyValue* kv = find_key(ctx.task, "conserved")) {
    for (auto& name : split(kv->value, ',')) conserved.emplace_back(name, ctx.scalar(name));
  }
  auto trace = integrate(M.manifold(), X, z0, t_end, h, conserved);
  ctx.report << "task: flow\nfield: " << ctx.value_or("field", "reeb") << "\n";
  ctx.report << "t_end: " << fmt17(t_end) << " h: " << fmt17(h) << "\n";
  Vec end = trace.states.row(trace.states.rows() - 1).transpose();
  ctx.report << "endpoint:";
  for (Eigen::Index i = 0; i < end.size(); ++i) ctx.report << " " << fmt17(end[i]);
  ctx.report << "\n";
  double worst = 0.0;
  for (const auto& [name, drift] : conservation_report(trace)) {
    ctx.report << "drift " << name << ": " << fmt17(drift) << "\n";
    worst = std::max(worst, drift);
  }
  if (const KeyValue* kv = find_key(ctx.task, "csv")) {
    write_csv(trace, M.manifold().chart(), (out_dir / kv->value).string());
    ctx.report << "csv: " << kv->value << "\n";
  }
  TaskResult out;
  out.max_residual = worst;
  out.pass = worst < ctx.tol_override.value_or(1e-6);
  return out;
}

inline TaskResult task_cone_check(TaskContext& ctx) {
  const ConeSpec& C = ctx.cone(ctx.require("cone"));
  ctx.report << "task: cone-check\nnormals: " << C.normal_count() << "\n";
  auto redundant = C.redundant_normals();
  ctx.report << "redundant normals:";
  for (int r : redundant) ctx.report << " " << r;
  ctx.report << "\n";
  auto rep = is_good(C);
  ctx.report << "faces checked: " << rep.faces_checked << "\n";
  for (const auto& f : cone_faces(C)) {
    ctx.report << "face {";
    for (std::size_t i = 0; i < f.active_set.size(); ++i) {
      ctx.report << (i ? "," : "") << f.active_set[i];
    }
    ctx.report << "} dim " << f.dimension << " invariants (";
    for (std::size_t i = 0; i < f.invariant_factors.size(); ++i) {
      ctx.report << (i ? "," : "") << f.invariant_factors[i].str();
    }
    ctx.report << ") zbasis " << (f.zbasis_flag ? "yes" : "no") << "\n";
  }
  ctx.report << "good: " << (rep.good ? "yes" : "no") << "\n";
  if (rep.witness) {
    ctx.report << "witness face {";
    for (std::size_t i = 0; i < rep.witness->active_set.size(); ++i) {
      ctx.report << (i ? "," : "") << rep.witness->active_set[i];
    }
    ctx.report << "}\n";
  }
  bool expect_good = ctx.value_or("expect", "good") == "good";
  TaskResult out;
  out.pass = rep.good == expect_good;
  out.max_residual = 0.0;
  return out;
}

inline TaskResult task_lens(TaskContext& ctx) {
  long long p = parse_integer(ctx.require("p"), ctx.task.line);
  long long q = parse_integer(ctx.require("q"), ctx.task.line);
  TaskResult out;
  try {
    auto lens = lens_space_info(p, q);
    ctx.report << "task: lens\nL(" << p << ", " << q << ")\n";
    ctx.report << "normalized: L(" << lens.p_normalized << ", " << lens.q_normalized << ")\n";
    ctx.report << "alias: " << (lens.alias.empty() ? "(none)" : lens.alias) << "\n";
    std::string expect = ctx.value_or("expect", "");
    out.pass = expect.empty() ? true : lens.alias == expect;
  } catch (const NotCoprime& err) {
    ctx.report << "task: lens\nerror: " << err.what() << "\n";
    out.pass = ctx.value_or("expect", "") == "not-coprime";
  }
  return out;
}

inline TaskResult task_moment_map(TaskContext& ctx) {
  const auto& entry = ctx.manifold();
  auto action = sphere_action(entry);
  auto validation = validate_action(action, CheckOptions{.samples = 25, .seed = ctx.opts.seed});
  ctx.report << "task: moment-map\n";
  ctx.report << "generator commutation: " << fmt17(validation.commutation) << "\n";
  ctx.report << "alpha invariance: " << fmt17(validation.invariance) << "\n";

  double closed_form_residual = 0.0;
  {
    Sampler rng(ctx.opts.seed);
    for (int s = 0; s < ctx.opts.samples; ++s) {
      Vec p = entry.manifold.manifold().sample(rng);
      Vec psi = alpha_moment_map(action, p);
      for (std::size_t j = 0; j < entry.weights.size(); ++j) {
        double zj2 = p[static_cast<Eigen::Index>(2 * j)] * p[static_cast<Eigen::Index>(2 * j)] +
                     p[static_cast<Eigen::Index>(2 * j + 1)] * p[static_cast<Eigen::Index>(2 * j + 1)];
        closed_form_residual =
            std::max(closed_form_residual,
                     std::abs(psi[static_cast<Eigen::Index>(j)] - entry.weights[j] * zj2 / 4.0));
      }
    }
  }
  ctx.report << "closed-form residual (a_j |z_j|^2 / 4): " << fmt17(closed_form_residual) << "\n";

  double norm_residual = 0.0;
  auto normalized = normalize_contact_form(action, ctx.opts);
  {
    Sampler rng(ctx.opts.seed + 1);
    for (int s = 0; s < ctx.opts.samples; ++s) {
      Vec p = normalized.base.manifold().sample(rng);
      norm_residual = std::max(norm_residual,
                               std::abs(alpha_moment_map(normalized, p).norm() - 1.0));
    }
  }
  ctx.report << "post-normalization norm residual: " << fmt17(norm_residual) << "\n";

  bool cone_ok = true;
  if (const KeyValue* kv = find_key(ctx.task, "cone")) {
    const ConeSpec& claimed = ctx.cone(kv->value);
    auto points = sphere_moment_points(entry, ctx.opts.samples, ctx.opts.seed + 2);
    auto rep = moment_cone_sample(action, claimed, points);
    ctx.report << "cone containment: " << (rep.all_contained ? "yes" : "no") << "\n";
    ctx.report << "facet coverage: " << (rep.facets_covered ? "yes" : "no") << "\n";
    for (std::size_t i = 0; i < rep.facet_angles.size(); ++i) {
      ctx.report << "facet " << i << " best angle: " << fmt17(rep.facet_angles[i]) << "\n";
    }
    cone_ok = rep.all_contained && rep.facets_covered;
  }

  TaskResult out;
  out.max_residual = std::max({closed_form_residual, norm_residual, validation.invariance});
  out.pass = validation.ok && closed_form_residual < 1e-9 && norm_residual < 1e-9 && cone_ok;
  return out;
}

inline TaskResult task_lerman(TaskContext& ctx) {
  const ConeSpec& C = ctx.cone(ctx.require("cone"));
  int extra = static_cast<int>(parse_integer(ctx.value_or("samples", "10"), ctx.task.line));
  auto rep = lerman_pipeline(C, extra, ctx.opts.seed);
  ctx.report << "task: lerman\n";
  ctx.report << "tau: " << rep.tau.rows << " x " << rep.tau.cols << ", rank " << rep.rank << "\n";
  ctx.report << "kernel basis columns: " << rep.kernel.cols << "\n";
  for (int c = 0; c < rep.kernel.cols; ++c) {
    ctx.report << "  kernel[" << c << "]:";
    for (int r = 0; r < rep.kernel.rows; ++r) ctx.report << " " << rep.kernel.at(r, c).str();
    ctx.report << "\n";
  }
  ctx.report << "dim N: " << rep.dim_n << "\n";
  ctx.report << "invariant factors of tau:";
  for (const auto& s : rep.discrete_invariants) ctx.report << " " << s.str();
  ctx.report << "\n";
  ctx.report << "sigma exact: " << (rep.sigma_exactness ? "yes" : "no") << "\n";
  ctx.report << "right-inverse agreement: " << (rep.right_inverse_agreement ? "yes" : "no")
             << "\n";
  ctx.report << "samples: " << rep.samples.size() << "\n";
  double worst_float = 0.0;
  for (const auto& s : rep.samples) {
    worst_float = std::max(worst_float, s.float_error);
    ctx.report << "  support {";
    for (std::size_t i = 0; i < s.support_zeros.size(); ++i) {
      ctx.report << (i ? "," : "") << s.support_zeros[i];
    }
    ctx.report << "} freeness " << (s.freeness_ok ? "yes" : "no") << " image "
               << (s.image_ok ? "yes" : "no") << " float_err " << fmt17(s.float_error) << "\n";
  }
  ctx.report << "all samples ok: " << (rep.all_samples_ok ? "yes" : "no") << "\n";
  TaskResult out;
  out.max_residual = worst_float;
  out.pass = rep.all_samples_ok && rep.sigma_exactness && rep.right_inverse_agreement;
  return out;
}

inline TaskResult task_plane_grid(TaskContext& ctx, const std::filesystem::path& out_dir) {
  const auto& entry = ctx.manifold();
  const auto& M = entry.manifold;
  if (M.manifold().ambient_dim() != 3 || M.manifold().is_embedded()) {
    throw SceneError(ctx.task.line, 1, "plane-grid needs an intrinsic 3-dimensional chart");
  }
  double lo = -2.0;
  double hi = 2.0;
  if (const KeyValue* kv = find_key(ctx.task, "range")) {
    auto lohi = split(kv->value, ':');
    if (lohi.size() != 2) throw SceneError(kv->line, 1, "range looks like lo:hi");
    lo = parse_number(lohi[0], kv->line);
    hi = parse_number(lohi[1], kv->line);
  }
  int res = static_cast<int>(parse_integer(ctx.value_or("resolution", "9"), ctx.task.line));
  if (res < 1) throw SceneError(ctx.task.line, 1, "resolution must be >= 1");

  std::string csv_name = ctx.value_or("csv", "plane_grid.csv");
  std::ofstream csv(out_dir / csv_name);
  csv << "x,y,z,u1x,u1y,u1z,u2x,u2y,u2z\n";
  int degenerate = 0;
  int rows = 0;
  auto grid_value = [&](int i) {
    return res == 1 ? (lo + hi) / 2.0 : lo + (hi - lo) * i / (res - 1);
  };
  for (int ix = 0; ix < res; ++ix) {
    for (int iy = 0; iy < res; ++iy) {
      for (int iz = 0; iz < res; ++iz) {
        Vec p(3);
        p << grid_value(ix), grid_value(iy), grid_value(iz);
        Vec ac = one_form_covector(M.alpha(), p);
        csv << fmt17(p[0]) << "," << fmt17(p[1]) << "," << fmt17(p[2]);
        if (ac.lpNorm<Eigen::Infinity>() < 1e-12) {
          ++degenerate;
          for (int k = 0; k < 6; ++k) csv << ",nan";
          csv << "\n";
          ++rows;
          continue;
        }
        int pivot = 0;
        for (int i = 1; i < 3; ++i) {
          if (std::abs(ac[i]) > std::abs(ac[pivot])) pivot = i;
        }
        for (int j = 0; j < 3; ++j) {
          if (j == pivot) continue;
          Vec v = Vec::Zero(3);
          v[j] = 1.0;
          v[pivot] = -ac[j] / ac[pivot];
          v /= v.norm();
          for (int k = 0; k < 3; ++k) csv << "," << fmt17(v[k]);
        }
        csv << "\n";
        ++rows;
      }
    }
  }
  ctx.report << "task: plane-grid\nrows: " << rows << "\ncsv: " << csv_name << "\n";
  if (degenerate > 0) {
    ctx.report << "warning: " << degenerate << " degenerate points marked with nan\n";
  }
  TaskResult out;
  out.max_residual = 0.0;
  out.pass = true;
  return out;
}

}  // namespace detail

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::optional<double> tol;
};

/// Execute every task of a parsed scene; returns per-task results.  Reports
/// land in out_dir as <label>.txt plus a run-level summary.txt.
inline std::vector<TaskResult> run_scene(const SceneModel& model,
                                         const std::filesystem::path& out_dir,
                                         const RunOverrides& overrides = {}) {
  std::filesystem::create_directories(out_dir);
  std::vector<TaskResult> results;
  int index = 0;
  for (const auto& task : model.tasks) {
    detail::TaskContext ctx{model, task, CheckOptions{}, std::nullopt, {}};
    ctx.opts.samples = overrides.samples.value_or(model.samples);
    ctx.opts.seed = overrides.seed.value_or(model.seed);
    if (const auto* kv = detail::find_key(task, "seed")) {
      ctx.opts.seed = static_cast<std::uint64_t>(detail::parse_integer(kv->value, kv->line));
    }
    if (overrides.tol) {
      ctx.tol_override = *overrides.tol;
    } else if (model.tol) {
      ctx.tol_override = *model.tol;
    }
    std::string label = task.label.empty()
                            ? "task" + std::to_string(index) + "_" + task.name
                            : task.label;

    TaskResult result;
    try {
      if (task.name == "verify-contact") result = detail::task_verify_contact(ctx);
      else if (task.name == "reeb") result = detail::task_reeb(ctx);
      else if (task.name == "classify-field") result = detail::task_classify_field(ctx);
      else if (task.name == "hamiltonian") result = detail::task_hamiltonian(ctx);
      else if (task.name == "bracket") result = detail::task_bracket(ctx);
      else if (task.name == "bracket-laws") result = detail::task_bracket_laws(ctx);
      else if (task.name == "check-integrable") result = detail::task_check_integrable(ctx);
      else if (task.name == "flow") result = detail::task_flow(ctx, out_dir);
      else if (task.name == "cone-check") result = detail::task_cone_check(ctx);
      else if (task.name == "lens") result = detail::task_lens(ctx);
      else if (task.name == "moment-map") result = detail::task_moment_map(ctx);
      else if (task.name == "lerman") result = detail::task_lerman(ctx);
      else if (task.name == "plane-grid") result = detail::task_plane_grid(ctx, out_dir);
      else throw SceneError(task.line, 1, "unknown task kind '" + task.name + "'");
    } catch (const SceneError&) {
      throw;  // scene structure problems abort the run
    } catch (const Error& err) {
      ctx.report << "error: " << err.what() << "\n";
      result.pass = false;
      result.max_residual = std::numeric_limits<double>::infinity();
    }
    result.label = label;

    std::string summary = "TASK " + label + (result.pass ? " PASS" : " FAIL") +
                          " max_residual=" + fmt17(result.max_residual);
    std::filesystem::path report_path = out_dir / (label + ".txt");
    std::ofstream file(report_path);
    file << ctx.report.str() << summary << "\n";
    result.report_path = report_path.string();
    results.push_back(result);
    ++index;
  }
  std::ofstream summary_file(out_dir / "summary.txt");
  for (const auto& r : results) {
    summary_file << "TASK " << r.label << (r.pass ? " PASS" : " FAIL")
                 << " max_residual=" << fmt17(r.max_residual) << "\n";
  }
  return results;
}

/// Parse a scene file and run it; exit-code semantics of the CLI contract
/// (0 all pass, 1 some check failed, 2 parse error reported on stderr).
inline int run(const std::string& scene_path, const std::string& out_dir,
               const RunOverrides& overrides = {}, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  std::ifstream in(scene_path);
  if (!in) {
    err << "cannot open scene file '" << scene_path << "'\n";
    return 2;
  }
  SceneModel model;
  try {
    model = build_scene(parse_scene(in));
  } catch (const SceneError& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "scene error: " << e.what() << "\n";
    return 2;
  }
  std::vector<TaskResult> results;
  try {
    results = run_scene(model, out_dir, overrides);
  } catch (const SceneError& e) {
    err << e.what() << "\n";
    return 2;
  }
  bool all_pass = true;
  for (const auto& r : results) {
    out << "TASK " << r.label << (r.pass ? " PASS" : " FAIL")
        << " max_residual=" << fmt17(r.max_residual) << "\n";
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 1;
}

}  // namespace contactlab::scene

#endif
