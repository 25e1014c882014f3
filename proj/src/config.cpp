#include "odeng/config.hpp"

#include "odeng/error.hpp"
#include "odeng/model.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace odeng {

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void check_keys(const Json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ValidationError("must be an object", path);
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || item.key() == a;
    if (!known) throw ValidationError("unknown key", join(path, item.key()));
  }
}

const Json* find(const Json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const Json& require(const Json& obj, const char* key, const std::string& path) {
  const Json* v = find(obj, key);
  if (!v) throw ValidationError("missing required entry", join(path, key));
  return *v;
}

double real(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError("must be a number", path);
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError("must be finite", path);
  return v;
}

long long integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ValidationError("must be an integer", path);
  return j.get<long long>();
}

std::string text(const Json& j, const std::string& path) {
  if (!j.is_string()) throw ValidationError("must be a string", path);
  return j.get<std::string>();
}

bool boolean(const Json& j, const std::string& path) {
  if (!j.is_boolean()) throw ValidationError("must be true or false", path);
  return j.get<bool>();
}

Vector real_vector(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError("must be an array of numbers", path);
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = real(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

Matrix square_matrix(const Json& j, std::size_t p, const std::string& path) {
  if (!j.is_array()) throw ValidationError("must be an array", path);
  const auto n = static_cast<Eigen::Index>(p);
  Matrix m(n, n);
  if (!j.empty() && j[0].is_array()) {
    if (j.size() != p) throw ValidationError("must have " + std::to_string(p) + " rows", path);
    for (std::size_t r = 0; r < p; ++r) {
      const Vector row = real_vector(j[r], path + "[" + std::to_string(r) + "]");
      if (row.size() != n) {
        throw ValidationError("row must have " + std::to_string(p) + " entries",
                              path + "[" + std::to_string(r) + "]");
      }
      m.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return m;
  }
  const Vector flat = real_vector(j, path);
  if (flat.size() != n * n) {
    throw ValidationError("must hold " + std::to_string(p * p) + " entries (row-major)", path);
  }
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = flat(r * n + c);
  }
  return m;
}

SimplexConfig parse_simplex(const Json& j, SimplexConfig base, const std::string& path) {
  check_keys(j, path,
             {"reflection", "expansion", "contraction", "shrink", "max_iter", "f_tol", "x_tol",
              "initial_step", "max_restarts", "adaptive"});
  if (auto v = find(j, "reflection")) base.reflection = real(*v, join(path, "reflection"));
  if (auto v = find(j, "expansion")) base.expansion = real(*v, join(path, "expansion"));
  if (auto v = find(j, "contraction")) base.contraction = real(*v, join(path, "contraction"));
  if (auto v = find(j, "shrink")) base.shrink = real(*v, join(path, "shrink"));
  if (auto v = find(j, "max_iter")) {
    base.max_iter = static_cast<int>(integer(*v, join(path, "max_iter")));
  }
  if (auto v = find(j, "f_tol")) base.f_tol = real(*v, join(path, "f_tol"));
  if (auto v = find(j, "x_tol")) base.x_tol = real(*v, join(path, "x_tol"));
  if (auto v = find(j, "initial_step")) base.initial_step = real(*v, join(path, "initial_step"));
  if (auto v = find(j, "max_restarts")) {
    base.max_restarts = static_cast<int>(integer(*v, join(path, "max_restarts")));
  }
  if (auto v = find(j, "adaptive")) base.adaptive = boolean(*v, join(path, "adaptive"));
  try {
    base.validate();
  } catch (const ValidationError& e) {
    const std::string key = e.key().substr(e.key().find('.') + 1);
    throw ValidationError(std::string(e.what()).substr(e.key().size() + 2), join(path, key));
  }
  return base;
}

Json simplex_json(const SimplexConfig& c) {
  return Json{{"reflection", c.reflection}, {"expansion", c.expansion},
              {"contraction", c.contraction}, {"shrink", c.shrink},
              {"max_iter", c.max_iter},     {"f_tol", c.f_tol},
              {"x_tol", c.x_tol},           {"initial_step", c.initial_step},
              {"max_restarts", c.max_restarts}, {"adaptive", c.adaptive}};
}

// Rebases an error thrown by a component validator onto the config path.
template <class F>
void with_key(const std::string& key, F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    if (!e.key().empty()) throw;
    throw ValidationError(e.what(), key);
  }
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

ProblemConfig parse_config(const Json& doc) {
  check_keys(doc, "",
             {"model", "domain", "noise", "correlation", "population", "criterion", "density",
              "design", "refine", "optimizer"});
  ProblemConfig c;

  const Json& model = require(doc, "model", "");
  check_keys(model, "model", {"name", "expression", "p", "degree", "beta0"});
  const Json* name = find(model, "name");
  const Json* expr = find(model, "expression");
  if ((name != nullptr) == (expr != nullptr)) {
    throw ValidationError("exactly one of name or expression is required", "model");
  }
  c.model.beta0 = real_vector(require(model, "beta0", "model"), "model.beta0");
  if (auto d = find(model, "degree")) {
    c.model.degree = static_cast<int>(integer(*d, "model.degree"));
  }
  if (name) {
    c.model.name = text(*name, "model.name");
    c.model.p = builtin_model(c.model.name, c.model.degree).p;
    if (auto p = find(model, "p")) {
      if (integer(*p, "model.p") != static_cast<long long>(c.model.p)) {
        throw ValidationError("does not match the builtin model", "model.p");
      }
    }
  } else {
    c.model.expression = text(*expr, "model.expression");
    const long long p = integer(require(model, "p", "model"), "model.p");
    if (p < 1) throw ValidationError("must be >= 1", "model.p");
    c.model.p = static_cast<std::size_t>(p);
  }
  if (static_cast<std::size_t>(c.model.beta0.size()) != c.model.p) {
    throw ValidationError("length must equal p = " + std::to_string(c.model.p), "model.beta0");
  }

  const Vector dom = real_vector(require(doc, "domain", ""), "domain");
  if (dom.size() != 2) throw ValidationError("must be [t_lo, t_hi]", "domain");
  c.domain = {dom(0), dom(1)};
  c.domain.validate();

  const Json& noise = require(doc, "noise", "");
  check_keys(noise, "noise", {"sigma2", "h"});
  c.sigma2 = real(require(noise, "sigma2", "noise"), "noise.sigma2");
  if (c.sigma2 < 0.0) throw ValidationError("must be >= 0", "noise.sigma2");
  if (auto h = find(noise, "h")) c.h = text(*h, "noise.h");

  const Json& corr = require(doc, "correlation", "");
  check_keys(corr, "correlation", {"kernel", "lambda", "gamma", "scale", "table"});
  if (auto k = find(corr, "kernel")) c.correlation.kernel = parse_kernel(text(*k, "correlation.kernel"));
  c.correlation.gamma = real(require(corr, "gamma", "correlation"), "correlation.gamma");
  if (c.correlation.kernel != Kernel::table) {
    c.correlation.lambda = real(require(corr, "lambda", "correlation"), "correlation.lambda");
  } else if (auto l = find(corr, "lambda")) {
    c.correlation.lambda = real(*l, "correlation.lambda");
  }
  if (auto s = find(corr, "scale")) c.correlation.scale = real(*s, "correlation.scale");
  if (auto t = find(corr, "table")) {
    if (!t->is_array()) throw ValidationError("must be an array of [t, rho] pairs", "correlation.table");
    for (std::size_t i = 0; i < t->size(); ++i) {
      const Vector knot = real_vector((*t)[i], "correlation.table[" + std::to_string(i) + "]");
      if (knot.size() != 2) {
        throw ValidationError("must be [t, rho]", "correlation.table[" + std::to_string(i) + "]");
      }
      c.correlation.table.emplace_back(knot(0), knot(1));
    }
  }
  c.correlation.validate();

  const Json& pop = require(doc, "population", "");
  check_keys(pop, "population", {"Vp"});
  c.vp = square_matrix(require(pop, "Vp", "population"), c.model.p, "population.Vp");

  const Json& crit = require(doc, "criterion", "");
  check_keys(crit, "criterion", {"type", "c"});
  c.criterion = parse_criterion(text(require(crit, "type", "criterion"), "criterion.type"));
  if (auto v = find(crit, "c")) c.c = real_vector(*v, "criterion.c");
  if (c.criterion == CriterionType::c) {
    if (!c.c) throw ValidationError("required for criterion type c", "criterion.c");
    if (static_cast<std::size_t>(c.c->size()) != c.model.p) {
      throw ValidationError("length must equal p = " + std::to_string(c.model.p), "criterion.c");
    }
    if (c.c->isZero(0.0)) throw ValidationError("must be nonzero", "criterion.c");
  }

  if (auto d = find(doc, "density")) {
    check_keys(*d, "density", {"degree", "restarts", "quad_nodes", "seed"});
    if (auto v = find(*d, "degree")) c.degree = static_cast<int>(integer(*v, "density.degree"));
    if (auto v = find(*d, "restarts")) c.restarts = static_cast<int>(integer(*v, "density.restarts"));
    if (auto v = find(*d, "quad_nodes")) {
      c.quad_nodes = static_cast<int>(integer(*v, "density.quad_nodes"));
    }
    if (auto v = find(*d, "seed")) {
      const long long s = integer(*v, "density.seed");
      if (s < 0) throw ValidationError("must be >= 0", "density.seed");
      c.seed = static_cast<std::uint64_t>(s);
    }
  }
  if (c.degree < 0) throw ValidationError("must be >= 0", "density.degree");
  if (c.restarts < 1) throw ValidationError("must be >= 1", "density.restarts");
  QuadratureSpec{c.quad_nodes}.validate();

  if (auto d = find(doc, "design")) {
    check_keys(*d, "design", {"n", "rule"});
    const long long n = integer(require(*d, "n", "design"), "design.n");
    if (n < 1) throw ValidationError("must be >= 1", "design.n");
    c.n = static_cast<std::size_t>(n);
    if (auto r = find(*d, "rule")) c.rule = parse_rule(text(*r, "design.rule"));
    rule_levels(c.n, c.rule);
    if (c.n < c.model.p) {
      throw ValidationError("must be >= p = " + std::to_string(c.model.p), "design.n");
    }
  }

  if (auto r = find(doc, "refine")) {
    check_keys(*r, "refine", {"enabled", "estimator"});
    if (auto v = find(*r, "enabled")) c.refine = boolean(*v, "refine.enabled");
    if (auto v = find(*r, "estimator")) c.estimator = parse_estimator(text(*v, "refine.estimator"));
  }

  c.density_simplex = default_density_simplex();
  c.refine_simplex = default_refine_simplex();
  if (auto o = find(doc, "optimizer")) {
    check_keys(*o, "optimizer", {"density", "refine"});
    if (auto v = find(*o, "density")) {
      c.density_simplex = parse_simplex(*v, c.density_simplex, "optimizer.density");
    }
    if (auto v = find(*o, "refine")) {
      c.refine_simplex = parse_simplex(*v, c.refine_simplex, "optimizer.refine");
    }
  }

  build_problem(c);
  return c;
}

ProblemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path.string() + "'", "config");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("invalid JSON: ") + e.what(), "config");
  }
  return parse_config(doc);
}

Json to_json(const ProblemConfig& c) {
  Json model;
  if (!c.model.name.empty()) {
    model["name"] = c.model.name;
  } else {
    model["expression"] = c.model.expression;
    model["p"] = c.model.p;
  }
  if (c.model.degree) model["degree"] = *c.model.degree;
  model["beta0"] = vector_to_json(c.model.beta0);

  Json corr{{"kernel", std::string(kernel_name(c.correlation.kernel))},
            {"gamma", c.correlation.gamma},
            {"lambda", c.correlation.lambda}};
  if (c.correlation.scale) corr["scale"] = *c.correlation.scale;
  if (!c.correlation.table.empty()) {
    Json table = Json::array();
    for (const auto& [t, r] : c.correlation.table) table.push_back({t, r});
    corr["table"] = table;
  }

  Json crit{{"type", std::string(criterion_name(c.criterion))}};
  if (c.c) crit["c"] = vector_to_json(*c.c);

  Json doc{{"model", model},
           {"domain", {c.domain.lo, c.domain.hi}},
           {"noise", {{"sigma2", c.sigma2}, {"h", c.h}}},
           {"correlation", corr},
           {"population", {{"Vp", matrix_to_json(c.vp)}}},
           {"criterion", crit},
           {"density",
            {{"degree", c.degree},
             {"restarts", c.restarts},
             {"quad_nodes", c.quad_nodes},
             {"seed", c.seed}}},
           {"refine",
            {{"enabled", c.refine}, {"estimator", std::string(estimator_name(c.estimator))}}},
           {"optimizer",
            {{"density", simplex_json(c.density_simplex)},
             {"refine", simplex_json(c.refine_simplex)}}}};
  if (c.n > 0) doc["design"] = {{"n", c.n}, {"rule", std::string(rule_name(c.rule))}};
  return doc;
}

PopulationProblem build_problem(const ProblemConfig& c) {
  PopulationProblem problem;
  with_key("model", [&] {
    if (!c.model.name.empty()) {
      problem.model = builtin_model(c.model.name, c.model.degree);
    } else {
      problem.model = parse_model_expression(c.model.expression, c.model.p,
                                             0.5 * (c.domain.lo + c.domain.hi), c.model.beta0);
    }
  });
  with_key("model.beta0", [&] {
    if (problem.model.check_params) problem.model.check_params(c.model.beta0);
  });
  with_key("noise.h", [&] { problem.noise = make_noise(c.sigma2, c.h); });
  with_key("noise.h", [&] {
    for (double t : {c.domain.lo, 0.5 * (c.domain.lo + c.domain.hi), c.domain.hi}) {
      const double h = problem.noise.h(t);
      if (!(h > 0.0) || !std::isfinite(h)) {
        std::ostringstream msg;
        msg << "h(" << t << ") = " << h << " must be positive";
        throw ValidationError(msg.str(), "noise.h");
      }
    }
  });
  problem.corr = c.correlation;
  problem.domain = c.domain;
  problem.crit = {c.criterion, c.c};
  problem.pop = PopulationSpec{c.model.beta0, c.vp}.validated();
  with_key("criterion.type", [&] { problem.validate(); });
  return problem;
}

std::vector<double> load_design_points(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open design file '" + path.string() + "'", "design");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("invalid JSON: ") + e.what(), "design");
  }
  const Json& arr = doc.is_object() ? require(doc, "points", "design") : doc;
  const Vector v = real_vector(arr, "design");
  return {v.data(), v.data() + v.size()};
}

}  // namespace odeng
