#include "deepkrein/experiment.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "deepkrein/errors.hpp"
#include "deepkrein/io.hpp"
#include "deepkrein/ksvm.hpp"
#include "deepkrein/pushforward.hpp"

namespace deepkrein {

namespace {

using RawJson = nlohmann::json;

Json num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

Json num_array(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

Json num_array(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

class Schema {
 public:
  explicit Schema(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const {
    throw ValidationError(source_ + ": " + (ptr.empty() ? "/" : ptr) + ": " + msg);
  }

  void keys(const RawJson& obj, const std::string& ptr, std::initializer_list<const char*> allowed) const {
    if (!obj.is_object()) fail(ptr, "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj.items()) {
      if (!ok.count(k)) fail(ptr + "/" + k, "unknown key");
    }
  }

  double real(const RawJson& j, const std::string& ptr) const {
    if (!j.is_number()) fail(ptr, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(ptr, "expected a finite number");
    return v;
  }

  int integer(const RawJson& j, const std::string& ptr, int min) const {
    if (!j.is_number_integer()) fail(ptr, "expected an integer");
    const auto v = j.get<long long>();
    if (v < min || v > 1'000'000'000) fail(ptr, "expected an integer >= " + std::to_string(min));
    return static_cast<int>(v);
  }

  std::string string(const RawJson& j, const std::string& ptr) const {
    if (!j.is_string()) fail(ptr, "expected a string");
    return j.get<std::string>();
  }

 private:
  std::string source_;
};

ActivationSpec parse_activation(const Schema& s, const RawJson& j, const std::string& ptr) {
  try {
    if (j.is_string()) return ActivationSpec::from_name(j.get<std::string>());
    s.keys(j, ptr, {"kind", "coefficients", "c", "max_terms"});
    if (!j.contains("kind")) s.fail(ptr + "/kind", "missing activation kind");
    const auto kind = s.string(j["kind"], ptr + "/kind");
    std::vector<double> coeffs;
    if (j.contains("coefficients")) {
      if (!j["coefficients"].is_array()) s.fail(ptr + "/coefficients", "expected an array");
      for (std::size_t i = 0; i < j["coefficients"].size(); ++i) {
        coeffs.push_back(s.real(j["coefficients"][i], ptr + "/coefficients/" + std::to_string(i)));
      }
    }
    const double c = j.contains("c") ? s.real(j["c"], ptr + "/c") : ActivationSpec::kDefaultReluSharpness;
    auto spec = ActivationSpec::from_name(kind, coeffs, c);
    if (j.contains("max_terms")) spec = spec.with_max_terms(s.integer(j["max_terms"], ptr + "/max_terms", 1));
    return spec;
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    if (what.find(": /") != std::string::npos) throw;
    s.fail(ptr, what);
  }
}

Json activation_echo(const ActivationSpec& a) {
  Json j;
  j["kind"] = a.name();
  if (a.kind() == ActivationKind::Polynomial) j["coefficients"] = num_array(a.polynomial_coefficients());
  if (a.kind() == ActivationKind::ReluSurrogate) j["c"] = a.sharpness();
  j["max_terms"] = a.max_terms();
  return j;
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                              const std::string& source) {
  RawJson j;
  try {
    j = RawJson::parse(text);
  } catch (const RawJson::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    throw ValidationError(source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": syntax error in config");
  }
  const Schema s(source);
  s.keys(j, "", {"architecture", "dataset", "loss", "lambda", "truncation", "seed", "training", "ksvm", "kernel",
                 "weights", "bounds", "sparsity", "report"});
  ExperimentConfig c;
  c.base_dir = base_dir;

  if (!j.contains("architecture")) s.fail("/architecture", "missing architecture section");
  const auto& a = j["architecture"];
  s.keys(a, "/architecture", {"input_dim", "widths", "activations", "reg_scale"});
  if (!a.contains("input_dim")) s.fail("/architecture/input_dim", "missing input dimension");
  const int dim = s.integer(a["input_dim"], "/architecture/input_dim", 1);
  if (!a.contains("widths") || !a["widths"].is_array() || a["widths"].empty()) {
    s.fail("/architecture/widths", "expected a nonempty array of widths");
  }
  std::vector<int> widths;
  for (std::size_t q = 0; q < a["widths"].size(); ++q) {
    widths.push_back(s.integer(a["widths"][q], "/architecture/widths/" + std::to_string(q), 1));
  }
  if (widths.back() != 1) {
    s.fail("/architecture/widths/" + std::to_string(widths.size() - 1), "the last width must be 1");
  }
  if (!a.contains("activations") || !a["activations"].is_array()) {
    s.fail("/architecture/activations", "expected an array of activations");
  }
  std::vector<ActivationSpec> acts;
  const auto& aj = a["activations"];
  if (aj.size() == 1 && widths.size() > 1) {
    for (std::size_t q = 0; q < widths.size(); ++q) acts.push_back(parse_activation(s, aj[0], "/architecture/activations/0"));
  } else {
    if (aj.size() != widths.size()) s.fail("/architecture/activations", "expected one activation per layer (or one for all)");
    for (std::size_t q = 0; q < aj.size(); ++q) {
      acts.push_back(parse_activation(s, aj[q], "/architecture/activations/" + std::to_string(q)));
    }
  }
  c.arch = Architecture(dim, widths, acts);
  if (a.contains("reg_scale") && !a["reg_scale"].is_null()) {
    c.reg_scale = s.real(a["reg_scale"], "/architecture/reg_scale");
    if (*c.reg_scale < 0.0) s.fail("/architecture/reg_scale", "must be nonnegative");
  }

  if (j.contains("dataset") && !j["dataset"].is_null()) c.dataset = s.string(j["dataset"], "/dataset");
  if (j.contains("loss")) {
    try {
      c.loss = loss_from_name(s.string(j["loss"], "/loss"));
    } catch (const ValidationError& e) {
      if (std::string(e.what()).find(": /") != std::string::npos) throw;
      s.fail("/loss", e.what());
    }
  }
  if (j.contains("lambda")) {
    c.lambda = s.real(j["lambda"], "/lambda");
    if (c.lambda < 0.0) s.fail("/lambda", "must be nonnegative");
  }
  if (j.contains("truncation")) c.truncation = s.integer(j["truncation"], "/truncation", 1);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) s.fail("/seed", "expected a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("training")) {
    const auto& t = j["training"];
    s.keys(t, "/training", {"steps", "step_size"});
    if (t.contains("steps")) c.train_steps = s.integer(t["steps"], "/training/steps", 1);
    if (t.contains("step_size")) {
      c.train_step_size = s.real(t["step_size"], "/training/step_size");
      if (c.train_step_size <= 0.0) s.fail("/training/step_size", "must be positive");
    }
  }
  if (j.contains("ksvm")) {
    const auto& k = j["ksvm"];
    s.keys(k, "/ksvm", {"solver", "steps", "step_size", "init_scale"});
    if (k.contains("solver")) {
      c.ksvm_solver = s.string(k["solver"], "/ksvm/solver");
      if (c.ksvm_solver != "eigen" && c.ksvm_solver != "gd") s.fail("/ksvm/solver", "expected eigen or gd");
    }
    if (k.contains("steps")) c.ksvm_steps = s.integer(k["steps"], "/ksvm/steps", 1);
    if (k.contains("step_size")) {
      c.ksvm_step_size = s.real(k["step_size"], "/ksvm/step_size");
      if (c.ksvm_step_size <= 0.0) s.fail("/ksvm/step_size", "must be positive");
    }
    if (k.contains("init_scale")) {
      c.ksvm_init_scale = s.real(k["init_scale"], "/ksvm/init_scale");
      if (c.ksvm_init_scale < 0.0) s.fail("/ksvm/init_scale", "must be nonnegative");
    }
  }
  if (j.contains("kernel")) {
    const auto& k = j["kernel"];
    s.keys(k, "/kernel", {"variant"});
    if (k.contains("variant")) {
      const auto v = s.string(k["variant"], "/kernel/variant");
      if (v != "krein" && v != "associated") s.fail("/kernel/variant", "expected krein or associated");
      c.kernel_variant = kernel_variant_from_name(v);
    }
  }
  if (j.contains("weights") && !j["weights"].is_null()) c.weights = s.string(j["weights"], "/weights");
  if (j.contains("bounds")) {
    const auto& b = j["bounds"];
    s.keys(b, "/bounds", {"R_NN", "trials", "hypothesis_draws", "lipschitz_interval"});
    if (b.contains("R_NN") && !b["R_NN"].is_null()) {
      c.bounds_r_nn = s.real(b["R_NN"], "/bounds/R_NN");
      if (*c.bounds_r_nn < 0.0) s.fail("/bounds/R_NN", "must be nonnegative");
    }
    if (b.contains("trials")) c.bounds_trials = s.integer(b["trials"], "/bounds/trials", 1);
    if (b.contains("hypothesis_draws")) c.bounds_hypothesis_draws = s.integer(b["hypothesis_draws"], "/bounds/hypothesis_draws", 1);
    if (b.contains("lipschitz_interval") && !b["lipschitz_interval"].is_null()) {
      c.lipschitz_interval = s.real(b["lipschitz_interval"], "/bounds/lipschitz_interval");
      if (c.lipschitz_interval <= 0.0) s.fail("/bounds/lipschitz_interval", "must be positive");
    }
  }
  if (j.contains("sparsity")) {
    const auto& sp = j["sparsity"];
    s.keys(sp, "/sparsity", {"epsilons"});
    if (sp.contains("epsilons")) {
      if (!sp["epsilons"].is_array()) s.fail("/sparsity/epsilons", "expected an array");
      c.epsilons.clear();
      for (std::size_t i = 0; i < sp["epsilons"].size(); ++i) {
        const double e = s.real(sp["epsilons"][i], "/sparsity/epsilons/" + std::to_string(i));
        if (e <= 0.0) s.fail("/sparsity/epsilons/" + std::to_string(i), "must be positive");
        c.epsilons.push_back(e);
      }
    }
  }
  if (j.contains("report") && !j["report"].is_null()) c.report = s.string(j["report"], "/report");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path(), path.string());
}

Json ExperimentConfig::echo() const {
  Json j;
  Json a;
  a["input_dim"] = arch.input_dim();
  a["widths"] = arch.widths();
  Json acts = Json::array();
  for (const auto& s : arch.activations()) acts.push_back(activation_echo(s));
  a["activations"] = acts;
  a["reg_scale"] = regularization_scale(arch, reg_scale);
  j["architecture"] = a;
  j["dataset"] = dataset ? Json(*dataset) : Json(nullptr);
  j["loss"] = loss_name(loss);
  j["lambda"] = lambda;
  j["truncation"] = truncation;
  j["seed"] = seed;
  j["training"] = {{"steps", train_steps}, {"step_size", train_step_size}};
  j["ksvm"] = {{"solver", ksvm_solver}, {"steps", ksvm_steps}, {"step_size", ksvm_step_size},
               {"init_scale", ksvm_init_scale}};
  j["kernel"] = {{"variant", kernel_variant_name(kernel_variant)}};
  j["weights"] = weights ? Json(*weights) : Json(nullptr);
  j["bounds"] = {{"R_NN", bounds_r_nn ? num(*bounds_r_nn) : Json(nullptr)},
                 {"trials", bounds_trials},
                 {"hypothesis_draws", bounds_hypothesis_draws},
                 {"lipschitz_interval", num(lipschitz_interval)}};
  j["sparsity"] = {{"epsilons", num_array(epsilons)}};
  j["report"] = report ? Json(*report) : Json(nullptr);
  return j;
}

namespace {

struct Report {
  Json results = Json::object();
  Json diagnostics = Json::object();
  std::vector<std::string> warnings;
};

Json finish(const RunContext& ctx, const std::string& command, Report r) {
  Json out;
  out["config_echo"] = ctx.config.echo();
  out["results"] = std::move(r.results);
  r.diagnostics["command"] = command;
  out["diagnostics"] = std::move(r.diagnostics);
  out["warnings"] = r.warnings;
  return out;
}

std::filesystem::path resolve(const ExperimentConfig& c, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : c.base_dir / path;
}

Dataset require_dataset(const ExperimentConfig& c) {
  if (!c.dataset) throw ValidationError("this subcommand needs a dataset (config key /dataset)");
  Dataset data = load_dataset(resolve(c, *c.dataset));
  if (data.dim() != c.arch.input_dim()) {
    throw ValidationError("dataset has " + std::to_string(data.dim()) + " input columns, architecture expects " +
                          std::to_string(c.arch.input_dim()));
  }
  return data;
}

void write_aux(const RunContext& ctx, Report& r, const std::string& suffix, const std::string& content) {
  if (!ctx.out) return;
  auto path = *ctx.out;
  path += "." + suffix;
  atomic_write(path, content);
  r.diagnostics["files"].push_back(path.filename().string());
}

std::string series_text(const FlatSpace& space, std::vector<double> values) {
  std::ostringstream os;
  space.as_series(std::move(values)).dump(os);
  return os.str();
}

WeightSet configured_weights(const ExperimentConfig& c, Report& r, const std::optional<Dataset>& train_on) {
  if (c.weights) {
    WeightSet w = load_weights(resolve(c, *c.weights));
    w.validate(c.arch);
    r.diagnostics["weights_source"] = "file";
    return w;
  }
  if (train_on) {
    TrainOptions opt{derive_seed(c.seed, seed_stream::kNetworkInit), c.train_steps, c.train_step_size, c.reg_scale};
    r.diagnostics["weights_source"] = "trained";
    return train(c.arch, *train_on, c.loss, c.lambda, opt).weights;
  }
  r.diagnostics["weights_source"] = "initialization";
  return initial_weights(c.arch, derive_seed(c.seed, seed_stream::kNetworkInit));
}

Json spectrum(const Eigen::MatrixXd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g, Eigen::EigenvaluesOnly);
  const auto& mu = eig.eigenvalues();
  Json j;
  j["min_eigenvalue"] = num(mu[0]);
  j["max_eigenvalue"] = num(mu[mu.size() - 1]);
  j["negative_eigenvalues"] = static_cast<int>((mu.array() < 0.0).count());
  j["frobenius_norm"] = num(g.norm());
  return j;
}

Json tight_json(const TightBound& t) {
  Json j;
  j["precondition_met"] = t.precondition_met;
  if (!t.precondition_met) {
    j["status"] = t.reason;
    return j;
  }
  j["general"] = num(t.general);
  j["unbounded"] = t.unbounded ? num(*t.unbounded) : Json(nullptr);
  j["bounded"] = t.bounded ? num(*t.bounded) : Json(nullptr);
  j["bounded_layer"] = t.bounded_layer ? Json(*t.bounded_layer) : Json(nullptr);
  j["value"] = num(t.value);
  return j;
}

Json bound_json(const BoundReport& b) {
  Json j;
  j["R_NN"] = num(b.r_nn);
  j["R_SVM"] = num(b.r_svm);
  j["L"] = num(b.lipschitz);
  j["layer_L"] = num_array(b.layer_lipschitz);
  j["H"] = num(b.width);
  j["d"] = b.depth;
  j["N"] = b.n;
  j["kbar_mean"] = num(b.kbar_mean);
  j["mean_sq_norm"] = num(b.mean_sq_norm);
  j["bound_kernel"] = num(b.bound_kernel);
  j["bound_linear"] = b.bound_linear ? num(*b.bound_linear) : Json(nullptr);
  j["bound_concave"] = tight_json(b.concave);
  j["empirical_estimate"] = b.empirical_estimate ? num(*b.empirical_estimate) : Json(nullptr);
  return j;
}

BoundReport bounds_with_empirical(const ExperimentConfig& c, double r_nn, const Eigen::MatrixXd& sample,
                                  Report& r) {
  BoundReport b = rademacher_bound_nn(c.arch, r_nn, sample, static_cast<int>(sample.rows()), c.lipschitz_interval);
  const auto emp = empirical_rademacher(c.arch, r_nn, sample, c.bounds_trials, c.bounds_hypothesis_draws,
                                        derive_seed(c.seed, seed_stream::kRademacher));
  b.empirical_estimate = emp.estimate;
  r.diagnostics["hypotheses_accepted"] = emp.accepted_draws;
  r.diagnostics["hypotheses_attempted"] = emp.attempted_draws;
  if (emp.accepted_draws < c.bounds_hypothesis_draws) {
    r.warnings.push_back("only " + std::to_string(emp.accepted_draws) + " of " +
                         std::to_string(c.bounds_hypothesis_draws) + " hypothesis draws were accepted");
  }
  if (!b.concave.precondition_met) r.warnings.push_back("tight bound: " + b.concave.reason);
  return b;
}

Json predictions(const Eigen::VectorXd& f) { return num_array(f); }

double mean_loss(Loss loss, const Eigen::VectorXd& y, const Eigen::VectorXd& f) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) s += loss_value(loss, y[i], f[i]);
  return s / static_cast<double>(y.size());
}

Eigen::VectorXd net_predictions(const Architecture& arch, const WeightSet& w, const Dataset& data) {
  Eigen::VectorXd f(data.size());
  for (int i = 0; i < data.size(); ++i) f[i] = forward(arch, w, Eigen::VectorXd(data.x.row(i).transpose()));
  return f;
}

std::string weights_text(const WeightSet& w) {
  std::ostringstream os;
  write_weights(os, w);
  return os.str();
}

struct KsvmFit {
  Eigen::VectorXd alpha;
  Json details;
};

KsvmFit fit_ksvm(const ExperimentConfig& c, const Eigen::MatrixXd& g, const Eigen::VectorXd& y) {
  if (!(c.lambda > 0.0)) throw ValidationError("KSVM training needs lambda > 0");
  KsvmFit fit;
  if (c.ksvm_solver == "eigen") {
    if (c.loss != Loss::Squared) throw ValidationError("the eigen KSVM solver needs the squared loss; use solver gd");
    const auto sol = train_squared(g, y, c.lambda);
    fit.alpha = sol.alpha;
    fit.details["solver"] = "eigen";
    fit.details["residual"] = num(sol.residual);
  } else {
    GdOptions opt{derive_seed(c.seed, seed_stream::kKsvm), c.ksvm_steps, c.ksvm_step_size, c.ksvm_init_scale};
    const auto sol = train_gd(g, y, c.lambda, c.loss, opt);
    fit.alpha = sol.alpha;
    fit.details["solver"] = "gd";
    fit.details["gradient_norm"] = num(sol.gradient_norm);
  }
  const auto obj = stabilized_objective(fit.alpha, g, y, c.lambda, c.loss);
  fit.details["data_term"] = num(obj.data_term);
  fit.details["regularizer"] = num(obj.regularizer);
  fit.details["objective"] = num(obj.total);
  return fit;
}

}  // namespace

Json run_flatten(const RunContext& ctx) {
  const auto& c = ctx.config;
  Report r;
  const WeightSet w = configured_weights(c, r, std::nullopt);
  const FlatSpace space = FlatSpace::build(c.arch, c.truncation);
  const auto layers = space.layer_weights(c.arch, w);
  const auto v = space.flat_weight(c.arch, w);
  const auto& g = space.metric();

  Json sizes = Json::array();
  for (int q = 0; q < space.depth(); ++q) sizes.push_back(space.level_size(q));
  r.results["features"] = space.size();
  r.results["level_features"] = sizes;
  r.results["truncation"] = c.truncation;
  std::size_t negative = 0;
  for (double x : g) negative += x < 0.0;
  r.results["negative_metric_entries"] = negative;

  double gvv = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) gvv += g[k] * v[k] * v[k];
  r.results["flat_self_product"] = num(gvv);
  r.results["reg_flat"] = num(reg_flat(c.arch, w, KernelVariant::Krein));

  std::vector<double> x0(static_cast<std::size_t>(c.arch.input_dim()), 0.0);
  if (c.dataset) {
    const Dataset data = require_dataset(c);
    std::vector<SeriesVector> vs;
    for (const auto& l : layers) vs.push_back(space.as_series(l));
    const SeriesVector gs = space.as_series(g);
    const SeriesVector vn = space.as_series(v);
    double max_abs = 0.0;
    double max_rel = 0.0;
    double max_semi = 0.0;
    for (int i = 0; i < data.size(); ++i) {
      std::vector<double> x(static_cast<std::size_t>(data.dim()));
      for (int jx = 0; jx < data.dim(); ++jx) x[static_cast<std::size_t>(jx)] = data.x(i, jx);
      if (i == 0) x0 = x;
      const double f = forward(c.arch, w, std::span<const double>(x));
      const SeriesVector phi = space.as_series(space.feature_map(x));
      const double flat = flat_eval(vn, phi, gs);
      const double semi = semi_flat_eval(vs, phi, gs);
      max_abs = std::max(max_abs, std::abs(f - flat));
      max_rel = std::max(max_rel, std::abs(f - flat) / (1.0 + std::abs(f)));
      max_semi = std::max(max_semi, std::abs(f - semi) / (1.0 + std::abs(f)));
    }
    r.results["max_abs_residual"] = num(max_abs);
    r.results["max_relative_residual"] = num(max_rel);
    r.results["max_semi_flat_relative_residual"] = num(max_semi);
    r.results["samples"] = data.size();
  } else {
    r.results["max_abs_residual"] = nullptr;
    r.warnings.push_back("no dataset: equivalence residual not computed");
  }
  write_aux(ctx, r, "g_nn.txt", series_text(space, g));
  write_aux(ctx, r, "v_nn.txt", series_text(space, v));
  for (std::size_t q = 0; q < layers.size(); ++q) {
    write_aux(ctx, r, "v_" + std::to_string(q) + ".txt", series_text(space, layers[q]));
  }
  write_aux(ctx, r, "phi_nn_x0.txt", series_text(space, space.feature_map(x0)));
  return finish(ctx, "flatten", std::move(r));
}

Json run_kernel(const RunContext& ctx) {
  const auto& c = ctx.config;
  Report r;
  const Dataset data = require_dataset(c);
  const KernelDefinition def(c.arch, c.kernel_variant);
  const Eigen::MatrixXd g = gram(def, data.x);
  r.results["variant"] = kernel_variant_name(c.kernel_variant);
  r.results["N"] = data.size();
  r.results["spectrum"] = spectrum(g);
  r.results["diagonal"] = num_array(Eigen::VectorXd(g.diagonal()));
  std::ostringstream os;
  write_matrix_csv(os, g);
  write_aux(ctx, r, "gram.csv", os.str());
  return finish(ctx, "kernel", std::move(r));
}

Json run_train_net(const RunContext& ctx) {
  const auto& c = ctx.config;
  Report r;
  const Dataset data = require_dataset(c);
  TrainOptions opt{derive_seed(c.seed, seed_stream::kNetworkInit), c.train_steps, c.train_step_size, c.reg_scale};
  const TrainResult tr = train(c.arch, data, c.loss, c.lambda, opt);
  const Eigen::VectorXd f = net_predictions(c.arch, tr.weights, data);
  r.results["initial_objective"] = num(tr.initial_objective);
  r.results["final_objective"] = num(tr.final_objective);
  r.results["data_loss"] = num(mean_loss(c.loss, data.y, f));
  r.results["regularizer"] = num(c.lambda * regularization_scale(c.arch, c.reg_scale) * tr.weights.squared_norm());
  r.results["R_NN"] = num(rnn_radius(c.arch, tr.weights));
  r.results["predictions"] = predictions(f);
  r.diagnostics["steps"] = c.train_steps;
  r.diagnostics["objective_history_last"] = num(tr.history.back());
  if (!c.reg_scale) r.warnings.push_back("regularization scale defaults to 1/d");
  write_aux(ctx, r, "weights.txt", weights_text(tr.weights));
  return finish(ctx, "train-net", std::move(r));
}

Json run_train_ksvm(const RunContext& ctx) {
  const auto& c = ctx.config;
  Report r;
  const Dataset data = require_dataset(c);
  const KernelDefinition def(c.arch, c.kernel_variant);
  const Eigen::MatrixXd g = gram(def, data.x);
  const KsvmFit fit = fit_ksvm(c, g, data.y);
  const Eigen::VectorXd f = g * fit.alpha;
  r.results["variant"] = kernel_variant_name(c.kernel_variant);
  r.results["alpha"] = num_array(fit.alpha);
  r.results["fit"] = fit.details;
  r.results["data_loss"] = num(mean_loss(c.loss, data.y, f));
  r.results["predictions"] = predictions(f);
  r.results["spectrum"] = spectrum(g);
  const TrainedKSVM model(fit.alpha, data.x, c.lambda, def);
  std::ostringstream os;
  write_model(os, model);
  write_aux(ctx, r, "model.txt", os.str());
  return finish(ctx, "train-ksvm", std::move(r));
}

Json run_compare(const RunContext& ctx) {
  const auto& c = ctx.config;
  Report r;
  const Dataset data = require_dataset(c);
  TrainOptions opt{derive_seed(c.seed, seed_stream::kNetworkInit), c.train_steps, c.train_step_size, c.reg_scale};
  const TrainResult tr = train(c.arch, data, c.loss, c.lambda, opt);
  const Eigen::VectorXd fnet = net_predictions(c.arch, tr.weights, data);
  Json net;
  net["final_objective"] = num(tr.final_objective);
  net["data_loss"] = num(mean_loss(c.loss, data.y, fnet));
  net["predictions"] = predictions(fnet);
  r.results["network"] = net;

  const KernelDefinition def(c.arch, KernelVariant::Krein);
  const Eigen::MatrixXd g = gram(def, data.x);
  const KsvmFit fit = fit_ksvm(c, g, data.y);
  const Eigen::VectorXd fsvm = g * fit.alpha;
  Json svm = fit.details;
  svm["alpha"] = num_array(fit.alpha);
  svm["data_loss"] = num(mean_loss(c.loss, data.y, fsvm));
  svm["predictions"] = predictions(fsvm);
  r.results["ksvm"] = svm;
  r.results["gram"] = spectrum(g);

  const double r_nn = c.bounds_r_nn ? *c.bounds_r_nn : rnn_radius(c.arch, tr.weights);
  r.results["bounds"] = bound_json(bounds_with_empirical(c, r_nn, data.x, r));
  if (!c.reg_scale) r.warnings.push_back("regularization scale defaults to 1/d");
  return finish(ctx, "compare", std::move(r));
}

Json run_bounds(const RunContext& ctx) {
  const auto& c = ctx.config;
  Report r;
  const Dataset data = require_dataset(c);
  double r_nn = 1.0;
  if (c.bounds_r_nn) {
    r_nn = *c.bounds_r_nn;
    r.diagnostics["R_NN_source"] = "config";
  } else if (c.weights) {
    const WeightSet w = configured_weights(c, r, std::nullopt);
    r_nn = rnn_radius(c.arch, w);
    r.diagnostics["R_NN_source"] = "weights";
  } else {
    r.diagnostics["R_NN_source"] = "default";
    r.warnings.push_back("R_NN not configured; using 1");
  }
  const BoundReport b = bounds_with_empirical(c, r_nn, data.x, r);
  r.results = bound_json(b);
  const double emp = *b.empirical_estimate;
  Json order;
  order["empirical_le_kernel"] = emp <= b.bound_kernel;
  if (b.bound_linear) order["empirical_le_linear"] = emp <= *b.bound_linear;
  if (b.concave.precondition_met) order["empirical_le_concave"] = emp <= b.concave.value;
  r.results["ordering"] = order;
  return finish(ctx, "bounds", std::move(r));
}

Json run_sparsity(const RunContext& ctx) {
  const auto& c = ctx.config;
  Report r;
  std::optional<Dataset> data;
  if (c.dataset && !c.weights) data = require_dataset(c);
  const WeightSet w = configured_weights(c, r, data);
  const FlatSpace space = FlatSpace::build(c.arch, c.truncation);
  const auto layers = space.layer_weights(c.arch, w);
  const auto v = space.flat_weight(c.arch, w);
  const int d = c.arch.depth();

  std::vector<double> widths;
  for (int q = 0; q < d; ++q) widths.push_back(c.arch.width(q));
  const auto lbar = chain_lipschitz_bar(c.arch, w);
  SparsityInputs in;
  in.width = geometric_mean(widths);
  in.lipschitz_bar = geometric_mean(lbar);
  in.input_dim = c.arch.input_dim();
  in.r_nn = rnn_radius(c.arch, w);
  in.depth = d;
  in.epsilons = c.epsilons;
  const auto prof = sparsity_profile(space.as_series(space.metric()), space.as_series(v), in);

  double g_inf = 0.0;
  for (double x : space.metric()) g_inf = std::max(g_inf, std::abs(x));
  r.results["features"] = space.size();
  r.results["H"] = num(in.width);
  r.results["L_bar"] = num(in.lipschitz_bar);
  r.results["layer_L_bar"] = num_array(lbar);
  r.results["D"] = in.input_dim;
  r.results["d"] = d;
  r.results["R_NN"] = num(in.r_nn);
  r.results["norm_2_over_d"] = num(prof.norm);
  r.results["norm_bound"] = num(prof.bound);
  r.results["norm_bound_holds"] = prof.norm <= prof.bound;
  r.results["v_nn_inf"] = num(prof.v_inf);
  r.results["v_nn_inf_bound"] = num(prof.v_inf_bound);
  r.results["v_nn_inf_bound_holds"] = prof.v_inf <= prof.v_inf_bound;
  Json lv = Json::array();
  for (std::size_t q = 0; q < layers.size(); ++q) {
    double m = 0.0;
    for (double x : layers[q]) m = std::max(m, std::abs(x));
    lv.push_back({{"layer", q}, {"inf_norm", num(m)}, {"bound", num(d * in.r_nn)}, {"holds", m <= d * in.r_nn}});
  }
  r.results["v_layer_inf"] = lv;
  Json eps = Json::array();
  for (std::size_t i = 0; i < prof.epsilons.size(); ++i) {
    eps.push_back({{"epsilon", num(prof.epsilons[i])},
                   {"count", prof.counts[i]},
                   {"cap", num(prof.caps[i])},
                   {"holds", static_cast<double>(prof.counts[i]) <= prof.caps[i]},
                   {"in_range", prof.epsilons[i] <= d * in.r_nn * g_inf}});
  }
  r.results["epsilon_counts"] = eps;
  r.results["epsilon_upper"] = num(d * in.r_nn * g_inf);
  if (d < 2) r.warnings.push_back("depth 1 gives exponent 2/d = 2, outside the [0, 1] range of the norm bound");
  r.warnings.push_back("left sides are computed on the truncated flat space");
  return finish(ctx, "sparsity", std::move(r));
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"flatten", "kernel", "train-net", "train-ksvm",
                                              "compare", "bounds", "sparsity"};
  return names;
}

Json run_subcommand(const std::string& name, const RunContext& ctx) {
  if (name == "flatten") return run_flatten(ctx);
  if (name == "kernel") return run_kernel(ctx);
  if (name == "train-net") return run_train_net(ctx);
  if (name == "train-ksvm") return run_train_ksvm(ctx);
  if (name == "compare") return run_compare(ctx);
  if (name == "bounds") return run_bounds(ctx);
  if (name == "sparsity") return run_sparsity(ctx);
  throw ValidationError("unknown subcommand '" + name + "'");
}

}  // namespace deepkrein
