// Command-line front end: fit / predict / bench / diagnose.
//
// Exit codes: 0 success, 2 usage, 3 data, 4 numerical (trace still written
// when available), 5 diagnostic failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "gsc/baseline.hpp"
#include "gsc/data_io.hpp"
#include "gsc/globalization.hpp"
#include "gsc/nystrom.hpp"
#include "gsc/rng.hpp"
#include "gsc/version.hpp"

using json = nlohmann::ordered_json;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitDiagnostic = 5;

bool wall_clock_enabled() {
  const char* env = std::getenv("GSC_WALLCLOCK");
  return env != nullptr && std::string(env) == "1";
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Run specification: every flag, echoed verbatim into every output file.

struct RunSpec {
  std::string subcommand;
  std::string data_path;
  std::string format = "auto";  // libsvm|csv|auto
  std::string label_column = "label";
  std::string synth;
  bool standardize_data = false;
  double test_fraction = 0.2;

  std::string loss = "logistic";
  int classes = 3;

  std::string kernel;  // empty = parametric; gaussian|linear
  double sigma = 1.0;
  long long centers = 0;     // M
  long long subsamples = 0;  // Q
  std::string center_sampling = "uniform";
  std::string precond_sampling = "uniform";
  int tau = 3;

  double lambda = 1e-6;
  double epsilon = 1e-8;
  double rho = 1.0 / 7.0;
  int t = 2;
  std::string q_rule = "adaptive";
  double fixed_q = 0.5;
  bool certified = false;
  int max_outer = 0;
  std::string solver = "auto";  // exact|pcg|auto
  std::string preset;

  std::string baseline = "svrg";  // svrg|katyusha
  long long batch = 0;            // 0 = M (kernel) or sqrt(n)
  int epochs = 50;
  double step_size = 0.0;
  std::string sweep_lambdas;

  std::uint64_t seed = 0;
  std::string out_prefix = "run";
  std::string model_path;  // for predict
  bool inject_bug = false;

  std::string echo() const {
    std::ostringstream os;
    os << "cmd=" << subcommand;
    if (!data_path.empty()) os << " data=" << data_path << " format=" << format;
    if (!synth.empty()) os << " synth=" << synth;
    if (standardize_data) os << " standardize=1";
    os << " loss=" << loss;
    if (loss == "softmax") os << " classes=" << classes;
    if (!kernel.empty()) {
      os << " kernel=" << kernel << " sigma=" << fmt(sigma) << " M=" << centers
         << " Q=" << subsamples << " tau=" << tau << " center_sampling=" << center_sampling
         << " precond_sampling=" << precond_sampling;
    }
    os << " lambda=" << fmt(lambda) << " eps=" << fmt(epsilon) << " rho=" << fmt(rho)
       << " t=" << t << " q_rule=" << q_rule;
    if (q_rule == "fixed") os << " q=" << fmt(fixed_q);
    if (certified) os << " phase2=certified";
    os << " solver=" << solver;
    if (!preset.empty()) os << " preset=" << preset;
    if (subcommand == "bench") {
      os << " baseline=" << baseline << " batch=" << batch << " epochs=" << epochs
         << " step_size=" << fmt(step_size);
      if (!sweep_lambdas.empty()) os << " sweep=" << sweep_lambdas;
    }
    os << " seed=" << seed;
    return os.str();
  }

  std::vector<std::string> header_lines() const {
    return {std::string("artifact_version=") + gsc::kVersion, "runspec: " + echo(),
            "seed=" + std::to_string(seed)};
  }
};

// ---------------------------------------------------------------------------

gsc::LossFamily parse_loss(const RunSpec& spec) {
  if (spec.loss == "logistic") return gsc::LossFamily::logistic();
  if (spec.loss == "squared" || spec.loss == "quadratic") return gsc::LossFamily::squared();
  if (spec.loss == "robust") return gsc::LossFamily::robust_regression();
  if (spec.loss == "softmax") return gsc::LossFamily::softmax(spec.classes);
  throw CLI::ValidationError("--loss", "unknown loss family '" + spec.loss + "'");
}

gsc::Sampling parse_sampling(const std::string& s) {
  if (s == "uniform") return gsc::Sampling::Uniform;
  if (s == "leverage") return gsc::Sampling::LeverageScores;
  throw CLI::ValidationError("--sampling", "unknown sampling '" + s + "'");
}

std::map<std::string, std::string> parse_kv(const std::string& body) {
  std::map<std::string, std::string> kv;
  std::istringstream is(body);
  std::string item;
  while (std::getline(is, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw gsc::DomainError("synth spec: expected key=value pairs");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return kv;
}

gsc::Dataset make_synth(const std::string& synth, std::uint64_t seed) {
  const auto colon = synth.find(':');
  const std::string kind = synth.substr(0, colon);
  const auto kv = colon == std::string::npos ? std::map<std::string, std::string>{}
                                             : parse_kv(synth.substr(colon + 1));
  auto get = [&](const char* key, double dflt) {
    const auto it = kv.find(key);
    return it == kv.end() ? dflt : std::stod(it->second);
  };
  if (kind == "logistic") {
    return gsc::synth_logistic(static_cast<Eigen::Index>(get("n", 1000)),
                               static_cast<Eigen::Index>(get("d", 10)), get("margin", 0.5),
                               get("noise", 0.1), seed);
  }
  if (kind == "two_moons" || kind == "two-moons") {
    return gsc::synth_two_moons(static_cast<Eigen::Index>(get("n", 1000)), get("noise", 0.1),
                                seed);
  }
  throw gsc::DomainError("synth spec: unknown generator '" + kind + "'");
}

gsc::Dataset load_data(const RunSpec& spec) {
  if (!spec.synth.empty()) {
    gsc::Dataset d = make_synth(spec.synth, spec.seed);
    if (spec.standardize_data) d = gsc::standardize(std::move(d));
    return d;
  }
  if (spec.data_path.empty()) {
    throw gsc::DomainError("no input: pass --data PATH or --synth SPEC");
  }
  if (!std::filesystem::exists(spec.data_path)) {
    throw gsc::Error("data file not found: " + spec.data_path);
  }
  std::string format = spec.format;
  if (format == "auto") {
    format = spec.data_path.ends_with(".csv") ? "csv" : "libsvm";
  }
  gsc::Dataset d = format == "csv" ? gsc::load_csv(spec.data_path, spec.label_column)
                                   : gsc::load_libsvm(spec.data_path);
  if (spec.standardize_data) d = gsc::standardize(std::move(d));
  return d;
}

gsc::GlobalizationConfig scheme_config(const RunSpec& spec, bool kernel_path, Eigen::Index n) {
  gsc::GlobalizationConfig cfg;
  cfg.epsilon = spec.epsilon;
  cfg.t = spec.t;
  cfg.max_outer = spec.max_outer;
  cfg.phase2 = spec.certified ? gsc::Phase2Mode::Certified : gsc::Phase2Mode::FixedCount;
  if (spec.q_rule == "adaptive") {
    cfg.q_rule = gsc::QRule::Adaptive;
  } else if (spec.q_rule == "variant") {
    cfg.q_rule = gsc::QRule::AdaptiveVariant;
  } else if (spec.q_rule == "fixed") {
    cfg.q_rule = gsc::QRule::Fixed;
    cfg.fixed_q = spec.fixed_q;
  } else {
    throw gsc::DomainError("unknown q rule '" + spec.q_rule + "'");
  }
  cfg.solver.rho = spec.rho;
  cfg.solver.seed = spec.seed;
  cfg.solver.pcg_iters = spec.tau;
  cfg.solver.sampling = parse_sampling(spec.precond_sampling);
  cfg.record_wall_clock = wall_clock_enabled();

  const bool use_pcg = spec.solver == "pcg" || (spec.solver == "auto" && kernel_path);
  if (use_pcg) {
    cfg.solver.solver = gsc::AnmConfig::Solver::Pcg;
    if (spec.subsamples > 0) {
      cfg.solver.subsamples = static_cast<Eigen::Index>(spec.subsamples);
    } else if (spec.centers > 0) {
      cfg.solver.subsamples = std::min<Eigen::Index>(n, 2 * static_cast<Eigen::Index>(spec.centers));
    } else {
      cfg.solver.subsamples = std::min<Eigen::Index>(n, std::max<Eigen::Index>(128, n / 5));
    }
  } else {
    cfg.solver.solver = gsc::AnmConfig::Solver::Exact;
  }
  return cfg;
}

void write_summary(const std::string& path, const RunSpec& spec, const json& extra) {
  json j;
  j["artifact_version"] = gsc::kVersion;
  j["runspec"] = spec.echo();
  j["seed"] = spec.seed;
  for (const auto& [key, value] : extra.items()) j[key] = value;
  std::ofstream os(path);
  os << j.dump(2) << "\n";
}

json trace_summary(const gsc::SolveTrace& trace) {
  json j;
  j["final_objective"] = trace.final_objective;
  j["decrement_estimate"] = trace.final_decrement_estimate;
  j["K"] = trace.stopping_index;
  j["phase1_runs"] = trace.phase1_runs;
  j["total_newton_steps"] = trace.total_newton_steps;
  j["inner_iters"] = trace.inner_iters;
  j["passes"] = trace.passes;
  j["mu0"] = trace.mu0;
  j["lambda"] = trace.lambda;
  j["wall_ms"] = trace.wall_ms_total;
  return j;
}

void write_trace(const std::string& path, const RunSpec& spec, const gsc::SolveTrace& trace) {
  std::ofstream os(path);
  auto lines = spec.header_lines();
  lines.push_back("config: " + trace.config_echo);
  trace.write_csv(os, lines);
}

void write_weights(const std::string& path, const RunSpec& spec, const VectorXd& x) {
  std::ofstream os(path);
  for (const auto& line : spec.header_lines()) os << "# " << line << "\n";
  os << "dim " << x.size() << "\n";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << fmt(x[i]) << "\n";
}

VectorXd read_weights(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw gsc::Error("cannot open weight file: " + path);
  std::string line;
  Eigen::Index dim = -1;
  std::vector<double> values;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("dim ", 0) == 0) {
      dim = std::stoll(line.substr(4));
      continue;
    }
    values.push_back(std::stod(line));
  }
  if (dim < 0 || static_cast<Eigen::Index>(values.size()) != dim) {
    throw gsc::ParseError("weight file is malformed: " + path);
  }
  return Eigen::Map<VectorXd>(values.data(), dim);
}

double classification_error(const VectorXd& scores, const VectorXd& labels) {
  Eigen::Index wrong = 0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const double pred = scores[i] >= 0 ? 1.0 : -1.0;
    const double truth = labels[i] == 0.0 ? -1.0 : labels[i];
    if (pred != truth) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(scores.size());
}

// ---------------------------------------------------------------------------
// fit

int run_fit(RunSpec spec) {
  gsc::Dataset data = load_data(spec);
  const auto family = parse_loss(spec);
  const std::string trace_path = spec.out_prefix + "_trace.csv";
  const std::string summary_path = spec.out_prefix + "_summary.json";

  if (!spec.preset.empty()) {
    if (spec.preset != "susy") throw gsc::DomainError("unknown preset '" + spec.preset + "'");
    // Large-scale Gaussian-kernel recipe, applied at whatever n is loaded:
    // sigma 5, lambda 1e-10, Q = M, with the fast fixed decrease and the
    // self-stopping final phase.
    spec.kernel = "gaussian";
    spec.sigma = 5.0;
    spec.lambda = 1e-10;
    spec.centers = std::min<long long>(10000, data.rows());
    spec.subsamples = spec.centers;
    spec.q_rule = "fixed";
    spec.fixed_q = 0.5;
    spec.certified = true;
  }

  if (!spec.kernel.empty()) {
    if (spec.centers <= 0) spec.centers = std::min<Eigen::Index>(data.rows(), 100);
    if (spec.subsamples <= 0) spec.subsamples = std::min<Eigen::Index>(data.rows(), 2 * spec.centers);
    gsc::KernelSolveConfig cfg;
    cfg.scheme = scheme_config(spec, true, data.rows());
    cfg.scheme.solver.subsamples = static_cast<Eigen::Index>(spec.subsamples);
    cfg.centers = static_cast<Eigen::Index>(spec.centers);
    cfg.center_sampling = parse_sampling(spec.center_sampling);
    const auto kernel = spec.kernel == "gaussian" ? gsc::KernelSpec::gaussian(spec.sigma)
                                                  : gsc::KernelSpec::linear();
    try {
      auto res = gsc::kernel_solve(data.x, data.y, family, kernel, spec.lambda, cfg);
      gsc::save_model(spec.out_prefix + "_model.bin", res.model);
      write_trace(trace_path, spec, res.trace);
      json extra = trace_summary(res.trace);
      extra["model"] = spec.out_prefix + "_model.bin";
      extra["train_error"] = classification_error(res.model.scores(data.x), data.y);
      write_summary(summary_path, spec, extra);
    } catch (const gsc::ConvergenceError& err) {
      write_trace(trace_path, spec, err.trace());
      std::cerr << "numerical failure: " << err.what() << "\n";
      return kExitNumerical;
    }
    return kExitOk;
  }

  const gsc::FiniteSumProblem problem(data.x, data.y, family);
  const gsc::GlobalizationConfig cfg = scheme_config(spec, false, data.rows());
  try {
    auto res = gsc::solve(problem, spec.lambda, cfg);
    write_weights(spec.out_prefix + "_weights.txt", spec, res.x);
    write_trace(trace_path, spec, res.trace);
    json extra = trace_summary(res.trace);
    extra["weights"] = spec.out_prefix + "_weights.txt";
    if (family.kind() == gsc::LossKind::Logistic) {
      extra["train_error"] = classification_error(data.x * res.x, data.y);
    }
    write_summary(summary_path, spec, extra);
  } catch (const gsc::ConvergenceError& err) {
    write_trace(trace_path, spec, err.trace());
    std::cerr << "numerical failure: " << err.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// predict

int run_predict(const RunSpec& spec) {
  if (spec.model_path.empty()) throw gsc::DomainError("predict needs --model");
  if (!std::filesystem::exists(spec.model_path)) {
    throw gsc::Error("model file not found: " + spec.model_path);
  }
  const gsc::Dataset data = load_data(spec);
  const std::string out = spec.out_prefix + "_predictions.csv";

  if (spec.model_path.ends_with(".txt")) {
    const VectorXd w = read_weights(spec.model_path);
    if (w.size() != data.cols() && w.size() % data.cols() != 0) {
      throw gsc::DimensionError("weights do not match data dimension");
    }
    std::ofstream os(out);
    for (const auto& line : spec.header_lines()) os << "# " << line << "\n";
    if (w.size() == data.cols()) {
      const VectorXd scores = data.x * w;
      os << "score,label\n";
      for (Eigen::Index i = 0; i < scores.size(); ++i) {
        os << fmt(scores[i]) << ',' << (scores[i] >= 0 ? 1 : -1) << "\n";
      }
      if (data.y.size() == scores.size()) {
        std::cout << "error_rate=" << classification_error(scores, data.y) << "\n";
      }
      return kExitOk;
    }
    // Flattened d x k parameter block: argmax decisions.
    const auto k = w.size() / data.cols();
    const Eigen::Map<const MatrixXd> wm(w.data(), data.cols(), k);
    const MatrixXd scores = data.x * wm;
    os << "label\n";
    Eigen::Index wrong = 0;
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
      Eigen::Index best;
      scores.row(i).maxCoeff(&best);
      os << (best + 1) << "\n";
      if (data.y.size() == scores.rows() && data.y[i] != static_cast<double>(best + 1)) ++wrong;
    }
    if (data.y.size() == scores.rows()) {
      std::cout << "error_rate="
                << static_cast<double>(wrong) / static_cast<double>(scores.rows()) << "\n";
    }
    return kExitOk;
  }

  const gsc::NystromModel model = gsc::load_model(spec.model_path);
  const VectorXd scores = model.scores(data.x);
  std::ofstream os(out);
  for (const auto& line : spec.header_lines()) os << "# " << line << "\n";
  os << "score,label\n";
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    os << fmt(scores[i]) << ',' << (scores[i] >= 0 ? 1 : -1) << "\n";
  }
  if (data.y.size() == scores.size()) {
    std::cout << "error_rate=" << classification_error(scores, data.y) << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bench

struct BenchProblem {
  std::unique_ptr<gsc::RegularizedObjective> objective;
  std::optional<gsc::KernelSolveConfig> kernel_cfg;
};

int run_bench(RunSpec spec) {
  gsc::Dataset data = load_data(spec);
  const auto family = parse_loss(spec);

  if (!spec.sweep_lambdas.empty()) {
    // Regularization sweep: train/test error as a function of lambda.
    const auto [train, test] = gsc::split(data, spec.test_fraction, spec.seed);
    std::ofstream os(spec.out_prefix + "_sweep.csv");
    for (const auto& line : spec.header_lines()) os << "# " << line << "\n";
    os << "lambda,train_loss,test_loss,train_error,test_error\n";
    std::istringstream ls(spec.sweep_lambdas);
    std::string item;
    while (std::getline(ls, item, ',')) {
      const double lambda = std::stod(item);
      RunSpec one = spec;
      one.lambda = lambda;
      gsc::KernelSolveConfig cfg;
      cfg.scheme = scheme_config(one, true, train.rows());
      cfg.centers = spec.centers > 0 ? static_cast<Eigen::Index>(spec.centers)
                                     : std::min<Eigen::Index>(train.rows(), 100);
      cfg.scheme.solver.subsamples = spec.subsamples > 0
                                         ? static_cast<Eigen::Index>(spec.subsamples)
                                         : std::min<Eigen::Index>(train.rows(), 2 * cfg.centers);
      const auto kernel = spec.kernel == "linear" ? gsc::KernelSpec::linear()
                                                  : gsc::KernelSpec::gaussian(spec.sigma);
      const auto res = gsc::kernel_solve(train.x, train.y, family, kernel, lambda, cfg);
      auto mean_loss = [&](const gsc::Dataset& part) {
        const VectorXd s = res.model.scores(part.x);
        double total = 0.0;
        for (Eigen::Index i = 0; i < s.size(); ++i) {
          total += gsc::loss_eval(family, s[i], part.y[i]).value;
        }
        return total / static_cast<double>(s.size());
      };
      os << fmt(lambda) << ',' << fmt(mean_loss(train)) << ',' << fmt(mean_loss(test)) << ','
         << fmt(classification_error(res.model.scores(train.x), train.y)) << ','
         << fmt(classification_error(res.model.scores(test.x), test.y)) << "\n";
    }
    return kExitOk;
  }

  // Head-to-head: the second-order scheme vs the first-order baseline on the
  // same objective, traces on the shared CSV schema.
  std::unique_ptr<gsc::RegularizedObjective> objective;
  gsc::SolveTrace second_trace;
  if (!spec.kernel.empty()) {
    if (spec.centers <= 0) spec.centers = std::min<Eigen::Index>(data.rows(), 100);
    if (spec.subsamples <= 0) spec.subsamples = std::min<Eigen::Index>(data.rows(), 2 * spec.centers);
    gsc::KernelSolveConfig cfg;
    cfg.scheme = scheme_config(spec, true, data.rows());
    cfg.scheme.solver.subsamples = static_cast<Eigen::Index>(spec.subsamples);
    cfg.centers = static_cast<Eigen::Index>(spec.centers);
    const auto kernel = spec.kernel == "linear" ? gsc::KernelSpec::linear()
                                                : gsc::KernelSpec::gaussian(spec.sigma);
    auto res = gsc::kernel_solve(data.x, data.y, family, kernel, spec.lambda, cfg);
    second_trace = res.trace;
    objective = std::make_unique<gsc::ProjectedProblem>(
        data.x, data.y, family, kernel, res.model.centers,
        gsc::TriangularFactor{res.model.tri, res.model.jitter});
  } else {
    auto problem = std::make_unique<gsc::FiniteSumProblem>(data.x, data.y, family);
    auto res = gsc::solve(*problem, spec.lambda, scheme_config(spec, false, data.rows()));
    second_trace = res.trace;
    objective = std::move(problem);
  }
  write_trace(spec.out_prefix + "_second_order.csv", spec, second_trace);

  gsc::FoConfig fo;
  fo.batch = spec.batch > 0 ? static_cast<Eigen::Index>(spec.batch)
                            : std::max<Eigen::Index>(1, spec.kernel.empty()
                                                            ? static_cast<Eigen::Index>(
                                                                  std::sqrt(double(data.rows())))
                                                            : static_cast<Eigen::Index>(spec.centers));
  fo.epochs = spec.epochs;
  fo.step_size = spec.step_size;
  fo.seed = spec.seed;
  fo.momentum = spec.baseline == "katyusha" ? gsc::FoConfig::Momentum::Katyusha
                                            : gsc::FoConfig::Momentum::None;
  fo.record_wall_clock = wall_clock_enabled();
  gsc::SolveTrace fo_trace;
  try {
    auto res = gsc::fo_solve(*objective, spec.lambda, fo);
    fo_trace = std::move(res.trace);
  } catch (const gsc::NumericalError& err) {
    std::cerr << "numerical failure in baseline: " << err.what() << "\n";
    return kExitNumerical;
  }
  write_trace(spec.out_prefix + "_baseline.csv", spec, fo_trace);

  // Passes-to-gap table against the best objective either method reached.
  double best = second_trace.final_objective;
  for (const auto& row : fo_trace.rows) best = std::min(best, row.objective);
  for (const auto& row : second_trace.rows) best = std::min(best, row.objective);
  auto passes_to = [&](const gsc::SolveTrace& trace, double gap) -> double {
    for (const auto& row : trace.rows) {
      if (row.objective - best <= gap) return row.cum_passes;
    }
    return -1.0;  // not reached
  };
  json table = json::array();
  for (const double gap : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
    table.push_back({{"gap", gap},
                     {"second_order_passes", passes_to(second_trace, gap)},
                     {"baseline_passes", passes_to(fo_trace, gap)}});
  }
  json extra;
  extra["best_objective"] = best;
  extra["passes_to_gap"] = table;
  extra["second_order"] = trace_summary(second_trace);
  extra["baseline_final_objective"] = fo_trace.final_objective;
  extra["baseline_passes"] = fo_trace.passes;
  write_summary(spec.out_prefix + "_bench_summary.json", spec, extra);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// diagnose

// Corrupts the curvature oracle (sign of l'') to prove the harness catches
// broken Hessians.
class BrokenCurvature final : public gsc::RegularizedObjective {
 public:
  explicit BrokenCurvature(const gsc::RegularizedObjective& inner) : inner_(inner) {}

  Eigen::Index dim() const override { return inner_.dim(); }
  Eigen::Index num_samples() const override { return inner_.num_samples(); }
  double radius() const override { return inner_.radius(); }
  double smoothness_bound() const override { return inner_.smoothness_bound(); }
  double loss_value(const VectorXd& x) const override { return inner_.loss_value(x); }
  VectorXd loss_gradient(const VectorXd& x) const override { return inner_.loss_gradient(x); }
  VectorXd loss_hessian_vec(const VectorXd& x, const VectorXd& v) const override {
    return -inner_.loss_hessian_vec(x, v);
  }
  MatrixXd loss_hessian_dense(const VectorXd& x) const override {
    return -inner_.loss_hessian_dense(x);
  }
  VectorXd batch_loss_gradient(const VectorXd& x,
                               std::span<const Eigen::Index> rows) const override {
    return inner_.batch_loss_gradient(x, rows);
  }
  gsc::Preconditioner build_preconditioner(const VectorXd& x, double mu, Eigen::Index q,
                                           gsc::Sampling s, std::uint64_t seed) const override {
    return inner_.build_preconditioner(x, mu, q, s, seed);
  }

 private:
  const gsc::RegularizedObjective& inner_;
};

int run_diagnose(const RunSpec& spec) {
  const bool quadratic = spec.loss == "squared" || spec.loss == "quadratic";
  const gsc::Dataset data = gsc::synth_logistic(40, 3, 0.5, 0.2, spec.seed + 1);
  const gsc::FiniteSumProblem base(data.x, data.y,
                                   quadratic ? gsc::LossFamily::squared()
                                             : gsc::LossFamily::logistic());
  const BrokenCurvature broken(base);
  const gsc::RegularizedObjective& problem =
      spec.inject_bug ? static_cast<const gsc::RegularizedObjective&>(broken) : base;

  const double lambda = 1e-3;
  gsc::SplitMix64 rng(spec.seed);
  int failures = 0;
  auto report = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "\n";
    if (!ok) ++failures;
  };
  auto guarded = [&](const std::string& name, auto&& fn) {
    bool ok = false;
    try {
      ok = fn();
    } catch (const std::exception& err) {
      std::cout << "      (" << name << ": " << err.what() << ")\n";
      ok = false;
    }
    report(name, ok);
  };

  guarded("self-concordance inequality (100 probes)", [&] {
    for (int probe = 0; probe < 100; ++probe) {
      VectorXd x(3), h(3), k(3);
      for (int j = 0; j < 3; ++j) {
        x[j] = rng.normal();
        h[j] = rng.normal();
        k[j] = rng.normal();
      }
      if (!gsc::check_gsc_inequality(problem, x, h, k).pass) return false;
    }
    return true;
  });

  guarded("curvature is positive semidefinite", [&] {
    for (int probe = 0; probe < 10; ++probe) {
      VectorXd x(3), v(3);
      for (int j = 0; j < 3; ++j) {
        x[j] = rng.normal();
        v[j] = rng.normal();
      }
      if (v.dot(problem.loss_hessian_vec(x, v)) < -1e-12) return false;
    }
    return true;
  });

  guarded("hessian equivalence between nearby points", [&] {
    for (int probe = 0; probe < 20; ++probe) {
      VectorXd x(3), h(3);
      for (int j = 0; j < 3; ++j) {
        x[j] = rng.normal();
        h[j] = 0.3 * rng.normal();
      }
      const double t = problem.radius() * h.norm();
      Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> eig(
          problem.hessian_dense(x + h, lambda), problem.hessian_dense(x, lambda),
          Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
      if (eig.info() != Eigen::Success) return false;
      if (eig.eigenvalues().minCoeff() < std::exp(-t) - 1e-9) return false;
      if (eig.eigenvalues().maxCoeff() > std::exp(t) + 1e-9) return false;
    }
    return true;
  });

  guarded("newton decrement contraction in the ellipsoid", [&] {
    // From a point inside D_lambda(1/7), exact steps must contract fast.
    VectorXd x = VectorXd::Zero(3);
    for (int s = 0; s < 50; ++s) {
      const VectorXd g = problem.gradient(x, lambda);
      const MatrixXd hm = problem.hessian_dense(x, lambda);
      const Eigen::LLT<MatrixXd> llt(hm);
      if (llt.info() != Eigen::Success) return false;
      x -= llt.solve(g);
      if (gsc::dikin_membership(problem, x, lambda, 1.0 / 14.0).member) break;
    }
    const double nu0 = gsc::newton_decrement_exact(problem, x, lambda);
    if (!gsc::dikin_membership(problem, x, lambda, 1.0 / 7.0).member) return true;  // vacuous
    gsc::AnmConfig cfg;
    gsc::Iterate it = gsc::make_iterate(problem, x, lambda);
    for (int t = 1; t <= 3; ++t) {
      it = gsc::anm_step(problem, it, cfg);
      const double nu = gsc::newton_decrement_exact(problem, it.x, lambda);
      if (nu > 1.01 * std::pow(2.0, -(std::pow(2.0, t) - 1.0)) * nu0 + 1e-15) return false;
    }
    return true;
  });

  guarded("objective-gap sandwich at interior points", [&] {
    VectorXd x = VectorXd::Zero(3);
    for (int s = 0; s < 50; ++s) {
      const VectorXd g = problem.gradient(x, lambda);
      const Eigen::LLT<MatrixXd> llt(problem.hessian_dense(x, lambda));
      if (llt.info() != Eigen::Success) return false;
      x -= llt.solve(g);
    }
    for (int probe = 0; probe < 10; ++probe) {
      VectorXd dir(3);
      for (int j = 0; j < 3; ++j) dir[j] = rng.normal();
      dir *= 1e-3;
      const auto rep = gsc::function_gap_bounds_check(problem, x + dir, lambda);
      if (rep.applicable && !rep.pass) return false;
    }
    return true;
  });

  guarded("ellipsoid inclusion when the regularizer shrinks", [&] {
    if (problem.radius() == 0.0) return true;  // quadratic: nothing to shrink
    for (int probe = 0; probe < 20; ++probe) {
      const double mu = std::pow(10.0, rng.uniform(-3.0, 0.0));
      const double c = rng.uniform(0.1, 0.8);
      VectorXd x = VectorXd::Zero(3);
      for (int s = 0; s < 30; ++s) {
        const VectorXd g = problem.gradient(x, mu);
        const Eigen::LLT<MatrixXd> llt(problem.hessian_dense(x, mu));
        if (llt.info() != Eigen::Success) return false;
        x -= llt.solve(g);
      }
      const double s_term = 1.0 + problem.radius() * x.norm() / c;
      const double q = rng.uniform(1.0 - 2.0 / (3.0 * s_term), 1.0 - 1e-6);
      const auto rep = gsc::next_mu_inclusion_check(problem, x, mu, c, q);
      if (rep.applicable && !rep.pass) return false;
    }
    return true;
  });

  std::cout << (failures == 0 ? "all diagnostics passed" : "diagnostics failed") << "\n";
  return failures == 0 ? kExitOk : kExitDiagnostic;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Second-order solver for regularized generalized self-concordant losses"};
  app.require_subcommand(1);
  RunSpec spec;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--data", spec.data_path, "dataset path (libsvm or csv)");
    cmd->add_option("--format", spec.format, "libsvm|csv|auto")->default_str("auto");
    cmd->add_option("--label-column", spec.label_column, "csv label column name");
    cmd->add_option("--synth", spec.synth,
                    "synthetic spec, e.g. logistic:n=2000,d=20 or two_moons:n=500,noise=0.1");
    cmd->add_flag("--standardize", spec.standardize_data, "subtract mean, divide by std");
    cmd->add_option("--loss", spec.loss, "logistic|squared|robust|softmax");
    cmd->add_option("--classes", spec.classes, "softmax class count");
    cmd->add_option("--seed", spec.seed, "RNG seed");
    cmd->add_option("--out", spec.out_prefix, "output path prefix");
  };
  auto add_solver = [&](CLI::App* cmd) {
    cmd->add_option("--lambda", spec.lambda, "target regularization");
    cmd->add_option("--eps", spec.epsilon, "target objective gap");
    cmd->add_option("--rho", spec.rho, "relative solve tolerance, at most 1/7")
        ->check(CLI::Range(1e-12, 1.0 / 7.0));
    cmd->add_option("--t", spec.t, "inner Newton steps per mu");
    cmd->add_option("--q-rule", spec.q_rule, "adaptive|variant|fixed");
    cmd->add_option("--q", spec.fixed_q, "fixed q value in (0,1)");
    cmd->add_flag("--certified", spec.certified, "self-stopping final phase");
    cmd->add_option("--max-outer", spec.max_outer, "outer iteration cap (0 = auto)");
    cmd->add_option("--solver", spec.solver, "exact|pcg|auto");
    cmd->add_option("--kernel", spec.kernel, "gaussian|linear (enables the kernel path)");
    cmd->add_option("--sigma", spec.sigma, "gaussian kernel width");
    cmd->add_option("--centers", spec.centers, "Nystrom centers M");
    cmd->add_option("--subsamples", spec.subsamples, "preconditioner subsamples Q");
    cmd->add_option("--tau", spec.tau, "PCG iterations per Newton step");
    cmd->add_option("--center-sampling", spec.center_sampling, "uniform|leverage");
    cmd->add_option("--precond-sampling", spec.precond_sampling, "uniform|leverage");
    cmd->add_option("--preset", spec.preset, "named parameter preset (susy)");
  };

  auto* fit = app.add_subcommand("fit", "fit a model and write model/trace/summary");
  add_common(fit);
  add_solver(fit);

  auto* predict = app.add_subcommand("predict", "score a dataset with a fitted model");
  add_common(predict);
  predict->add_option("--model", spec.model_path, "model file (.bin) or weight file (.txt)");

  auto* bench = app.add_subcommand("bench", "second-order vs first-order comparison");
  add_common(bench);
  add_solver(bench);
  bench->add_option("--baseline", spec.baseline, "svrg|katyusha");
  bench->add_option("--batch", spec.batch, "baseline mini-batch size");
  bench->add_option("--epochs", spec.epochs, "baseline epochs");
  bench->add_option("--step-size", spec.step_size, "baseline step size (0 = 1/(3L))");
  bench->add_option("--sweep-lambdas", spec.sweep_lambdas, "comma list: test error vs lambda");
  bench->add_option("--test-fraction", spec.test_fraction, "held-out fraction for sweeps");

  auto* diagnose = app.add_subcommand("diagnose", "dense diagnostic suite on a fixture");
  add_common(diagnose);
  diagnose->add_flag("--inject-bug", spec.inject_bug, "flip the curvature sign (harness self-test)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*fit) {
      spec.subcommand = "fit";
      return run_fit(spec);
    }
    if (*predict) {
      spec.subcommand = "predict";
      return run_predict(spec);
    }
    if (*bench) {
      spec.subcommand = "bench";
      return run_bench(spec);
    }
    spec.subcommand = "diagnose";
    return run_diagnose(spec);
  } catch (const gsc::ParseError& err) {
    std::cerr << "data error: " << err.what() << "\n";
    return kExitData;
  } catch (const gsc::CapacityError& err) {
    std::cerr << "data error: " << err.what() << "\n";
    return kExitData;
  } catch (const gsc::DomainError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const gsc::DimensionError& err) {
    std::cerr << "data error: " << err.what() << "\n";
    return kExitData;
  } catch (const gsc::NumericalError& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return kExitNumerical;
  } catch (const gsc::SingularError& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return kExitNumerical;
  } catch (const gsc::Error& err) {
    std::cerr << "data error: " << err.what() << "\n";
    return kExitData;
  }
}
