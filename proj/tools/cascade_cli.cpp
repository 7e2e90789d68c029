// Command-line front end: generate | fit | run | sweep | verify.
// Every command is a deterministic function of (config file, flags, seed);
// outputs land under --out together with a manifest recording the effective
// configuration, its hash, and library versions. Exit codes: 0 success,
// 2 validation error, 3 theorem-check failure.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cascade/evalbench.hpp"
#include "cascade/fit.hpp"
#include "cascade/gnn.hpp"
#include "cascade/kernels.hpp"
#include "cascade/msprt.hpp"
#include "cascade/presets.hpp"
#include "cascade/trace.hpp"
#include "cascade/trace_io.hpp"

namespace {

using nlohmann::json;
namespace cas = cascade;

constexpr const char* kCascadeVersion = "1.0.0";
constexpr std::uint64_t kFeatureSeedSalt = 0x9e3779b97f4a7c15ULL;

// ---------------------------------------------------------------------------
// JSON config file support for CLI11: {"generate": {"n": 100, ...}, ...}.
// Explicit command-line flags always win over config-file values.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    return "{}\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    input >> j;
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
  }

  static void collect(const json& j, std::vector<std::string> parents,
                      std::vector<CLI::ConfigItem>& items) {
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      const json& v = it.value();
      if (v.is_object()) {
        auto sub = parents;
        sub.push_back(it.key());
        collect(v, sub, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = it.key();
      if (v.is_array())
        for (const json& e : v) item.inputs.push_back(scalar(e));
      else if (v.is_boolean())
        item.inputs = {v.get<bool>() ? "true" : "false"};
      else
        item.inputs = {scalar(v)};
      items.push_back(std::move(item));
    }
  }
};

// ---------------------------------------------------------------------------
// Small helpers.

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<double> parse_doubles(const std::string& csv, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(flag) + ": cannot parse '" + item +
                                  "' as a number");
    }
  }
  if (out.empty()) throw std::invalid_argument(std::string(flag) + ": empty list");
  return out;
}

std::vector<int> parse_ints(const std::string& csv, const char* flag) {
  std::vector<int> out;
  for (double v : parse_doubles(csv, flag)) {
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
      throw std::invalid_argument(std::string(flag) + ": expected integers");
    out.push_back(i);
  }
  return out;
}

cas::FrontierPolicy parse_policy(const std::string& name, double spawn_p) {
  if (name == "uniform") return cas::FrontierPolicy::uniform_frontier();
  if (name == "single") return cas::FrontierPolicy::single_path();
  if (name == "spawn") return cas::FrontierPolicy::spawn_probability(spawn_p);
  throw std::invalid_argument("--policy must be uniform, single, or spawn (got '" +
                              name + "')");
}

json policy_json(const std::string& name, double spawn_p) {
  json j;
  j["policy"] = name;
  if (name == "spawn") j["spawn_p"] = spawn_p;
  return j;
}

cas::kernels::ModelSet load_model(const std::string& model_file,
                                  const std::string& preset) {
  if (model_file.empty() == preset.empty())
    throw std::invalid_argument("exactly one of --model and --preset is required");
  cas::kernels::ModelSet set = model_file.empty()
                                   ? cas::presets::by_name(preset)
                                   : cas::kernels::read_model_set(model_file);
  cas::kernels::validate(set);
  return set;
}

Eigen::VectorXd parse_per_class(const std::string& csv, int m, const char* flag) {
  const std::vector<double> values = parse_doubles(csv, flag);
  if (values.size() != 1 && static_cast<int>(values.size()) != m)
    throw std::invalid_argument(std::string(flag) +
                                " needs one value or one per hypothesis");
  Eigen::VectorXd a(m);
  for (int i = 0; i < m; ++i)
    a[i] = values.size() == 1 ? values[0] : values[i];
  return a;
}

Eigen::VectorXd parse_thresholds(const std::string& a_csv, int m) {
  return parse_per_class(a_csv, m, "--a");
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const json& config, std::uint64_t seed) {
  json m;
  m["command"] = command;
  m["config"] = config;
  m["config_hash"] = hex64(fnv1a(config.dump()));
  m["seed"] = seed;
  m["versions"] = {
      {"cascade", kCascadeVersion},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                    std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"cli11", CLI11_VERSION},
      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
  };
  std::ofstream out(out_dir + "/manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest under " + out_dir);
  out << m.dump(2) << "\n";
}

std::string prepare_out(const std::string& out_dir) {
  if (out_dir.empty()) throw std::invalid_argument("--out is required");
  std::filesystem::create_directories(out_dir);
  return out_dir;
}

// ---------------------------------------------------------------------------
// Per-subcommand option bags.

struct GenerateOpts {
  std::string out, model, preset, labels, policy = "uniform";
  std::uint64_t seed = 0;
  int n = 100, horizon = 50, feature_dim = 2;
  double spawn_p = 0.5, feature_sigma = 0.25, feature_spread = 3.0;
  bool features = false, csv = false;
};

struct FitOpts {
  std::string out, traces, mode = "identity", priors = "uniform", scorer_file;
  std::uint64_t seed = 0;
  int m = 0, z = 0;
  double s = -1.0;
};

struct RunOpts {
  std::string out, traces, model, preset, rule = "msprt", scorer = "oracle";
  std::string scorer_file, train_traces, a = "0.1";
  std::uint64_t seed = 0;
  bool trajectories = false;
};

struct SweepOpts {
  std::string out, traces, model, preset, rule = "msprt", scorer = "oracle";
  std::string scorer_file, train_traces, a = "0.1", deadlines, a_grid;
  std::string policy = "uniform", costs;
  std::uint64_t seed = 0;
  int trials = 1000, horizon = 200, threads = 1;
  double spawn_p = 0.5;
};

struct VerifyOpts {
  std::string out, theorem, model, preset, rule = "msprt", scorer = "oracle";
  std::string scorer_file, train_traces, a = "0.1";
  std::string a_grid = "1e-1,1e-2,1e-3,1e-4,1e-5,1e-6";
  std::string policy = "uniform", costs;
  std::uint64_t seed = 0;
  int k = 0, j = 1, trials = 2000, horizon = 400, length = 20000, threads = 1;
  int xi_len = 64, xi_sequences = 64, feature_dim = 2;
  double spawn_p = 0.5, rel_tol = -1.0;
  double feature_sigma = 0.25, feature_spread = 3.0;
};

std::shared_ptr<const cas::gnn::NodeScorer> build_scorer(
    const std::string& kind, const cas::kernels::ModelSet& set,
    const std::string& scorer_file, const std::string& train_traces) {
  if (kind == "oracle")
    return std::make_shared<cas::gnn::OracleScorer>(set);
  if (kind == "gin") {
    if (scorer_file.empty())
      throw std::invalid_argument("--scorer gin requires --scorer-file");
    return std::make_shared<cas::gnn::GinScorer>(
        cas::gnn::read_gin_weights(scorer_file));
  }
  if (kind == "tabular") {
    if (train_traces.empty())
      throw std::invalid_argument("--scorer tabular requires --train-traces");
    return std::make_shared<cas::gnn::TabularScorer>(cas::gnn::fit_tabular_scorer(
        cas::read_traces(train_traces), set.m_count(), set.z_count()));
  }
  throw std::invalid_argument("--scorer must be oracle, gin, or tabular (got '" +
                              kind + "')");
}

cas::bench::RuleKind parse_rule(const std::string& rule) {
  if (rule == "msprt") return cas::bench::RuleKind::Msprt;
  if (rule == "naive") return cas::bench::RuleKind::NaiveIid;
  if (rule == "single-chain") return cas::bench::RuleKind::SingleChain;
  if (rule == "gnn") return cas::bench::RuleKind::Gnn;
  throw std::invalid_argument(
      "--rule must be msprt, naive, single-chain, or gnn (got '" + rule + "')");
}

// ---------------------------------------------------------------------------
// Subcommand bodies. Each returns the process exit code.

int cmd_generate(const GenerateOpts& o) {
  const std::string out = prepare_out(o.out);
  const cas::kernels::ModelSet set = load_model(o.model, o.preset);
  if (o.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (o.n < 1) throw std::invalid_argument("--n must be >= 1");
  const cas::FrontierPolicy policy = parse_policy(o.policy, o.spawn_p);

  std::vector<int> labels;
  if (o.labels.empty())
    for (int m = 0; m < set.m_count(); ++m) labels.push_back(m);
  else
    labels = parse_ints(o.labels, "--labels");
  for (int label : labels)
    if (label < 0 || label >= set.m_count())
      throw std::invalid_argument("--labels entries must name hypotheses in [0, " +
                                  std::to_string(set.m_count()) + ")");

  const cas::FeatureSpec spec = cas::FeatureSpec::bumps(
      set.z_count(), o.feature_dim, o.feature_spread, o.feature_sigma);
  cas::TraceSet traces;
  traces.reserve(labels.size() * static_cast<std::size_t>(o.n));
  std::uint64_t idx = 0;
  for (int label : labels)
    for (int i = 0; i < o.n; ++i, ++idx) {
      const std::uint64_t trace_seed = o.seed + idx;
      cas::InformationTrace trace =
          cas::sample_trace(set.models[label], label, o.horizon, policy, trace_seed);
      if (o.features) cas::attach_features(trace, spec, trace_seed ^ kFeatureSeedSalt);
      traces.push_back(std::move(trace));
    }

  cas::write_traces(traces, out + "/traces.jsonl");
  if (o.csv) cas::write_traces_csv(traces, out + "/traces.csv");
  cas::kernels::write_model_set(set, out + "/model.json");

  json cfg = policy_json(o.policy, o.spawn_p);
  cfg["model"] = o.model.empty() ? json(nullptr) : json(o.model);
  cfg["preset"] = o.preset.empty() ? json(nullptr) : json(o.preset);
  cfg["n"] = o.n;
  cfg["labels"] = labels;
  cfg["horizon"] = o.horizon;
  cfg["features"] = o.features;
  if (o.features) {
    cfg["feature_dim"] = o.feature_dim;
    cfg["feature_sigma"] = o.feature_sigma;
    cfg["feature_spread"] = o.feature_spread;
  }
  cfg["csv"] = o.csv;
  write_manifest(out, "generate", cfg, o.seed);
  std::cout << "wrote " << traces.size() << " traces to " << out << "/traces.jsonl\n";
  return 0;
}

int cmd_fit(const FitOpts& o) {
  const std::string out = prepare_out(o.out);
  if (o.traces.empty()) throw std::invalid_argument("--traces is required");
  const cas::TraceSet traces = cas::read_traces(o.traces);

  cas::fit::FitConfig fc;
  if (o.mode == "identity")
    fc.mode = cas::fit::ClassifierMode::Identity;
  else if (o.mode == "kmeans")
    fc.mode = cas::fit::ClassifierMode::KMeans;
  else if (o.mode == "pairing")
    fc.mode = cas::fit::ClassifierMode::Pairing;
  else
    throw std::invalid_argument(
        "--mode must be identity, kmeans, or pairing (got '" + o.mode + "')");
  if (o.priors == "uniform")
    fc.priors = cas::fit::PriorMode::Uniform;
  else if (o.priors == "empirical")
    fc.priors = cas::fit::PriorMode::Empirical;
  else
    throw std::invalid_argument("--priors must be uniform or empirical (got '" +
                                o.priors + "')");
  fc.m_count = o.m;
  fc.z_count = o.z;
  fc.s = o.s;
  fc.seed = o.seed;
  if (fc.mode == cas::fit::ClassifierMode::Pairing) {
    if (o.scorer_file.empty())
      throw std::invalid_argument("--mode pairing requires --scorer-file");
    fc.scorer = std::make_shared<cas::gnn::GinScorer>(
        cas::gnn::read_gin_weights(o.scorer_file));
  }

  const cas::fit::FitResult result = cas::fit::fit_offline(traces, fc);
  cas::kernels::write_model_set(result.model_set, out + "/model.json");
  cas::fit::write_fit_sidecar(result, out + "/fit.json");

  json cfg;
  cfg["traces"] = o.traces;
  cfg["mode"] = o.mode;
  cfg["m"] = o.m;
  cfg["z"] = o.z;
  cfg["s"] = result.s;
  cfg["priors"] = o.priors;
  if (!o.scorer_file.empty()) cfg["scorer_file"] = o.scorer_file;
  write_manifest(out, "fit", cfg, o.seed);
  std::cout << "fitted " << result.model_set.m_count() << "-hypothesis model over "
            << result.model_set.z_count() << " edge types -> " << out
            << "/model.json\n";
  return 0;
}

int cmd_run(const RunOpts& o) {
  const std::string out = prepare_out(o.out);
  if (o.traces.empty()) throw std::invalid_argument("--traces is required");
  const cas::kernels::ModelSet set = load_model(o.model, o.preset);
  const cas::TraceSet traces = cas::read_traces(o.traces);

  cas::bench::RunSpec spec;
  spec.kind = parse_rule(o.rule);
  spec.thresholds_a = parse_thresholds(o.a, set.m_count());
  if (spec.kind == cas::bench::RuleKind::Gnn)
    spec.scorer = build_scorer(o.scorer, set, o.scorer_file, o.train_traces);

  std::vector<cas::sdr::SdrOutcome> outcomes;
  outcomes.reserve(traces.size());
  for (const cas::InformationTrace& trace : traces)
    outcomes.push_back(cas::bench::run_rule(trace, set, spec, o.trajectories));

  const std::string rule_label = cas::bench::rule_kind_name(spec.kind);
  cas::sdr::write_outcomes_csv(traces, outcomes, rule_label, out + "/outcomes.csv");
  if (o.trajectories)
    cas::sdr::write_trajectories_json(traces, outcomes, rule_label,
                                      out + "/trajectories.json");

  json cfg;
  cfg["traces"] = o.traces;
  cfg["model"] = o.model.empty() ? json(nullptr) : json(o.model);
  cfg["preset"] = o.preset.empty() ? json(nullptr) : json(o.preset);
  cfg["rule"] = o.rule;
  if (spec.kind == cas::bench::RuleKind::Gnn) cfg["scorer"] = o.scorer;
  cfg["a"] = o.a;
  cfg["trajectories"] = o.trajectories;
  write_manifest(out, "run", cfg, o.seed);

  int correct = 0;
  for (std::size_t i = 0; i < traces.size(); ++i)
    if (outcomes[i].decision && *outcomes[i].decision == traces[i].label) ++correct;
  std::cout << rule_label << ": " << correct << "/" << traces.size()
            << " correct -> " << out << "/outcomes.csv\n";
  return 0;
}

int cmd_sweep(const SweepOpts& o) {
  const std::string out = prepare_out(o.out);
  const cas::kernels::ModelSet set = load_model(o.model, o.preset);
  if (o.deadlines.empty() == o.a_grid.empty())
    throw std::invalid_argument("exactly one of --deadlines and --a-grid is required");

  cas::bench::RunSpec spec;
  spec.kind = parse_rule(o.rule);
  spec.thresholds_a = parse_thresholds(o.a, set.m_count());
  if (spec.kind == cas::bench::RuleKind::Gnn)
    spec.scorer = build_scorer(o.scorer, set, o.scorer_file, o.train_traces);

  json cfg;
  cfg["model"] = o.model.empty() ? json(nullptr) : json(o.model);
  cfg["preset"] = o.preset.empty() ? json(nullptr) : json(o.preset);
  cfg["rule"] = o.rule;
  cfg["a"] = o.a;

  if (!o.deadlines.empty()) {
    if (o.traces.empty())
      throw std::invalid_argument("--deadlines mode requires --traces");
    const cas::TraceSet traces = cas::read_traces(o.traces);
    const std::vector<int> deadlines = parse_ints(o.deadlines, "--deadlines");
    const cas::bench::AccuracyCurve curve =
        cas::bench::accuracy_curve(set, traces, spec, deadlines);
    cas::bench::write_csv(curve, out + "/curve.csv");
    cas::bench::write_json(curve, out + "/sweep.json");
    cfg["traces"] = o.traces;
    cfg["deadlines"] = deadlines;
    write_manifest(out, "sweep", cfg, o.seed);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", curve.auc);
    std::cout << "accuracy curve over " << deadlines.size() << " deadlines (auc "
              << buf << ") -> " << out << "/curve.csv\n";
    return 0;
  }

  const std::vector<double> grid = parse_doubles(o.a_grid, "--a-grid");
  cas::bench::MonteCarloConfig mc;
  mc.trials_per_hypothesis = o.trials;
  mc.horizon = o.horizon;
  mc.base_seed = o.seed;
  mc.policy = parse_policy(o.policy, o.spawn_p);
  mc.threads = o.threads;
  if (!o.costs.empty()) mc.costs = parse_per_class(o.costs, set.m_count(), "--costs");

  json rows = json::array();
  std::ofstream csv(out + "/curve.csv");
  if (!csv) throw std::runtime_error("cannot write " + out + "/curve.csv");
  csv << "a,error_total,error_total_sigma,weighted_stop,risk,not_stopped\n";
  char buf[64];
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    cas::bench::RunSpec point = spec;
    point.thresholds_a = Eigen::VectorXd::Constant(set.m_count(), grid[gi]);
    cas::bench::MonteCarloConfig pc = mc;
    pc.base_seed = mc.base_seed +
                   gi * static_cast<std::uint64_t>(o.trials) * set.m_count();
    const cas::bench::RiskReport rep = cas::bench::run_monte_carlo(set, pc, point);
    const double stop = rep.weighted_stop.sum();
    json row;
    row["a"] = grid[gi];
    row["error_total"] = rep.error_total;
    row["error_total_sigma"] = rep.error_total_sigma;
    row["weighted_stop"] = stop;
    row["risk"] = rep.risk;
    row["not_stopped"] = rep.not_stopped;
    rows.push_back(row);
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g", rep.error_total,
                  rep.error_total_sigma, stop, rep.risk);
    csv << grid[gi] << ',' << buf << ',' << rep.not_stopped << "\n";
  }
  json sweep;
  sweep["report"] = "threshold-sweep";
  sweep["rows"] = rows;
  std::ofstream sj(out + "/sweep.json");
  if (!sj) throw std::runtime_error("cannot write " + out + "/sweep.json");
  sj << sweep.dump(2) << "\n";

  cfg["a_grid"] = grid;
  cfg["trials"] = o.trials;
  cfg["horizon"] = o.horizon;
  cfg.update(policy_json(o.policy, o.spawn_p));
  cfg["threads"] = o.threads;
  write_manifest(out, "sweep", cfg, o.seed);
  std::cout << "risk sweep over " << grid.size() << " thresholds -> " << out
            << "/curve.csv\n";
  return 0;
}

int cmd_verify(const VerifyOpts& o) {
  const std::string out = prepare_out(o.out);
  const cas::kernels::ModelSet set = load_model(o.model, o.preset);
  const int m = set.m_count();
  if (o.k < 0 || o.k >= m)
    throw std::invalid_argument("--k must name a hypothesis in [0, " +
                                std::to_string(m) + ")");

  cas::bench::MonteCarloConfig mc;
  mc.trials_per_hypothesis = o.trials;
  mc.horizon = o.horizon;
  mc.base_seed = o.seed;
  mc.policy = parse_policy(o.policy, o.spawn_p);
  mc.threads = o.threads;
  if (!o.costs.empty()) mc.costs = parse_per_class(o.costs, m, "--costs");

  json cfg;
  cfg["theorem"] = o.theorem;
  cfg["model"] = o.model.empty() ? json(nullptr) : json(o.model);
  cfg["preset"] = o.preset.empty() ? json(nullptr) : json(o.preset);
  cfg["k"] = o.k;
  cfg["trials"] = o.trials;
  cfg["horizon"] = o.horizon;
  cfg.update(policy_json(o.policy, o.spawn_p));
  cfg["threads"] = o.threads;

  bool passed = false;
  std::string detail;
  char buf[160];

  if (o.theorem == "error-bounds") {
    cas::bench::RunSpec spec;
    spec.kind = parse_rule(o.rule);
    if (spec.kind != cas::bench::RuleKind::Msprt &&
        spec.kind != cas::bench::RuleKind::Gnn)
      throw std::invalid_argument("error-bounds verifies rule msprt or gnn");
    spec.thresholds_a = parse_thresholds(o.a, m);
    if (spec.kind == cas::bench::RuleKind::Gnn) {
      spec.scorer = build_scorer(o.scorer, set, o.scorer_file, o.train_traces);
      const cas::FeatureSpec fs = cas::FeatureSpec::bumps(
          set.z_count(), o.feature_dim, o.feature_spread, o.feature_sigma);
      const bool wants = spec.scorer->needs_features();
      const cas::gnn::XiEstimate xi =
          cas::gnn::estimate_xi(*spec.scorer, set, o.xi_len, o.xi_sequences,
                                o.seed, wants ? &fs : nullptr);
      spec.xi = xi.xi_hat;
      cfg["xi_hat"] = xi.xi_hat;
    }
    cfg["rule"] = o.rule;
    cfg["a"] = o.a;
    const cas::bench::RiskReport rep =
        cas::bench::verify_error_bounds(set, mc, spec);
    cas::bench::write_json(rep, out + "/report.json");
    cas::bench::write_csv(rep, out + "/report.csv");
    passed = rep.passed;
    std::snprintf(buf, sizeof(buf), "total error %.5f vs bound %.5f",
                  rep.error_total,
                  rep.bound_nu ? std::min(*rep.bound_nu, rep.bound_total)
                               : rep.bound_total);
    detail = buf;
  } else if (o.theorem == "tail") {
    const Eigen::VectorXd a = parse_thresholds(o.a, m);
    cfg["a"] = o.a;
    const cas::bench::TailReport rep = cas::bench::verify_tail(set, o.k, mc, a);
    cas::bench::write_json(rep, out + "/report.json");
    cas::bench::write_csv(rep, out + "/report.csv");
    passed = rep.passed;
    std::snprintf(buf, sizeof(buf),
                  "%zu violations, fitted slope %.4f vs -c2 %.4f",
                  rep.violations.size(), rep.fitted_slope, -rep.c2);
    detail = buf;
  } else if (o.theorem == "asymptotic") {
    const std::vector<double> grid = parse_doubles(o.a_grid, "--a-grid");
    const double rel_tol = o.rel_tol < 0 ? 0.15 : o.rel_tol;
    cfg["a_grid"] = grid;
    cfg["rel_tol"] = rel_tol;
    const cas::bench::AsymptoticReport rep =
        cas::bench::verify_asymptotic(set, o.k, grid, mc, rel_tol);
    cas::bench::write_json(rep, out + "/report.json");
    cas::bench::write_csv(rep, out + "/report.csv");
    passed = rep.passed;
    std::snprintf(buf, sizeof(buf), "final ratio %.4f vs limit %.4f (tol %.0f%%)",
                  rep.ratio.back(), rep.limit, 100.0 * rel_tol);
    detail = buf;
  } else if (o.theorem == "aep") {
    if (o.j < 0 || o.j >= m || o.j == o.k)
      throw std::invalid_argument("--j must name a competing hypothesis");
    const double rel_tol = o.rel_tol < 0 ? 0.02 : o.rel_tol;
    cfg["j"] = o.j;
    cfg["length"] = o.length;
    cfg["rel_tol"] = rel_tol;
    const cas::bench::AepReport rep = cas::bench::verify_aep(
        set, o.k, o.j, o.length, mc.policy, o.seed, rel_tol);
    cas::bench::write_json(rep, out + "/report.json");
    cas::bench::write_csv(rep, out + "/report.csv");
    passed = rep.passed;
    std::snprintf(buf, sizeof(buf), "mean log-ratio %.6f vs divergence %.6f",
                  rep.final_value, rep.target);
    detail = buf;
  } else {
    throw std::invalid_argument(
        "--theorem must be tail, error-bounds, asymptotic, or aep (got '" +
        o.theorem + "')");
  }

  write_manifest(out, "verify", cfg, o.seed);
  std::cout << (passed ? "[PASS] " : "[FAIL] ") << o.theorem << ": " << detail
            << " (report in " << out << "/report.json)\n";
  return passed ? 0 : 3;
}

// ---------------------------------------------------------------------------
// Wiring.

void add_common(CLI::App* sub, std::string& out, std::uint64_t& seed) {
  sub->add_option("--out", out, "output directory (created if absent)")->required();
  sub->add_option("--seed", seed, "base RNG seed (mandatory: no wall-clock default)")
      ->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"information-cascade simulator and sequential classifier bench"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config file; explicit flags override it");

  GenerateOpts g;
  CLI::App* gen = app.add_subcommand("generate", "sample labeled cascade traces");
  add_common(gen, g.out, g.seed);
  gen->add_option("--model", g.model, "model-set JSON file");
  gen->add_option("--preset", g.preset, "bundled model (pair | tri)");
  gen->add_option("--n", g.n, "traces per label");
  gen->add_option("--labels", g.labels, "comma list of labels (default: all)");
  gen->add_option("--horizon", g.horizon, "events per trace");
  gen->add_option("--policy", g.policy, "frontier policy: uniform | single | spawn");
  gen->add_option("--spawn-p", g.spawn_p, "source probability for --policy spawn");
  gen->add_flag("--features", g.features, "attach type-conditional node features");
  gen->add_option("--feature-dim", g.feature_dim, "feature dimension per endpoint");
  gen->add_option("--feature-sigma", g.feature_sigma, "feature noise scale");
  gen->add_option("--feature-spread", g.feature_spread, "feature mean separation");
  gen->add_flag("--csv", g.csv, "also write traces.csv");

  FitOpts f;
  CLI::App* fit = app.add_subcommand("fit", "estimate a model from labeled traces");
  add_common(fit, f.out, f.seed);
  fit->add_option("--traces", f.traces, "training traces (jsonl)")->required();
  fit->add_option("--mode", f.mode, "edge classifier: identity | kmeans | pairing");
  fit->add_option("--m", f.m, "hypothesis count (0: infer from labels)");
  fit->add_option("--z", f.z, "edge-type count (0: infer; kmeans requires it)");
  fit->add_option("--s", f.s, "Dirichlet pseudo-count (negative: default |Z|)");
  fit->add_option("--priors", f.priors, "prior source: uniform | empirical");
  fit->add_option("--scorer-file", f.scorer_file, "GIN weights for --mode pairing");

  RunOpts r;
  CLI::App* run = app.add_subcommand("run", "classify traces sequentially");
  add_common(run, r.out, r.seed);
  run->add_option("--traces", r.traces, "input traces (jsonl)")->required();
  run->add_option("--model", r.model, "model-set JSON file");
  run->add_option("--preset", r.preset, "bundled model (pair | tri)");
  run->add_option("--rule", r.rule, "msprt | naive | single-chain | gnn");
  run->add_option("--scorer", r.scorer, "gnn scorer: oracle | gin | tabular");
  run->add_option("--scorer-file", r.scorer_file, "GIN weights JSON");
  run->add_option("--train-traces", r.train_traces, "fit data for --scorer tabular");
  run->add_option("--a", r.a, "thresholds: scalar or per-hypothesis list");
  run->add_flag("--trajectories", r.trajectories, "also dump belief trajectories");

  SweepOpts s;
  CLI::App* sweep = app.add_subcommand("sweep", "accuracy or risk curves");
  add_common(sweep, s.out, s.seed);
  sweep->add_option("--traces", s.traces, "traces for --deadlines mode");
  sweep->add_option("--model", s.model, "model-set JSON file");
  sweep->add_option("--preset", s.preset, "bundled model (pair | tri)");
  sweep->add_option("--rule", s.rule, "msprt | naive | single-chain | gnn");
  sweep->add_option("--scorer", s.scorer, "gnn scorer: oracle | gin | tabular");
  sweep->add_option("--scorer-file", s.scorer_file, "GIN weights JSON");
  sweep->add_option("--train-traces", s.train_traces, "fit data for tabular scorer");
  sweep->add_option("--a", s.a, "thresholds for --deadlines mode");
  sweep->add_option("--deadlines", s.deadlines, "comma list: accuracy-vs-deadline");
  sweep->add_option("--a-grid", s.a_grid, "comma list: risk-vs-threshold");
  sweep->add_option("--trials", s.trials, "Monte Carlo trials per hypothesis");
  sweep->add_option("--horizon", s.horizon, "events per simulated trace");
  sweep->add_option("--policy", s.policy, "frontier policy: uniform | single | spawn");
  sweep->add_option("--spawn-p", s.spawn_p, "source probability for --policy spawn");
  sweep->add_option("--costs", s.costs, "per-class observation costs");
  sweep->add_option("--threads", s.threads, "worker cap for Monte Carlo");

  VerifyOpts v;
  CLI::App* verify = app.add_subcommand("verify", "empirical theorem checks");
  add_common(verify, v.out, v.seed);
  verify
      ->add_option("--theorem", v.theorem,
                   "tail | error-bounds | asymptotic | aep")
      ->required();
  verify->add_option("--model", v.model, "model-set JSON file");
  verify->add_option("--preset", v.preset, "bundled model (pair | tri)");
  verify->add_option("--k", v.k, "hypothesis under test");
  verify->add_option("--j", v.j, "competing hypothesis (aep)");
  verify->add_option("--rule", v.rule, "error-bounds rule: msprt | gnn");
  verify->add_option("--scorer", v.scorer, "gnn scorer: oracle | gin | tabular");
  verify->add_option("--scorer-file", v.scorer_file, "GIN weights JSON");
  verify->add_option("--train-traces", v.train_traces, "fit data for tabular scorer");
  verify->add_option("--a", v.a, "thresholds (tail, error-bounds)");
  verify->add_option("--a-grid", v.a_grid, "threshold grid (asymptotic)");
  verify->add_option("--trials", v.trials, "Monte Carlo trials per hypothesis");
  verify->add_option("--horizon", v.horizon, "events per simulated trace");
  verify->add_option("--length", v.length, "trace length (aep)");
  verify->add_option("--policy", v.policy, "frontier policy: uniform | single | spawn");
  verify->add_option("--spawn-p", v.spawn_p, "source probability for --policy spawn");
  verify->add_option("--rel-tol", v.rel_tol,
                     "relative tolerance (default 0.15 asymptotic, 0.02 aep)");
  verify->add_option("--costs", v.costs, "per-class observation costs");
  verify->add_option("--threads", v.threads, "worker cap for Monte Carlo");
  verify->add_option("--xi-len", v.xi_len, "sequence length for xi estimation");
  verify->add_option("--xi-sequences", v.xi_sequences, "sequences for xi estimation");
  verify->add_option("--feature-dim", v.feature_dim, "feature dim for gin scorer");
  verify->add_option("--feature-sigma", v.feature_sigma, "feature noise scale");
  verify->add_option("--feature-spread", v.feature_spread, "feature mean separation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_generate(g);
    if (fit->parsed()) return cmd_fit(f);
    if (run->parsed()) return cmd_run(r);
    if (sweep->parsed()) return cmd_sweep(s);
    if (verify->parsed()) return cmd_verify(v);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cerr << "error: no subcommand\n";
  return 2;
}
