#include "cascade/evalbench.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace cascade::bench {

namespace {

constexpr std::uint64_t kFeatureSeedSalt = 0x9e3779b97f4a7c15ULL;

struct LightOutcome {
  int stop_time = 0;
  bool stopped = false;
  int decision = -1;
  bool forced = false;
};

Eigen::VectorXd default_costs(int m) { return Eigen::VectorXd::Constant(m, 1e-3); }

// Deterministic trial fan-out: trial `idx` always runs on seed base_seed+idx,
// whatever the thread count.
std::vector<LightOutcome> run_trials(const kernels::ModelSet& set,
                                     const MonteCarloConfig& cfg,
                                     const RunSpec& spec,
                                     const std::vector<int>& labels,
                                     const Eigen::VectorXd& thresholds_a) {
  RunSpec local = spec;
  local.thresholds_a = thresholds_a;
  const int total = static_cast<int>(labels.size());
  std::vector<LightOutcome> out(total);

  const bool want_features = spec.scorer && spec.scorer->needs_features();
  const FeatureSpec features = want_features
                                   ? (cfg.features ? *cfg.features
                                                   : FeatureSpec::bumps(set.z_count()))
                                   : FeatureSpec{};

  auto work = [&](int begin, int end) {
    for (int idx = begin; idx < end; ++idx) {
      const int k = labels[idx];
      const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(idx);
      InformationTrace trace =
          sample_trace(set.models[k], k, cfg.horizon, cfg.policy, seed);
      if (want_features) attach_features(trace, features, seed ^ kFeatureSeedSalt);
      const sdr::SdrOutcome o = run_rule(trace, set, local, false);
      out[idx] = {o.stop_time, o.stopped, o.decision.value_or(-1), o.forced};
    }
  };

  const int threads = std::clamp(cfg.threads, 1, std::max(1, total));
  if (threads == 1) {
    work(0, total);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const int chunk = (total + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int begin = t * chunk;
    const int end = std::min(total, begin + chunk);
    pool.emplace_back([&, t, begin, end] {
      try {
        work(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<int> per_hypothesis_labels(int m, int trials) {
  std::vector<int> labels(static_cast<std::size_t>(m) * trials);
  for (int k = 0; k < m; ++k)
    std::fill(labels.begin() + static_cast<std::size_t>(k) * trials,
              labels.begin() + static_cast<std::size_t>(k + 1) * trials, k);
  return labels;
}

int argmax_smallest(const Eigen::VectorXd& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = static_cast<int>(i);
  return best;
}

const char* policy_name(FrontierKind kind) {
  switch (kind) {
    case FrontierKind::UniformFrontier: return "uniform";
    case FrontierKind::SpawnProbability: return "spawn";
    case FrontierKind::SinglePath: return "single";
  }
  return "unknown";
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json config_json(const MonteCarloConfig& cfg) {
  nlohmann::json j;
  j["trials_per_hypothesis"] = cfg.trials_per_hypothesis;
  j["horizon"] = cfg.horizon;
  j["base_seed"] = cfg.base_seed;
  j["policy"] = policy_name(cfg.policy.kind);
  if (cfg.policy.kind == FrontierKind::SpawnProbability)
    j["spawn_p"] = cfg.policy.spawn_p;
  j["costs"] = vector_json(cfg.costs);
  j["threads"] = cfg.threads;
  return j;
}

std::ofstream open_out(const std::string& path, const char* what) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(std::string("cannot write ") + what + ": " + path);
  return out;
}

}  // namespace

const char* rule_kind_name(RuleKind kind) {
  switch (kind) {
    case RuleKind::Msprt: return "msprt";
    case RuleKind::NaiveIid: return "naive";
    case RuleKind::SingleChain: return "single-chain";
    case RuleKind::Gnn: return "gnn";
  }
  return "unknown";
}

sdr::SdrOutcome run_rule(const InformationTrace& trace,
                         const kernels::ModelSet& set, const RunSpec& spec,
                         bool record_trajectory) {
  sdr::SdrConfig cfg;
  cfg.thresholds_a = spec.thresholds_a;
  cfg.record_trajectory = record_trajectory;
  switch (spec.kind) {
    case RuleKind::Msprt:
      cfg.rule = sdr::Rule::Markov;
      return sdr::run_sdr(trace, set, cfg);
    case RuleKind::NaiveIid: {
      cfg.rule = sdr::Rule::NaiveIid;
      const Eigen::MatrixXd marginals =
          spec.marginals ? *spec.marginals : sdr::iid_marginals(set);
      return sdr::run_baseline_naive(trace, marginals, set.priors, cfg);
    }
    case RuleKind::SingleChain:
      cfg.rule = sdr::Rule::SingleChain;
      return sdr::run_baseline_single_chain(trace, set, cfg);
    case RuleKind::Gnn:
      if (!spec.scorer) throw std::invalid_argument("gnn rule requires a scorer");
      return gnn::run_gnn_sdr(trace, *spec.scorer, cfg, set.priors);
  }
  throw std::logic_error("unknown rule kind");
}

RiskReport run_monte_carlo(const kernels::ModelSet& set,
                           const MonteCarloConfig& cfg, const RunSpec& spec) {
  kernels::validate(set);
  const int m = set.m_count();
  const int n = cfg.trials_per_hypothesis;
  if (n < 1 || cfg.horizon < 1)
    throw std::invalid_argument("monte carlo needs trials >= 1 and horizon >= 1");
  sdr::SdrConfig check;
  check.thresholds_a = spec.thresholds_a;
  sdr::validate(check, m);

  const auto outcomes =
      run_trials(set, cfg, spec, per_hypothesis_labels(m, n), spec.thresholds_a);

  RiskReport rep;
  rep.cfg = cfg;
  rep.cfg.costs = cfg.costs.size() == m ? cfg.costs : default_costs(m);
  rep.kind = spec.kind;
  rep.thresholds_a = spec.thresholds_a;
  rep.xi = spec.xi;

  rep.decision_rate = Eigen::MatrixXd::Zero(m, m);
  rep.mean_stop = Eigen::VectorXd::Zero(m);
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < n; ++i) {
      const LightOutcome& o = outcomes[static_cast<std::size_t>(k) * n + i];
      if (o.decision >= 0) rep.decision_rate(k, o.decision) += 1.0;
      rep.mean_stop[k] += o.stop_time;
      if (!o.stopped) ++rep.not_stopped;
    }
    rep.decision_rate.row(k) /= n;
    rep.mean_stop[k] /= n;
  }

  rep.e_hat = Eigen::VectorXd::Zero(m);
  rep.e_sigma = Eigen::VectorXd::Zero(m);
  for (int j = 0; j < m; ++j) {
    double var = 0.0;
    for (int k = 0; k < m; ++k) {
      if (k == j) continue;
      const double p = rep.decision_rate(k, j);
      rep.e_hat[j] += set.priors[k] * p;
      var += set.priors[k] * set.priors[k] * p * (1.0 - p) / n;
    }
    rep.e_sigma[j] = std::sqrt(var);
  }
  rep.error_total = rep.e_hat.sum();
  {
    double var = 0.0;
    for (int k = 0; k < m; ++k) {
      const double p = rep.decision_rate(k, k);
      var += set.priors[k] * set.priors[k] * p * (1.0 - p) / n;
    }
    rep.error_total_sigma = std::sqrt(var);
  }

  rep.weighted_stop = set.priors.cwiseProduct(rep.mean_stop);
  rep.risk = rep.error_total + rep.cfg.costs.dot(rep.weighted_stop);

  const Eigen::VectorXd& a = spec.thresholds_a;
  const bool constant_a = (a.array() == a[0]).all();
  rep.bound_per_class.resize(m);
  if (spec.kind == RuleKind::Gnn) {
    rep.bound_per_class = (a.array() * spec.xi + (spec.xi - 1.0)).matrix();
    rep.bound_total = spec.xi * a.sum() + m * (spec.xi - 1.0);
    if (constant_a) rep.bound_nu = 1.0 - 1.0 / (spec.xi * (1.0 + a[0]));
  } else {
    rep.bound_per_class = set.priors.cwiseProduct(a);
    rep.bound_total = rep.bound_per_class.sum();
    if (constant_a) rep.bound_nu = a[0] / (1.0 + a[0]);
  }
  return rep;
}

RiskReport verify_error_bounds(const kernels::ModelSet& set,
                               const MonteCarloConfig& cfg, const RunSpec& spec) {
  RiskReport rep = run_monte_carlo(set, cfg, spec);
  const int m = set.m_count();
  rep.class_pass.assign(m, true);
  rep.passed = true;
  for (int k = 0; k < m; ++k) {
    rep.class_pass[k] =
        rep.e_hat[k] <= rep.bound_per_class[k] + 3.0 * rep.e_sigma[k];
    rep.passed = rep.passed && rep.class_pass[k];
  }
  const double total_bound =
      rep.bound_nu ? std::min(*rep.bound_nu, rep.bound_total) : rep.bound_total;
  rep.passed = rep.passed &&
               rep.error_total <= total_bound + 3.0 * rep.error_total_sigma;
  return rep;
}

AccuracyCurve accuracy_curve(const kernels::ModelSet& set, const TraceSet& traces,
                             const RunSpec& spec, const std::vector<int>& deadlines) {
  if (traces.empty()) throw std::invalid_argument("accuracy_curve needs traces");
  for (std::size_t i = 1; i < deadlines.size(); ++i)
    if (deadlines[i] <= deadlines[i - 1])
      throw std::invalid_argument("deadlines must be strictly increasing");
  if (deadlines.empty()) throw std::invalid_argument("accuracy_curve needs deadlines");

  AccuracyCurve curve;
  curve.deadlines = deadlines;
  Eigen::VectorXd correct = Eigen::VectorXd::Zero(deadlines.size());
  for (const InformationTrace& trace : traces) {
    const sdr::SdrOutcome o = run_rule(trace, set, spec, true);
    for (std::size_t d = 0; d < deadlines.size(); ++d) {
      int decision;
      if (o.stopped && o.stop_time <= deadlines[d]) {
        decision = *o.decision;
      } else {
        const int at = std::min<int>(deadlines[d],
                                     static_cast<int>(o.trajectory.size()) - 1);
        decision = argmax_smallest(o.trajectory[at]);
      }
      if (decision == trace.label) correct[d] += 1.0;
    }
  }
  curve.accuracy = correct / static_cast<double>(traces.size());
  curve.auc = curve.accuracy.mean();
  return curve;
}

TailReport verify_tail(const kernels::ModelSet& set, int k,
                       const MonteCarloConfig& cfg,
                       const Eigen::Ref<const Eigen::VectorXd>& a) {
  kernels::validate(set);
  const kernels::TailConstants constants = kernels::tail_constants(k, set, a);

  RunSpec spec;
  spec.kind = RuleKind::Msprt;
  spec.thresholds_a = a;
  const int n = cfg.trials_per_hypothesis;
  const auto outcomes =
      run_trials(set, cfg, spec, std::vector<int>(n, k), spec.thresholds_a);

  TailReport rep;
  rep.k = k;
  rep.c1 = constants.c1;
  rep.c2 = constants.c2;
  rep.cfg = cfg;
  rep.cfg.costs = cfg.costs.size() == set.m_count() ? cfg.costs
                                                    : default_costs(set.m_count());
  rep.thresholds_a = a;

  // A trial that never crossed survives every t up to the horizon.
  std::vector<int> stop(n);
  for (int i = 0; i < n; ++i)
    stop[i] = outcomes[i].stopped ? outcomes[i].stop_time : cfg.horizon + 1;

  for (int t = 0;; ++t) {
    const int survivors =
        static_cast<int>(std::count_if(stop.begin(), stop.end(),
                                       [t](int T) { return T > t; }));
    if (survivors == 0 || t > cfg.horizon) break;
    rep.t.push_back(t);
    rep.survivors.push_back(survivors);
    rep.survival.push_back(static_cast<double>(survivors) / n);
  }

  double sum_t = 0.0, sum_y = 0.0, sum_tt = 0.0, sum_ty = 0.0;
  int fit_points = 0;
  for (std::size_t i = 0; i < rep.t.size(); ++i) {
    if (rep.survivors[i] < rep.min_survivors) continue;
    const double bound = rep.c1 * std::exp(-rep.c2 * rep.t[i]);
    if (rep.survival[i] > bound) rep.violations.push_back(rep.t[i]);
    const double y = std::log(rep.survival[i]);
    sum_t += rep.t[i];
    sum_y += y;
    sum_tt += static_cast<double>(rep.t[i]) * rep.t[i];
    sum_ty += rep.t[i] * y;
    ++fit_points;
  }
  if (fit_points >= 2) {
    const double denom = fit_points * sum_tt - sum_t * sum_t;
    rep.fitted_slope = (fit_points * sum_ty - sum_t * sum_y) / denom;
  }
  rep.passed = rep.violations.empty() && fit_points >= 2 &&
               rep.fitted_slope <= -rep.c2 + rep.slope_margin;
  return rep;
}

AsymptoticReport verify_asymptotic(const kernels::ModelSet& set, int k,
                                   const std::vector<double>& a_grid,
                                   const MonteCarloConfig& cfg, double rel_tol) {
  kernels::validate(set);
  const int m = set.m_count();
  if (m < 2) throw std::invalid_argument("asymptotic check needs at least two hypotheses");
  if (a_grid.empty()) throw std::invalid_argument("asymptotic check needs a threshold grid");

  double min_kl = std::numeric_limits<double>::infinity();
  double min_max_chi2 = std::numeric_limits<double>::infinity();
  for (int j = 0; j < m; ++j) {
    if (j == k) continue;
    min_kl = std::min(min_kl, kernels::stationary_kl(k, j, set));
    double max_chi2 = 0.0;
    for (int z = 0; z < set.z_count(); ++z)
      max_chi2 = std::max(max_chi2, kernels::chi_square(k, j, z, set));
    min_max_chi2 = std::min(min_max_chi2, max_chi2);
  }
  if (!(min_kl > 0.0))
    throw std::runtime_error("asymptotic limit undefined: a competing kernel is identical");
  if (std::isinf(min_max_chi2))
    throw std::runtime_error("chi-square finiteness assumption violated for every competitor");

  AsymptoticReport rep;
  rep.k = k;
  rep.a_grid = a_grid;
  rep.limit = 1.0 / min_kl;
  rep.rel_tol = rel_tol;
  rep.cfg = cfg;
  rep.cfg.costs = cfg.costs.size() == m ? cfg.costs : default_costs(m);

  const int n = cfg.trials_per_hypothesis;
  for (std::size_t gi = 0; gi < a_grid.size(); ++gi) {
    const double a = a_grid[gi];
    if (!(a > 0.0 && a < 1.0))
      throw std::invalid_argument("asymptotic grid thresholds must lie in (0, 1)");
    RunSpec spec;
    spec.kind = RuleKind::Msprt;
    spec.thresholds_a = Eigen::VectorXd::Constant(m, a);
    MonteCarloConfig point = cfg;
    point.base_seed = cfg.base_seed + gi * static_cast<std::uint64_t>(n);
    const auto outcomes =
        run_trials(set, point, spec, std::vector<int>(n, k), spec.thresholds_a);

    double mean = 0.0;
    for (const auto& o : outcomes) {
      mean += o.stop_time;
      if (!o.stopped) ++rep.not_stopped;
    }
    mean /= n;
    double var = 0.0;
    for (const auto& o : outcomes) var += (o.stop_time - mean) * (o.stop_time - mean);
    var /= std::max(1, n - 1);

    const double denom = -std::log(a);
    rep.ratio.push_back(mean / denom);
    rep.sigma.push_back(std::sqrt(var / n) / denom);
    rep.distance.push_back(std::abs(rep.ratio.back() - rep.limit));
  }

  rep.monotone = true;
  for (std::size_t i = 1; i < rep.distance.size(); ++i)
    if (rep.distance[i] >
        rep.distance[i - 1] + 3.0 * (rep.sigma[i] + rep.sigma[i - 1]))
      rep.monotone = false;
  const bool end_within =
      rep.distance.back() <= rel_tol * rep.limit;
  const bool closer_than_start =
      rep.distance.size() < 2 || rep.distance.back() < rep.distance.front();
  rep.passed = end_within && closer_than_start;
  return rep;
}

AepReport verify_aep(const kernels::ModelSet& set, int k, int j, int length,
                     const FrontierPolicy& policy, std::uint64_t seed,
                     double rel_tol) {
  kernels::validate(set);
  if (length < 1) throw std::invalid_argument("aep check needs length >= 1");

  AepReport rep;
  rep.k = k;
  rep.j = j;
  rep.length = length;
  rep.policy = policy;
  rep.seed = seed;
  rep.rel_tol = rel_tol;
  rep.target = k == j ? 0.0 : kernels::stationary_kl(k, j, set);

  const InformationTrace trace =
      sample_trace(set.models.at(k), k, length, policy, seed);
  double log_ratio = 0.0;
  rep.running.reserve(length);
  for (const TraceEvent& e : trace.events) {
    const int z = *e.edge_type;
    const int anc = ancestor_type(trace, e.index);
    const double pk = anc == kSourceParent ? set.models[k].eta[z]
                                           : set.models[k].alpha(anc, z);
    const double pj = anc == kSourceParent ? set.models[j].eta[z]
                                           : set.models[j].alpha(anc, z);
    log_ratio += std::log(pk) - std::log(pj);
    rep.running.push_back(log_ratio / (e.index + 1));
  }
  rep.final_value = rep.running.back();
  rep.rel_error = rep.target == 0.0
                      ? std::abs(rep.final_value)
                      : std::abs(rep.final_value - rep.target) / std::abs(rep.target);
  rep.passed = rep.rel_error <= rel_tol;
  return rep;
}

void write_json(const RiskReport& rep, const std::string& path) {
  nlohmann::json j;
  j["report"] = "risk";
  j["rule"] = rule_kind_name(rep.kind);
  j["config"] = config_json(rep.cfg);
  j["thresholds_a"] = vector_json(rep.thresholds_a);
  j["xi"] = rep.xi;
  j["decision_rate"] = matrix_json(rep.decision_rate);
  j["e_hat"] = vector_json(rep.e_hat);
  j["e_sigma"] = vector_json(rep.e_sigma);
  j["error_total"] = rep.error_total;
  j["error_total_sigma"] = rep.error_total_sigma;
  j["mean_stop"] = vector_json(rep.mean_stop);
  j["weighted_stop"] = vector_json(rep.weighted_stop);
  j["risk"] = rep.risk;
  j["bound_per_class"] = vector_json(rep.bound_per_class);
  j["bound_total"] = rep.bound_total;
  if (rep.bound_nu) j["bound_nu"] = *rep.bound_nu;
  j["not_stopped"] = rep.not_stopped;
  if (!rep.class_pass.empty()) {
    j["class_pass"] = rep.class_pass;
    j["passed"] = rep.passed;
  }
  open_out(path, "risk report") << j.dump(2) << "\n";
}

void write_csv(const RiskReport& rep, const std::string& path) {
  auto out = open_out(path, "risk csv");
  out << "class,e_hat,e_sigma,bound,pass\n";
  char buf[64];
  for (Eigen::Index k = 0; k < rep.e_hat.size(); ++k) {
    out << k << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", rep.e_hat[k]);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", rep.e_sigma[k]);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", rep.bound_per_class[k]);
    out << buf << ','
        << (rep.class_pass.empty() || rep.class_pass[k] ? 1 : 0) << "\n";
  }
}

void write_json(const TailReport& rep, const std::string& path) {
  nlohmann::json j;
  j["report"] = "tail";
  j["hypothesis"] = rep.k;
  j["config"] = config_json(rep.cfg);
  j["thresholds_a"] = vector_json(rep.thresholds_a);
  j["c1"] = rep.c1;
  j["c2"] = rep.c2;
  j["t"] = rep.t;
  j["survival"] = rep.survival;
  j["survivors"] = rep.survivors;
  j["violations"] = rep.violations;
  j["min_survivors"] = rep.min_survivors;
  j["fitted_slope"] = rep.fitted_slope;
  j["slope_margin"] = rep.slope_margin;
  j["passed"] = rep.passed;
  open_out(path, "tail report") << j.dump(2) << "\n";
}

void write_csv(const TailReport& rep, const std::string& path) {
  auto out = open_out(path, "tail csv");
  out << "t,survival,bound,survivors\n";
  char buf[64];
  for (std::size_t i = 0; i < rep.t.size(); ++i) {
    out << rep.t[i] << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", rep.survival[i]);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g",
                  rep.c1 * std::exp(-rep.c2 * rep.t[i]));
    out << buf << ',' << rep.survivors[i] << "\n";
  }
}

void write_json(const AsymptoticReport& rep, const std::string& path) {
  nlohmann::json j;
  j["report"] = "asymptotic";
  j["hypothesis"] = rep.k;
  j["config"] = config_json(rep.cfg);
  j["a_grid"] = rep.a_grid;
  j["ratio"] = rep.ratio;
  j["sigma"] = rep.sigma;
  j["distance"] = rep.distance;
  j["limit"] = rep.limit;
  j["rel_tol"] = rep.rel_tol;
  j["monotone"] = rep.monotone;
  j["not_stopped"] = rep.not_stopped;
  j["passed"] = rep.passed;
  open_out(path, "asymptotic report") << j.dump(2) << "\n";
}

void write_csv(const AsymptoticReport& rep, const std::string& path) {
  auto out = open_out(path, "asymptotic csv");
  out << "a,ratio,sigma,distance\n";
  char buf[64];
  for (std::size_t i = 0; i < rep.a_grid.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", rep.a_grid[i]);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", rep.ratio[i]);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", rep.sigma[i]);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", rep.distance[i]);
    out << buf << "\n";
  }
}

void write_json(const AepReport& rep, const std::string& path) {
  nlohmann::json j;
  j["report"] = "aep";
  j["k"] = rep.k;
  j["j"] = rep.j;
  j["length"] = rep.length;
  j["policy"] = policy_name(rep.policy.kind);
  if (rep.policy.kind == FrontierKind::SpawnProbability)
    j["spawn_p"] = rep.policy.spawn_p;
  j["seed"] = rep.seed;
  j["final_value"] = rep.final_value;
  j["target"] = rep.target;
  j["rel_error"] = rep.rel_error;
  j["rel_tol"] = rep.rel_tol;
  j["passed"] = rep.passed;
  open_out(path, "aep report") << j.dump(2) << "\n";
}

void write_csv(const AepReport& rep, const std::string& path) {
  auto out = open_out(path, "aep csv");
  out << "l,value\n";
  char buf[64];
  for (std::size_t i = 0; i < rep.running.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", rep.running[i]);
    out << (i + 1) << ',' << buf << "\n";
  }
}

void write_json(const AccuracyCurve& curve, const std::string& path) {
  nlohmann::json j;
  j["report"] = "accuracy-curve";
  j["deadlines"] = curve.deadlines;
  j["accuracy"] = std::vector<double>(curve.accuracy.data(),
                                      curve.accuracy.data() + curve.accuracy.size());
  j["auc"] = curve.auc;
  open_out(path, "accuracy curve") << j.dump(2) << "\n";
}

void write_csv(const AccuracyCurve& curve, const std::string& path) {
  auto out = open_out(path, "accuracy csv");
  out << "deadline,accuracy\n";
  char buf[64];
  for (std::size_t i = 0; i < curve.deadlines.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", curve.accuracy[i]);
    out << curve.deadlines[i] << ',' << buf << "\n";
  }
}

}  // namespace cascade::bench
