#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "cascade/evalbench.hpp"
#include "cascade/gnn.hpp"
#include "cascade/kernels.hpp"
#include "cascade/msprt.hpp"
#include "cascade/presets.hpp"
#include "cascade/trace.hpp"

using namespace cascade;

namespace {

bench::RunSpec msprt_spec(double a, int m) {
  bench::RunSpec spec;
  spec.kind = bench::RuleKind::Msprt;
  spec.thresholds_a = Eigen::VectorXd::Constant(m, a);
  return spec;
}

bench::MonteCarloConfig mc(int trials, int horizon, std::uint64_t seed,
                           int threads = 1) {
  bench::MonteCarloConfig cfg;
  cfg.trials_per_hypothesis = trials;
  cfg.horizon = horizon;
  cfg.base_seed = seed;
  cfg.threads = threads;
  return cfg;
}

int argmax(const Eigen::VectorXd& v) {
  Eigen::Index i = 0;
  v.maxCoeff(&i);
  return static_cast<int>(i);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("run_rule dispatches to the sequential rules") {
  const kernels::ModelSet set = presets::three_class_shift();
  const InformationTrace t = sample_trace(
      set.models[1], 1, 30, FrontierPolicy::uniform_frontier(), 424242);

  const bench::RunSpec spec = msprt_spec(0.1, 3);
  const sdr::SdrOutcome got = bench::run_rule(t, set, spec, true);

  sdr::SdrConfig cfg;
  cfg.thresholds_a = spec.thresholds_a;
  cfg.record_trajectory = true;
  const sdr::SdrOutcome want = sdr::run_sdr(t, set, cfg);
  CHECK(got.stop_time == want.stop_time);
  CHECK(got.stopped == want.stopped);
  CHECK(got.decision == want.decision);
  REQUIRE(got.trajectory.size() == want.trajectory.size());
  for (std::size_t i = 0; i < got.trajectory.size(); ++i)
    CHECK((got.trajectory[i] - want.trajectory[i]).cwiseAbs().maxCoeff() ==
          0.0);

  bench::RunSpec gnn = msprt_spec(0.1, 3);
  gnn.kind = bench::RuleKind::Gnn;
  CHECK_THROWS_WITH_AS(bench::run_rule(t, set, gnn, false),
                       "gnn rule requires a scorer", std::invalid_argument);

  CHECK(std::string(bench::rule_kind_name(bench::RuleKind::Msprt)) == "msprt");
  CHECK(std::string(bench::rule_kind_name(bench::RuleKind::NaiveIid)) ==
        "naive");
  CHECK(std::string(bench::rule_kind_name(bench::RuleKind::SingleChain)) ==
        "single-chain");
  CHECK(std::string(bench::rule_kind_name(bench::RuleKind::Gnn)) == "gnn");
}

TEST_CASE("monte carlo report internals are self-consistent") {
  const kernels::ModelSet set = presets::three_class_shift();
  const bench::RunSpec spec = msprt_spec(0.1, 3);
  const bench::RiskReport rep = bench::run_monte_carlo(set, mc(200, 60, 5), spec);

  for (int k = 0; k < 3; ++k)
    CHECK(rep.decision_rate.row(k).sum() == doctest::Approx(1.0).epsilon(1e-12));

  for (int j = 0; j < 3; ++j) {
    double err = 0.0;
    for (int k = 0; k < 3; ++k)
      if (k != j) err += set.priors[k] * rep.decision_rate(k, j);
    CHECK(rep.e_hat[j] == doctest::Approx(err).epsilon(1e-14));
  }
  CHECK(rep.error_total == doctest::Approx(rep.e_hat.sum()).epsilon(1e-14));
  CHECK((rep.weighted_stop - set.priors.cwiseProduct(rep.mean_stop))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  // Default propagation cost is 1e-3 per class.
  CHECK(rep.risk == doctest::Approx(rep.error_total +
                                    1e-3 * rep.weighted_stop.sum())
                        .epsilon(1e-14));

  CHECK((rep.bound_per_class - set.priors * 0.1).cwiseAbs().maxCoeff() <
        1e-15);
  CHECK(rep.bound_total == doctest::Approx(0.1).epsilon(1e-14));
  REQUIRE(rep.bound_nu.has_value());
  CHECK(*rep.bound_nu == doctest::Approx(0.1 / 1.1).epsilon(1e-14));
  CHECK(rep.kind == bench::RuleKind::Msprt);

  CHECK_THROWS_AS(bench::run_monte_carlo(set, mc(0, 60, 5), spec),
                  std::invalid_argument);
  CHECK_THROWS_AS(bench::run_monte_carlo(set, mc(10, 0, 5), spec),
                  std::invalid_argument);
}

TEST_CASE("monte carlo results do not depend on the thread count") {
  const kernels::ModelSet set = presets::three_class_shift();
  const bench::RunSpec spec = msprt_spec(0.15, 3);
  const bench::RiskReport one = bench::run_monte_carlo(set, mc(120, 50, 9, 1), spec);
  const bench::RiskReport four = bench::run_monte_carlo(set, mc(120, 50, 9, 4), spec);

  CHECK((one.decision_rate - four.decision_rate).cwiseAbs().maxCoeff() == 0.0);
  CHECK((one.e_hat - four.e_hat).cwiseAbs().maxCoeff() == 0.0);
  CHECK((one.mean_stop - four.mean_stop).cwiseAbs().maxCoeff() == 0.0);
  CHECK(one.not_stopped == four.not_stopped);
  CHECK(one.risk == four.risk);
}

TEST_CASE("unreachable thresholds reduce to the prior argmax") {
  // Two identical hypotheses freeze the posterior at the prior, so every
  // trial forces the argmax decision and the total error is the smaller
  // prior mass.
  const kernels::ModelSet pair = presets::two_state_pair();
  kernels::ModelSet set;
  set.priors = Eigen::VectorXd(2);
  set.priors << 0.7, 0.3;
  set.models = {pair.models[0], pair.models[0]};

  const bench::RunSpec spec = msprt_spec(0.01, 2);
  const bench::RiskReport rep = bench::run_monte_carlo(set, mc(50, 20, 3), spec);
  CHECK(rep.decision_rate(0, 0) == 1.0);
  CHECK(rep.decision_rate(1, 0) == 1.0);
  CHECK(rep.error_total == 0.3);
  CHECK(rep.not_stopped == 100);
}

TEST_CASE("error bounds hold for the paired model") {
  const kernels::ModelSet set = presets::two_state_pair();
  const bench::RunSpec spec = msprt_spec(0.2, 2);
  const bench::RiskReport rep =
      bench::verify_error_bounds(set, mc(1500, 400, 21, 2), spec);

  CHECK((rep.bound_per_class - Eigen::Vector2d(0.1, 0.1)).cwiseAbs().maxCoeff() <
        1e-15);
  REQUIRE(rep.bound_nu.has_value());
  CHECK(*rep.bound_nu == doctest::Approx(0.2 / 1.2).epsilon(1e-14));

  REQUIRE(rep.class_pass.size() == 2);
  for (int k = 0; k < 2; ++k) {
    CHECK(rep.class_pass[k]);
    CHECK(rep.e_hat[k] <= rep.bound_per_class[k] + 3.0 * rep.e_sigma[k]);
  }
  CHECK(rep.passed);
  CHECK(rep.not_stopped == 0);
}

TEST_CASE("accuracy curve evaluates forced decisions at each deadline") {
  const kernels::ModelSet set = presets::two_state_pair();
  TraceSet traces;
  for (int m = 0; m < 2; ++m)
    for (int i = 0; i < 40; ++i)
      traces.push_back(sample_trace(set.models[m], m, 30,
                                    FrontierPolicy::uniform_frontier(),
                                    1000 + 40 * m + i));

  const bench::RunSpec spec = msprt_spec(0.1, 2);
  const bench::AccuracyCurve curve =
      bench::accuracy_curve(set, traces, spec, {5, 10, 30});
  REQUIRE(curve.deadlines == std::vector<int>{5, 10, 30});
  REQUIRE(curve.accuracy.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(curve.accuracy[i] >= 0.0);
    CHECK(curve.accuracy[i] <= 1.0);
  }
  CHECK(curve.auc == doctest::Approx(curve.accuracy.mean()).epsilon(1e-14));

  // At a deadline past the horizon the curve equals plain rule accuracy.
  long correct = 0;
  for (const InformationTrace& t : traces) {
    const sdr::SdrOutcome o = bench::run_rule(t, set, spec, true);
    const int predicted =
        (o.stopped && o.stop_time <= 30)
            ? o.decision.value()
            : argmax(o.trajectory[std::min<std::size_t>(
                  30, o.trajectory.size() - 1)]);
    correct += (predicted == t.label);
  }
  CHECK(curve.accuracy[2] ==
        doctest::Approx(static_cast<double>(correct) / traces.size())
            .epsilon(1e-14));

  CHECK_THROWS_AS(bench::accuracy_curve(set, traces, spec, {}),
                  std::invalid_argument);
  CHECK_THROWS_WITH_AS(bench::accuracy_curve(set, traces, spec, {5, 5}),
                       "deadlines must be strictly increasing",
                       std::invalid_argument);
  CHECK_THROWS_AS(bench::accuracy_curve(set, {}, spec, {5}),
                  std::invalid_argument);
}

TEST_CASE("tail decay verification passes on the paired model") {
  const kernels::ModelSet set = presets::two_state_pair();
  const bench::TailReport rep = bench::verify_tail(
      set, 0, mc(2000, 300, 31, 2), Eigen::Vector2d(0.1, 0.1));

  CHECK(rep.k == 0);
  CHECK(rep.c1 == doctest::Approx(std::sqrt(10.0)).epsilon(1e-12));
  CHECK(rep.c2 == doctest::Approx(0.11157177565710491).epsilon(1e-12));

  REQUIRE(!rep.survival.empty());
  CHECK(rep.survival[0] == 1.0);
  for (std::size_t i = 1; i < rep.survival.size(); ++i) {
    CHECK(rep.survival[i] <= rep.survival[i - 1]);
    CHECK(rep.survivors[i] <= rep.survivors[i - 1]);
  }
  CHECK(rep.violations.empty());
  CHECK(rep.fitted_slope <= -rep.c2 + rep.slope_margin);
  CHECK(rep.passed);
}

TEST_CASE("asymptotic report carries the eigen-solved limit") {
  const kernels::ModelSet set = presets::two_state_pair();
  const bench::AsymptoticReport rep = bench::verify_asymptotic(
      set, 0, {0.2, 0.05}, mc(400, 600, 41, 2), 0.15);

  CHECK(rep.limit == doctest::Approx(2.5519462920272051).epsilon(1e-12));
  REQUIRE(rep.ratio.size() == 2);
  REQUIRE(rep.sigma.size() == 2);
  REQUIRE(rep.distance.size() == 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(rep.ratio[i] > 0.0);
    CHECK(rep.sigma[i] > 0.0);
    CHECK(rep.distance[i] ==
          doctest::Approx(std::abs(rep.ratio[i] - rep.limit)).epsilon(1e-14));
  }
  CHECK(rep.not_stopped == 0);

  // Identical kernels make the limit undefined.
  kernels::ModelSet same;
  same.priors = Eigen::VectorXd::Constant(2, 0.5);
  same.models = {set.models[0], set.models[0]};
  CHECK_THROWS_WITH_AS(
      bench::verify_asymptotic(same, 0, {0.1}, mc(10, 50, 1), 0.15),
      "asymptotic limit undefined: a competing kernel is identical",
      std::runtime_error);

  CHECK_THROWS_AS(bench::verify_asymptotic(set, 0, {1.5}, mc(10, 50, 1), 0.15),
                  std::invalid_argument);
  CHECK_THROWS_AS(bench::verify_asymptotic(set, 0, {}, mc(10, 50, 1), 0.15),
                  std::invalid_argument);
}

TEST_CASE("aep log ratios converge on both growth policies") {
  const kernels::ModelSet set = presets::two_state_pair();

  const bench::AepReport chain = bench::verify_aep(
      set, 0, 1, 20000, FrontierPolicy::single_path(), 6, 0.02);
  CHECK(chain.target == doctest::Approx(0.39185777660141269).epsilon(1e-12));
  REQUIRE(static_cast<int>(chain.running.size()) == 20000);
  CHECK(chain.final_value == chain.running.back());
  CHECK(chain.rel_error <= 0.02);
  CHECK(chain.passed);

  const bench::AepReport tree = bench::verify_aep(
      set, 0, 1, 20000, FrontierPolicy::uniform_frontier(), 5, 0.02);
  CHECK(tree.target == doctest::Approx(0.39185777660141269).epsilon(1e-12));
  CHECK(tree.passed);

  // Same hypothesis on both sides: the ratio is identically zero.
  const bench::AepReport self = bench::verify_aep(
      set, 1, 1, 200, FrontierPolicy::single_path(), 9, 0.02);
  CHECK(self.target == 0.0);
  CHECK(self.final_value == 0.0);
  CHECK(self.passed);

  CHECK_THROWS_AS(
      bench::verify_aep(set, 0, 1, 0, FrontierPolicy::single_path(), 1, 0.02),
      std::invalid_argument);
}

TEST_CASE("report files parse back and the curve csv is stable") {
  namespace fs = std::filesystem;
  const fs::path dir = "bench_scratch";
  fs::create_directories(dir);
  const kernels::ModelSet set = presets::two_state_pair();
  const bench::RunSpec spec = msprt_spec(0.2, 2);

  const bench::RiskReport risk =
      bench::verify_error_bounds(set, mc(80, 60, 11), spec);
  bench::write_json(risk, (dir / "risk.json").string());
  bench::write_csv(risk, (dir / "risk.csv").string());
  {
    std::ifstream in(dir / "risk.json");
    const nlohmann::json j = nlohmann::json::parse(in);
    CHECK(j["report"] == "risk");
    CHECK(j["rule"] == "msprt");
    CHECK(j["config"]["trials_per_hypothesis"] == 80);
    CHECK(j.contains("decision_rate"));
    CHECK(j.contains("passed"));
  }
  CHECK(slurp((dir / "risk.csv").string()).rfind("class,e_hat,e_sigma,", 0) ==
        0);

  const bench::TailReport tail =
      bench::verify_tail(set, 0, mc(300, 150, 13), Eigen::Vector2d(0.1, 0.1));
  bench::write_json(tail, (dir / "tail.json").string());
  bench::write_csv(tail, (dir / "tail.csv").string());
  {
    std::ifstream in(dir / "tail.json");
    const nlohmann::json j = nlohmann::json::parse(in);
    CHECK(j["report"] == "tail");
    CHECK(j["c2"].get<double>() > 0.0);
  }

  const bench::AsymptoticReport asym =
      bench::verify_asymptotic(set, 0, {0.2}, mc(100, 300, 15), 0.2);
  bench::write_json(asym, (dir / "asym.json").string());
  bench::write_csv(asym, (dir / "asym.csv").string());
  {
    std::ifstream in(dir / "asym.json");
    const nlohmann::json j = nlohmann::json::parse(in);
    CHECK(j["report"] == "asymptotic");
    CHECK(j["a_grid"].size() == 1);
  }

  const bench::AepReport aep =
      bench::verify_aep(set, 0, 1, 500, FrontierPolicy::single_path(), 3, 0.5);
  bench::write_json(aep, (dir / "aep.json").string());
  bench::write_csv(aep, (dir / "aep.csv").string());
  {
    std::ifstream in(dir / "aep.json");
    const nlohmann::json j = nlohmann::json::parse(in);
    CHECK(j["report"] == "aep");
    CHECK(j["length"] == 500);
  }

  bench::AccuracyCurve curve;
  curve.deadlines = {1, 2};
  curve.accuracy = Eigen::Vector2d(0.5, 1.0);
  curve.auc = 0.75;
  bench::write_json(curve, (dir / "curve.json").string());
  bench::write_csv(curve, (dir / "curve.csv").string());
  CHECK(slurp((dir / "curve.csv").string()) ==
        "deadline,accuracy\n1,0.5\n2,1\n");
  {
    std::ifstream in(dir / "curve.json");
    const nlohmann::json j = nlohmann::json::parse(in);
    CHECK(j["auc"] == 0.75);
  }

  fs::remove_all(dir);
}
