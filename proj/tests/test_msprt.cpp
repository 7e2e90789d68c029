#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cascade/msprt.hpp"
#include "cascade/presets.hpp"
#include "cascade/trace.hpp"

using namespace cascade;

namespace {

// Build a trace from (parent, type) pairs.
InformationTrace make_trace(int label, const std::vector<std::pair<int, int>>& ev,
                            std::string id = "t") {
  InformationTrace t;
  t.label = label;
  t.trace_id = std::move(id);
  for (std::size_t i = 0; i < ev.size(); ++i) {
    TraceEvent e;
    e.index = static_cast<int>(i);
    e.parent_index = ev[i].first;
    e.edge_type = ev[i].second;
    t.events.push_back(e);
  }
  return t;
}

sdr::SdrConfig config(double a, int m, bool record = true) {
  sdr::SdrConfig cfg;
  cfg.thresholds_a = Eigen::VectorXd::Constant(m, a);
  cfg.record_trajectory = record;
  return cfg;
}

}  // namespace

TEST_CASE("threshold validation") {
  CHECK_NOTHROW(sdr::validate(config(0.5, 2), 2));
  CHECK_THROWS_AS(sdr::validate(config(0.0, 2), 2), std::invalid_argument);
  CHECK_THROWS_AS(sdr::validate(config(1.0, 2), 2), std::invalid_argument);
  CHECK_THROWS_AS(sdr::validate(config(0.5, 3), 2), std::invalid_argument);
}

TEST_CASE("initial posterior equals the prior") {
  kernels::ModelSet set = presets::three_class_shift();
  set.priors << 0.5, 0.3, 0.2;
  const Eigen::VectorXd p = sdr::posterior(sdr::init_posterior(set));
  CHECK((p - set.priors).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("posterior updates match the hand-computed Bayes chain") {
  const kernels::ModelSet set = presets::two_state_pair();
  sdr::PosteriorState state = sdr::init_posterior(set);
  state.ancestor_types.assign(3, -1);

  const InformationTrace t = make_trace(0, {{-1, 0}, {0, 0}, {1, 0}});
  state = sdr::posterior_step(state, t.events[0], set);
  Eigen::VectorXd p = sdr::posterior(state);
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-14));  // equal initial laws

  state = sdr::posterior_step(state, t.events[1], set);
  p = sdr::posterior(state);
  CHECK(p[0] == doctest::Approx(0.6428571428571429).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(0.35714285714285715).epsilon(1e-14));

  state = sdr::posterior_step(state, t.events[2], set);
  p = sdr::posterior(state);
  CHECK(p[0] == doctest::Approx(0.76415094339622647).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(0.23584905660377356).epsilon(1e-14));
}

TEST_CASE("zero-probability observations exclude a hypothesis for good") {
  kernels::ModelSet set;
  set.priors = Eigen::VectorXd::Constant(2, 0.5);
  kernels::HypothesisModel a, b;
  a.eta = Eigen::Vector2d(0.5, 0.5);
  a.alpha.resize(2, 2);
  a.alpha << 0.0, 1.0, 1.0, 0.0;  // deterministic alternation
  b.eta = Eigen::Vector2d(0.5, 0.5);
  b.alpha = Eigen::MatrixXd::Constant(2, 2, 0.5);
  set.models = {a, b};

  sdr::PosteriorState state = sdr::init_posterior(set);
  state.ancestor_types.assign(3, -1);
  const InformationTrace t = make_trace(1, {{-1, 0}, {0, 0}, {1, 1}});
  state = sdr::posterior_step(state, t.events[0], set);
  // a history the alternating chain cannot produce
  state = sdr::posterior_step(state, t.events[1], set);
  Eigen::VectorXd p = sdr::posterior(state);
  CHECK(p[0] == 0.0);
  CHECK(p[1] == 1.0);
  // even a perfectly matching later observation cannot revive it
  state = sdr::posterior_step(state, t.events[2], set);
  p = sdr::posterior(state);
  CHECK(p[0] == 0.0);
}

TEST_CASE("evidence impossible under every hypothesis throws") {
  kernels::ModelSet set;
  set.priors = Eigen::VectorXd::Constant(2, 0.5);
  kernels::HypothesisModel a;
  a.eta = Eigen::Vector2d(1.0, 0.0);
  a.alpha.resize(2, 2);
  a.alpha << 0.0, 1.0, 1.0, 0.0;
  set.models = {a, a};

  sdr::PosteriorState state = sdr::init_posterior(set);
  state.ancestor_types.assign(2, -1);
  const InformationTrace t = make_trace(0, {{-1, 0}, {0, 0}});
  state = sdr::posterior_step(state, t.events[0], set);
  CHECK_THROWS_WITH_AS(sdr::posterior_step(state, t.events[1], set),
                       doctest::Contains("degenerate evidence"),
                       std::runtime_error);
}

TEST_CASE("events must reference already-observed ancestors") {
  const kernels::ModelSet set = presets::two_state_pair();
  sdr::PosteriorState state = sdr::init_posterior(set);
  state.ancestor_types.assign(2, -1);
  TraceEvent e;
  e.index = 0;
  e.parent_index = 1;  // not yet observed
  e.edge_type = 0;
  CHECK_THROWS_AS(sdr::posterior_step(state, e, set), std::invalid_argument);
}

TEST_CASE("run_sdr stops at the first threshold crossing") {
  const kernels::ModelSet set = presets::two_state_pair();
  // posteriors for class 0: 0.5, 0.643, 0.764, 0.854 against threshold 0.8
  const InformationTrace t = make_trace(0, {{-1, 0}, {0, 0}, {1, 0}, {2, 0}});
  const sdr::SdrOutcome o = sdr::run_sdr(t, set, config(0.25, 2));
  CHECK(o.stopped);
  CHECK_FALSE(o.forced);
  CHECK(o.stop_time == 4);
  REQUIRE(o.decision.has_value());
  CHECK(*o.decision == 0);
  REQUIRE(o.trajectory.size() == 5);
  CHECK(o.trajectory[0][0] == doctest::Approx(0.5));
  CHECK(o.trajectory[4][0] ==
        doctest::Approx(0.85362997658079631).epsilon(1e-14));
}

TEST_CASE("exhausted traces force the maximum-posterior decision") {
  const kernels::ModelSet set = presets::two_state_pair();
  const InformationTrace t = make_trace(0, {{-1, 0}, {0, 0}, {1, 0}, {2, 0}});
  const sdr::SdrOutcome o = sdr::run_sdr(t, set, config(0.01, 2));
  CHECK_FALSE(o.stopped);
  CHECK(o.forced);
  CHECK(o.stop_time == 4);
  REQUIRE(o.decision.has_value());
  CHECK(*o.decision == 0);
}

TEST_CASE("forced ties resolve to the smallest hypothesis index") {
  const kernels::ModelSet set = presets::two_state_pair();
  // equal initial laws keep the posterior at (0.5, 0.5) on source-only traces
  const InformationTrace t = make_trace(1, {{-1, 0}, {-1, 0}});
  const sdr::SdrOutcome o = sdr::run_sdr(t, set, config(0.5, 2));
  CHECK(o.forced);
  CHECK(*o.decision == 0);
}

TEST_CASE("iid marginals are the per-class stationary laws") {
  const kernels::ModelSet set = presets::two_state_pair();
  const Eigen::MatrixXd m = sdr::iid_marginals(set);
  CHECK(m(0, 0) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(m(0, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(m(1, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(m(1, 1) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("naive baseline ignores the tree and multiplies marginals") {
  const kernels::ModelSet set = presets::two_state_pair();
  const InformationTrace t = make_trace(0, {{-1, 0}, {0, 0}});
  const sdr::SdrOutcome o = sdr::run_baseline_naive(
      t, sdr::iid_marginals(set), set.priors, config(0.02, 2));
  REQUIRE(o.trajectory.size() == 3);
  CHECK(o.trajectory[2][0] ==
        doctest::Approx(0.96153846153846156).epsilon(1e-14));
  CHECK(o.trajectory[2][1] ==
        doctest::Approx(0.038461538461538464).epsilon(1e-14));
}

TEST_CASE("single-chain baseline equals the Markov rule on a re-parented copy") {
  const kernels::ModelSet set = presets::two_state_pair();
  const InformationTrace star =
      make_trace(0, {{-1, 0}, {0, 1}, {0, 0}, {0, 0}, {0, 1}});
  InformationTrace chain = star;
  for (std::size_t i = 0; i < chain.events.size(); ++i)
    chain.events[i].parent_index = static_cast<int>(i) - 1;

  const sdr::SdrOutcome a =
      sdr::run_baseline_single_chain(star, set, config(0.1, 2));
  const sdr::SdrOutcome b = sdr::run_sdr(chain, set, config(0.1, 2));
  CHECK(a.stop_time == b.stop_time);
  CHECK(a.stopped == b.stopped);
  CHECK(a.decision == b.decision);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  for (std::size_t i = 0; i < a.trajectory.size(); ++i)
    CHECK((a.trajectory[i] - b.trajectory[i]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("posteriors are equivariant under hypothesis permutation") {
  kernels::ModelSet set = presets::three_class_shift();
  set.priors << 0.5, 0.3, 0.2;
  kernels::ModelSet swapped = set;
  std::swap(swapped.models[0], swapped.models[2]);
  std::swap(swapped.priors[0], swapped.priors[2]);

  const InformationTrace t = sample_trace(set.models[1], 1, 50,
                                          FrontierPolicy::uniform_frontier(), 17);
  sdr::SdrConfig cfg = config(0.001, 3);  // high threshold: never stops
  const sdr::SdrOutcome o = sdr::run_sdr(t, set, cfg);
  const sdr::SdrOutcome s = sdr::run_sdr(t, swapped, cfg);
  REQUIRE(o.trajectory.size() == s.trajectory.size());
  for (std::size_t i = 0; i < o.trajectory.size(); ++i) {
    CHECK(o.trajectory[i][0] == doctest::Approx(s.trajectory[i][2]).epsilon(1e-12));
    CHECK(o.trajectory[i][1] == doctest::Approx(s.trajectory[i][1]).epsilon(1e-12));
    CHECK(o.trajectory[i][2] == doctest::Approx(s.trajectory[i][0]).epsilon(1e-12));
  }
}

TEST_CASE("lowering the threshold never delays the stop") {
  const kernels::ModelSet set = presets::two_state_pair();
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const InformationTrace t = sample_trace(
        set.models[seed % 2], static_cast<int>(seed % 2), 60,
        FrontierPolicy::uniform_frontier(), seed);
    const sdr::SdrOutcome easy = sdr::run_sdr(t, set, config(0.3, 2, false));
    const sdr::SdrOutcome hard = sdr::run_sdr(t, set, config(0.05, 2, false));
    CHECK(easy.stop_time <= hard.stop_time);
  }
}

TEST_CASE("outcome CSV matches the golden layout") {
  const kernels::ModelSet set = presets::two_state_pair();
  const TraceSet traces{
      make_trace(0, {{-1, 0}, {0, 0}, {1, 0}, {2, 0}}, "t0-1"),
      make_trace(1, {{-1, 0}, {-1, 0}}, "t1-2"),
  };
  std::vector<sdr::SdrOutcome> outcomes;
  for (const InformationTrace& t : traces)
    outcomes.push_back(sdr::run_sdr(t, set, config(0.25, 2)));

  const std::string path =
      (std::filesystem::temp_directory_path() / "cascade_outcomes.csv").string();
  sdr::write_outcomes_csv(traces, outcomes, "msprt", path);
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() ==
        "trace_id,rule,stop_time,decision,label,correct,forced\n"
        "t0-1,msprt,4,0,0,1,0\n"
        "t1-2,msprt,2,0,1,0,1\n");
  std::filesystem::remove(path);
}
