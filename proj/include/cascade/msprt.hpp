#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cascade/kernels.hpp"
#include "cascade/trace.hpp"

namespace cascade::sdr {

enum class Rule { Markov, NaiveIid, SingleChain };

const char* rule_name(Rule rule);

struct SdrConfig {
  Eigen::VectorXd thresholds_a;    // size M, each in (0, 1)
  Rule rule = Rule::Markov;
  bool record_trajectory = true;   // keep per-step posteriors in the outcome
};

// Throw std::invalid_argument unless every threshold is strictly inside (0, 1)
// and the size matches m_count.
void validate(const SdrConfig& cfg, int m_count);

/**
 * Running posterior in log space. log_weights holds log(prior) plus the
 * log-likelihood, max-shifted once per step; ancestor_types caches observed
 * types so ancestor lookups stay O(1).
 */
struct PosteriorState {
  Eigen::VectorXd log_weights;
  std::vector<int> ancestor_types;
};

PosteriorState init_posterior(const kernels::ModelSet& set);

// Normalized posterior of a state.
Eigen::VectorXd posterior(const PosteriorState& state);

// One Bayes update. Source events contribute log eta_m(z), all others
// log alpha_m(z | ancestor type). A zero-probability observation under some
// hypothesis excludes it (log 0); under every hypothesis it throws.
PosteriorState posterior_step(PosteriorState state, const TraceEvent& event,
                              const kernels::ModelSet& set);

/** Result of one sequential run. trajectory[l] is the posterior (or aggregate)
 * after l events, so trajectory[0] is the prior. */
struct SdrOutcome {
  int stop_time = 0;             // first crossing step, or the horizon reached
  bool stopped = false;
  std::optional<int> decision;   // argmax at the stop; forced final argmax otherwise
  bool forced = false;           // decision taken because the trace ran out
  std::vector<Eigen::VectorXd> trajectory;
};

// Stop at the first l where some posterior reaches 1/(1 + a_m); ties pick the
// smallest index. When the trace ends first the final argmax is recorded as a
// forced decision.
SdrOutcome run_sdr(const InformationTrace& trace, const kernels::ModelSet& set,
                   const SdrConfig& cfg);

// Same rule with the likelihood replaced by a product of per-hypothesis
// marginal frequencies (every event treated as i.i.d.).
SdrOutcome run_baseline_naive(const InformationTrace& trace,
                              const Eigen::Ref<const Eigen::MatrixXd>& marginals,  // M x Z
                              const Eigen::Ref<const Eigen::VectorXd>& priors,
                              const SdrConfig& cfg);

// Same rule conditioning each event on its temporal predecessor instead of
// its tree ancestor (single-chain reading of the event stream).
SdrOutcome run_baseline_single_chain(const InformationTrace& trace,
                                     const kernels::ModelSet& set,
                                     const SdrConfig& cfg);

// Per-hypothesis stationary distributions, the default i.i.d. marginals for
// the naive baseline.
Eigen::MatrixXd iid_marginals(const kernels::ModelSet& set);

// Outcome rows (trace_id, rule, stop_time, decision, label, correct, forced).
void write_outcomes_csv(const TraceSet& traces,
                        const std::vector<SdrOutcome>& outcomes,
                        const std::string& rule, const std::string& path);

// Optional posterior trajectory dump, one record per trace.
void write_trajectories_json(const TraceSet& traces,
                             const std::vector<SdrOutcome>& outcomes,
                             const std::string& rule, const std::string& path);

}  // namespace cascade::sdr
