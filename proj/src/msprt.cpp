#include "cascade/msprt.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace cascade::sdr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int argmax_smallest(const Eigen::VectorXd& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = static_cast<int>(i);
  return best;
}

// Adds one observation in place; returns false when every hypothesis assigns
// zero probability.
bool step_in_place(PosteriorState& state, const TraceEvent& event,
                   const kernels::ModelSet& set) {
  if (!event.edge_type)
    throw std::invalid_argument("posterior update requires a typed event");
  const int z = *event.edge_type;
  const int z_count = set.z_count();
  if (z < 0 || z >= z_count)
    throw std::invalid_argument("event type outside the model state space");

  int anc = kSourceParent;
  if (event.parent_index != kSourceParent) {
    if (event.parent_index < 0 ||
        event.parent_index >= static_cast<int>(state.ancestor_types.size()) ||
        state.ancestor_types[event.parent_index] < 0)
      throw std::invalid_argument("event ancestor was not observed before the event");
    anc = state.ancestor_types[event.parent_index];
  }

  bool any = false;
  for (int m = 0; m < set.m_count(); ++m) {
    const double p = anc == kSourceParent ? set.models[m].eta[z]
                                          : set.models[m].alpha(anc, z);
    if (p > 0.0) {
      state.log_weights[m] += std::log(p);
      any = true;
    } else {
      state.log_weights[m] = kNegInf;  // hard exclusion
    }
  }
  if (!any) return false;

  if (static_cast<int>(state.ancestor_types.size()) <= event.index)
    state.ancestor_types.resize(event.index + 1, -1);
  state.ancestor_types[event.index] = z;

  // Single running max-shift keeps the weights in range at any length.
  const double shift = state.log_weights.maxCoeff();
  for (Eigen::Index m = 0; m < state.log_weights.size(); ++m)
    if (std::isfinite(state.log_weights[m])) state.log_weights[m] -= shift;
  return true;
}

SdrOutcome run_loop(const InformationTrace& trace, const kernels::ModelSet& set,
                    const SdrConfig& cfg) {
  validate(cfg, set.m_count());
  PosteriorState state = init_posterior(set);
  state.ancestor_types.assign(trace.events.size(), -1);

  SdrOutcome out;
  Eigen::VectorXd post = posterior(state);
  if (cfg.record_trajectory) out.trajectory.push_back(post);

  const Eigen::VectorXd thresholds =
      (1.0 + cfg.thresholds_a.array()).inverse().matrix();

  int step = 0;
  for (const TraceEvent& event : trace.events) {
    if (!step_in_place(state, event, set))
      throw std::runtime_error(
          "degenerate evidence: observation has zero probability under every hypothesis");
    ++step;
    post = posterior(state);
    if (cfg.record_trajectory) out.trajectory.push_back(post);
    for (int m = 0; m < set.m_count(); ++m) {
      if (post[m] >= thresholds[m]) {
        out.stop_time = step;
        out.stopped = true;
        out.decision = argmax_smallest(post);
        return out;
      }
    }
  }
  out.stop_time = step;
  out.stopped = false;
  out.forced = true;
  out.decision = argmax_smallest(post);
  return out;
}

}  // namespace

const char* rule_name(Rule rule) {
  switch (rule) {
    case Rule::Markov: return "msprt";
    case Rule::NaiveIid: return "naive";
    case Rule::SingleChain: return "single-chain";
  }
  return "unknown";
}

void validate(const SdrConfig& cfg, int m_count) {
  if (cfg.thresholds_a.size() != m_count)
    throw std::invalid_argument("thresholds must have one entry per hypothesis");
  for (Eigen::Index i = 0; i < cfg.thresholds_a.size(); ++i)
    if (!(cfg.thresholds_a[i] > 0.0 && cfg.thresholds_a[i] < 1.0))
      throw std::invalid_argument("every threshold a_m must lie in (0, 1)");
}

PosteriorState init_posterior(const kernels::ModelSet& set) {
  PosteriorState state;
  state.log_weights.resize(set.m_count());
  for (int m = 0; m < set.m_count(); ++m)
    state.log_weights[m] =
        set.priors[m] > 0.0 ? std::log(set.priors[m]) : kNegInf;
  return state;
}

Eigen::VectorXd posterior(const PosteriorState& state) {
  const double shift = state.log_weights.maxCoeff();
  Eigen::VectorXd p(state.log_weights.size());
  for (Eigen::Index m = 0; m < p.size(); ++m)
    p[m] = std::isfinite(state.log_weights[m])
               ? std::exp(state.log_weights[m] - shift)
               : 0.0;
  return p / p.sum();
}

PosteriorState posterior_step(PosteriorState state, const TraceEvent& event,
                              const kernels::ModelSet& set) {
  if (!step_in_place(state, event, set))
    throw std::runtime_error(
        "degenerate evidence: observation has zero probability under every hypothesis");
  return state;
}

SdrOutcome run_sdr(const InformationTrace& trace, const kernels::ModelSet& set,
                   const SdrConfig& cfg) {
  return run_loop(trace, set, cfg);
}

SdrOutcome run_baseline_naive(const InformationTrace& trace,
                              const Eigen::Ref<const Eigen::MatrixXd>& marginals,
                              const Eigen::Ref<const Eigen::VectorXd>& priors,
                              const SdrConfig& cfg) {
  // The i.i.d. likelihood is a union-of-chains likelihood whose kernel rows
  // all equal the marginal, so the Markov loop applies unchanged.
  kernels::ModelSet iid;
  iid.priors = priors;
  for (Eigen::Index m = 0; m < marginals.rows(); ++m) {
    kernels::HypothesisModel hm;
    hm.eta = marginals.row(m).transpose();
    hm.alpha = marginals.row(m).replicate(marginals.cols(), 1);
    iid.models.push_back(std::move(hm));
  }
  kernels::validate(iid);
  return run_loop(trace, iid, cfg);
}

SdrOutcome run_baseline_single_chain(const InformationTrace& trace,
                                     const kernels::ModelSet& set,
                                     const SdrConfig& cfg) {
  // Conditioning on the temporal predecessor is the Markov rule on a
  // re-parented copy of the event list.
  InformationTrace chain = trace;
  for (std::size_t i = 0; i < chain.events.size(); ++i)
    chain.events[i].parent_index = static_cast<int>(i) - 1;
  return run_loop(chain, set, cfg);
}

Eigen::MatrixXd iid_marginals(const kernels::ModelSet& set) {
  Eigen::MatrixXd marginals(set.m_count(), set.z_count());
  for (int m = 0; m < set.m_count(); ++m)
    marginals.row(m) =
        kernels::stationary_distribution(set.models[m].alpha).transpose();
  return marginals;
}

void write_outcomes_csv(const TraceSet& traces,
                        const std::vector<SdrOutcome>& outcomes,
                        const std::string& rule, const std::string& path) {
  if (traces.size() != outcomes.size())
    throw std::invalid_argument("traces and outcomes must align");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write outcomes csv: " + path);
  out << "trace_id,rule,stop_time,decision,label,correct,forced\n";
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const SdrOutcome& o = outcomes[i];
    out << traces[i].trace_id << ',' << rule << ',' << o.stop_time << ',';
    if (o.decision) out << *o.decision;
    out << ',' << traces[i].label << ','
        << (o.decision && *o.decision == traces[i].label ? 1 : 0) << ','
        << (o.forced ? 1 : 0) << "\n";
  }
}

void write_trajectories_json(const TraceSet& traces,
                             const std::vector<SdrOutcome>& outcomes,
                             const std::string& rule, const std::string& path) {
  if (traces.size() != outcomes.size())
    throw std::invalid_argument("traces and outcomes must align");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trajectory dump: " + path);
  for (std::size_t i = 0; i < traces.size(); ++i) {
    nlohmann::json j;
    j["trace_id"] = traces[i].trace_id;
    j["rule"] = rule;
    j["stop_time"] = outcomes[i].stop_time;
    j["stopped"] = outcomes[i].stopped;
    auto steps = nlohmann::json::array();
    for (const Eigen::VectorXd& p : outcomes[i].trajectory) {
      auto row = nlohmann::json::array();
      for (Eigen::Index m = 0; m < p.size(); ++m) row.push_back(p[m]);
      steps.push_back(std::move(row));
    }
    j["trajectory"] = std::move(steps);
    out << j.dump() << "\n";
  }
}

}  // namespace cascade::sdr
