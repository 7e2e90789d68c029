#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cascade/kernels.hpp"
#include "cascade/msprt.hpp"
#include "cascade/trace.hpp"

namespace cascade::gnn {

// Scores are clamped here before entering any log, keeping long Monte Carlo
// runs free of -inf while preserving the strictly-positive scorer contract.
inline constexpr double kScoreFloor = 1e-300;

/**
 * Loadable weights of the two-layer scorer: a dense ReLU layer followed by a
 * GIN combine with a single linear read-out. Trainable parameter count is
 * h*(d+1) + h*M + M + 1.
 */
struct GinWeights {
  Eigen::MatrixXd W1;  // h x d
  Eigen::VectorXd b1;  // h
  Eigen::MatrixXd W2;  // M x h
  Eigen::VectorXd b2;  // M
  double epsilon = 0.0;

  int feature_dim() const { return static_cast<int>(W1.cols()); }
  int hidden_dim() const { return static_cast<int>(W1.rows()); }
  int class_count() const { return static_cast<int>(W2.rows()); }
};

// Throw std::invalid_argument on inconsistent shapes.
void validate(const GinWeights& w);

// Weights file: JSON {"d","h","M","epsilon","W1","b1","W2","b2"}.
GinWeights read_gin_weights(const std::string& path);
void write_gin_weights(const GinWeights& w, const std::string& path);

// softmax(W2 * ((1+eps) * relu(W1 x + b1) + relu(W1 parent_x + b1)) + b2);
// the parent term is dropped when no parent has arrived yet.
Eigen::VectorXd gin_forward(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const std::optional<Eigen::VectorXd>& parent_x,
                            const GinWeights& w);

/**
 * Per-node class scorer. Implementations return a strictly positive vector
 * over the M classes for one event of a trace.
 */
class NodeScorer {
 public:
  virtual ~NodeScorer() = default;
  virtual int class_count() const = 0;
  virtual bool needs_features() const { return false; }
  virtual Eigen::VectorXd score(const InformationTrace& trace, int index) const = 0;
};

/** Class-normalized true conditional likelihoods: phi[m] proportional to
 * alpha_m(z | ancestor) (eta_m for source events). */
class OracleScorer final : public NodeScorer {
 public:
  explicit OracleScorer(kernels::ModelSet set);
  int class_count() const override { return set_.m_count(); }
  Eigen::VectorXd score(const InformationTrace& trace, int index) const override;

 private:
  kernels::ModelSet set_;
};

/** Count-estimated conditional class table g(ancestor, z) -> distribution
 * over classes; the in-repo trainable scorer. */
class TabularScorer final : public NodeScorer {
 public:
  // table[anc] is Z x M row-stochastic; anc == Z holds the source row.
  explicit TabularScorer(std::vector<Eigen::MatrixXd> table);
  int class_count() const override;
  Eigen::VectorXd score(const InformationTrace& trace, int index) const override;
  const std::vector<Eigen::MatrixXd>& table() const { return table_; }

 private:
  std::vector<Eigen::MatrixXd> table_;
};

// Add-1-smoothed class-frequency table from labeled typed traces.
TabularScorer fit_tabular_scorer(const TraceSet& traces, int m_count, int z_count);

/** gin_forward applied to the event's concatenated (xu, xv) features, with the
 * parent event's concatenated features as the neighbor term. */
class GinScorer final : public NodeScorer {
 public:
  explicit GinScorer(GinWeights w);
  int class_count() const override { return w_.class_count(); }
  bool needs_features() const override { return true; }
  Eigen::VectorXd score(const InformationTrace& trace, int index) const override;

 private:
  GinWeights w_;
};

/** Running sum of per-node log scores; softmax(log_sums) is the aggregate. */
struct AggregatorState {
  Eigen::VectorXd log_sums;
  int count = 0;
};

AggregatorState init_aggregator(int m_count);

// Adds log(phi) to the sums and returns the normalized aggregate, i.e. the
// product of per-node scores renormalized across classes. Throws on a
// nonpositive entry (scorer contract violation).
Eigen::VectorXd aggregate_step(AggregatorState& state,
                               const Eigen::Ref<const Eigen::VectorXd>& phi);

// The MSPRT stopping rule with the posterior replaced by the aggregate.
// `priors` (default uniform) only seeds trajectory[0] and the forced decision
// of an empty trace; the recursion itself is prior-free.
sdr::SdrOutcome run_gnn_sdr(const InformationTrace& trace, const NodeScorer& scorer,
                            const sdr::SdrConfig& cfg,
                            const Eigen::VectorXd& priors = Eigen::VectorXd());

/** Empirical lower bound of the worst-case ratio between aggregate ratios and
 * true likelihood ratios, with the witness that attains it. */
struct XiEstimate {
  double xi_hat = 1.0;
  int k = -1;          // witness numerator class
  int j = -1;          // witness denominator class
  int sequence = -1;   // witness sampled-sequence ordinal
  int prefix_len = 0;  // witness prefix length
};

// Samples n_sequences traces (labels round-robin, uniform frontier) of length
// max_len and maximizes (Phi_k/Phi_j) / (f_k/f_j) over classes and prefixes.
// Feature-based scorers additionally need `features` to synthesize inputs.
XiEstimate estimate_xi(const NodeScorer& scorer, const kernels::ModelSet& set,
                       int max_len, int n_sequences, std::uint64_t seed,
                       const FeatureSpec* features = nullptr);

}  // namespace cascade::gnn
