#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cascade/gnn.hpp"
#include "cascade/kernels.hpp"
#include "cascade/trace.hpp"

namespace cascade::fit {

enum class ClassifierMode { Identity, KMeans, Pairing };

/**
 * Maps events to edge types: Identity trusts the stored type, KMeans assigns
 * the nearest centroid over concatenated (xu, xv), Pairing feeds a per-node
 * scorer through the top-2 pairing function.
 */
struct EdgeClassifier {
  ClassifierMode mode = ClassifierMode::Identity;
  int z_count = 0;
  Eigen::MatrixXd centroids;                       // KMeans: z_count x 2d
  std::shared_ptr<const gnn::NodeScorer> scorer;   // Pairing
};

// Pairing of the top-2 class indices (l1, l2) of a score vector onto
// [M(M-1)]: l1*(M-1) + l2 - 1{l2 > l1}. Exact ties pick the smaller index.
int pairing_theta(const Eigen::Ref<const Eigen::VectorXd>& score);

// Edge type of one event under a classifier.
int classify_event(const EdgeClassifier& clf, const InformationTrace& trace,
                   int index);

// Copy of the traces with every event's edge_type assigned by the classifier.
TraceSet classify_traces(const EdgeClassifier& clf, const TraceSet& traces);

/** Lloyd's algorithm output; objective holds the within-cluster sum of
 * squares after each iteration. */
struct KMeansResult {
  Eigen::MatrixXd centroids;      // k x d
  std::vector<int> assignment;    // one entry per row of X
  std::vector<double> objective;
};

// k-means++ seeding then Lloyd iterations to tol (max centroid shift) or
// max_iter. Deterministic given the seed; throws when X has fewer distinct
// rows than clusters.
KMeansResult kmeans(const Eigen::Ref<const Eigen::MatrixXd>& X, int k,
                    std::uint64_t seed, double tol = 1e-6, int max_iter = 100);

// KMeans classifier over all feature pairs found in the traces.
EdgeClassifier fit_kmeans_classifier(const TraceSet& traces, int z_count,
                                     std::uint64_t seed);

/** Per-class initial distributions; eta_raw keeps the unnormalized
 * source-adjacent counts-per-trace ratio for diagnostics. */
struct InitialEstimate {
  Eigen::MatrixXd eta_hat;  // M x Z, rows normalized
  Eigen::MatrixXd eta_raw;  // M x Z
};

// Source-adjacent type counts per class over class trace counts, then row
// normalization. Throws naming any class with zero traces.
InitialEstimate estimate_initial(const TraceSet& traces, int m_count, int z_count);

/** Dirichlet-Categorical transition estimates with their ingredients. */
struct TransitionEstimate {
  std::vector<Eigen::MatrixXd> alpha_hat;       // alpha_hat[m]: Z x Z rows normalized
  Eigen::MatrixXd theta;                        // (m, i) per-row prior weights
  std::vector<Eigen::MatrixXd> n_ij;            // n_ij[m]: Z x Z transition counts
  Eigen::MatrixXd n_i;                          // (m, i) outgoing-transition totals
  std::vector<std::pair<int, int>> uniform_rows;  // (m, i) rows defaulted to uniform
  double s = 0.0;
};

// alpha_hat_m(j|i) proportional to N_ij + s * theta_i^(m), rows renormalized;
// theta_i^(m) is the per-trace frequency of state i in class-m traces. Rows
// with N_i = 0 and s = 0 become uniform and are flagged in uniform_rows.
TransitionEstimate estimate_transitions_dcb(const TraceSet& traces, int m_count,
                                            int z_count, double s);

enum class PriorMode { Uniform, Empirical };

struct FitConfig {
  ClassifierMode mode = ClassifierMode::Identity;
  int m_count = 0;   // 0: infer from labels
  int z_count = 0;   // 0: infer (Identity: max type + 1; Pairing: M(M-1));
                     // required for KMeans
  double s = -1.0;   // pseudo-count; negative selects the default |Z|
  PriorMode priors = PriorMode::Uniform;
  std::shared_ptr<const gnn::NodeScorer> scorer;  // Pairing mode input
  std::uint64_t seed = 0;                         // KMeans seeding
};

/** Offline pipeline output; model_set loads straight into the sequential
 * rules. */
struct FitResult {
  EdgeClassifier classifier;
  kernels::ModelSet model_set;
  InitialEstimate initial;
  TransitionEstimate transitions;
  double s = 0.0;
};

// Classify edges, then estimate initial and transition probabilities.
FitResult fit_offline(const TraceSet& traces, const FitConfig& cfg);

// Sidecar JSON {"theta","s","counts","classifier"} next to the model file.
void write_fit_sidecar(const FitResult& result, const std::string& path);

// Classifier (mode, z_count, centroids) recovered from a sidecar, for typing
// held-out feature traces. Pairing scorers are not serialized.
EdgeClassifier read_classifier(const std::string& path);

}  // namespace cascade::fit
