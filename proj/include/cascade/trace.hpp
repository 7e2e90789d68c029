#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cascade/kernels.hpp"

namespace cascade {

// Parent sentinel for events whose edge leaves the source.
inline constexpr int kSourceParent = -1;

/**
 * One forwarding event. `parent_index` points at the event whose edge this
 * one extends (its ancestor on the same root-to-leaf path), or kSourceParent.
 */
struct TraceEvent {
  int index = 0;
  int parent_index = kSourceParent;
  std::optional<int> edge_type;           // in [Z] when assigned
  std::optional<Eigen::VectorXd> xu;      // followee features
  std::optional<Eigen::VectorXd> xv;      // follower features
};

bool operator==(const TraceEvent& a, const TraceEvent& b);

/** Ordered event sequence of one message with its class label. */
struct InformationTrace {
  std::string trace_id;
  int label = 0;
  std::vector<TraceEvent> events;
};

bool operator==(const InformationTrace& a, const InformationTrace& b);

using TraceSet = std::vector<InformationTrace>;

// Throw std::invalid_argument when the event list violates the tree contract
// (indices not 0..n-1, parent >= index, or an event with neither type nor
// features).
void validate(const InformationTrace& trace);

// Type of the ancestor observation of event `index`, or kSourceParent when the
// event's edge leaves the source. Requires assigned edge types.
int ancestor_type(const InformationTrace& trace, int index);

enum class FrontierKind { UniformFrontier, SpawnProbability, SinglePath };

/**
 * How the next event picks the path it extends. UniformFrontier draws
 * uniformly from the current leaves plus the source (choosing the source
 * spawns a new path); SpawnProbability spawns from the source with fixed
 * probability p; SinglePath always extends the newest event.
 */
struct FrontierPolicy {
  FrontierKind kind = FrontierKind::UniformFrontier;
  double spawn_p = 0.0;  // SpawnProbability only

  static FrontierPolicy uniform_frontier() { return {FrontierKind::UniformFrontier, 0.0}; }
  static FrontierPolicy spawn_probability(double p);
  static FrontierPolicy single_path() { return {FrontierKind::SinglePath, 0.0}; }
};

// Draw a trace of exactly `horizon` events from one hypothesis. Source edges
// draw their type from eta, all others from alpha conditioned on the ancestor
// type. Identical arguments give bit-identical traces.
InformationTrace sample_trace(const kernels::HypothesisModel& model, int label,
                              int horizon, const FrontierPolicy& policy,
                              std::uint64_t seed);

/**
 * Per-type Gaussian bumps used to synthesize (xu, xv) features for typed
 * events, so that edge classification is learnable at desk scale.
 */
struct FeatureSpec {
  int dim = 2;
  double sigma = 0.25;
  Eigen::MatrixXd mean_u;  // Z x dim
  Eigen::MatrixXd mean_v;  // Z x dim

  // Well-separated default layout: type means on a circle of radius `spread`
  // (dim >= 2) or an evenly spaced line (dim == 1).
  static FeatureSpec bumps(int z_count, int dim = 2, double spread = 3.0,
                           double sigma = 0.25);
};

// Draw features for every typed event of the trace; deterministic in `seed`.
void attach_features(InformationTrace& trace, const FeatureSpec& spec,
                     std::uint64_t seed);

}  // namespace cascade
