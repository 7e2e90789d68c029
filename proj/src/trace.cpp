#include "cascade/trace.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cascade/rng.hpp"

namespace cascade {

namespace {

bool same_opt_vec(const std::optional<Eigen::VectorXd>& a,
                  const std::optional<Eigen::VectorXd>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->size() == b->size() && (a->array() == b->array()).all();
}

}  // namespace

bool operator==(const TraceEvent& a, const TraceEvent& b) {
  return a.index == b.index && a.parent_index == b.parent_index &&
         a.edge_type == b.edge_type && same_opt_vec(a.xu, b.xu) &&
         same_opt_vec(a.xv, b.xv);
}

bool operator==(const InformationTrace& a, const InformationTrace& b) {
  return a.trace_id == b.trace_id && a.label == b.label && a.events == b.events;
}

void validate(const InformationTrace& trace) {
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const TraceEvent& e = trace.events[i];
    if (e.index != static_cast<int>(i))
      throw std::invalid_argument("trace events must be indexed 0..n-1 in order");
    if (e.parent_index != kSourceParent &&
        (e.parent_index < 0 || e.parent_index >= e.index))
      throw std::invalid_argument("event parent must precede the event or be the source");
    if (!e.edge_type && !(e.xu && e.xv))
      throw std::invalid_argument("event needs an edge type or a feature pair");
  }
}

int ancestor_type(const InformationTrace& trace, int index) {
  const TraceEvent& e = trace.events.at(index);
  if (e.parent_index == kSourceParent) return kSourceParent;
  const auto& t = trace.events.at(e.parent_index).edge_type;
  if (!t) throw std::invalid_argument("ancestor event has no edge type");
  return *t;
}

FrontierPolicy FrontierPolicy::spawn_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("spawn probability must be in [0, 1]");
  return {FrontierKind::SpawnProbability, p};
}

InformationTrace sample_trace(const kernels::HypothesisModel& model, int label,
                              int horizon, const FrontierPolicy& policy,
                              std::uint64_t seed) {
  kernels::validate(model);
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");

  Rng rng(seed);
  InformationTrace trace;
  {
    std::ostringstream id;
    id << "t" << label << "-" << seed;
    trace.trace_id = id.str();
  }
  trace.label = label;
  trace.events.reserve(horizon);

  std::vector<int> leaves;  // events with no children
  for (int i = 0; i < horizon; ++i) {
    int parent = kSourceParent;
    std::size_t leaf_slot = leaves.size();
    switch (policy.kind) {
      case FrontierKind::SinglePath:
        if (!leaves.empty()) {
          leaf_slot = leaves.size() - 1;
          parent = leaves[leaf_slot];
        }
        break;
      case FrontierKind::UniformFrontier: {
        // One extra slot for the source; picking it starts a new path.
        const std::size_t pick = rng.below(leaves.size() + 1);
        if (pick < leaves.size()) {
          leaf_slot = pick;
          parent = leaves[pick];
        }
        break;
      }
      case FrontierKind::SpawnProbability:
        if (!leaves.empty() && rng.next_double() >= policy.spawn_p) {
          leaf_slot = rng.below(leaves.size());
          parent = leaves[leaf_slot];
        }
        break;
    }

    TraceEvent e;
    e.index = i;
    e.parent_index = parent;
    if (parent == kSourceParent)
      e.edge_type = rng.categorical(model.eta);
    else
      e.edge_type = rng.categorical(
          model.alpha.row(*trace.events[parent].edge_type).transpose());
    trace.events.push_back(std::move(e));

    if (parent == kSourceParent)
      leaves.push_back(i);
    else
      leaves[leaf_slot] = i;  // the parent stops being a leaf
  }
  return trace;
}

FeatureSpec FeatureSpec::bumps(int z_count, int dim, double spread, double sigma) {
  if (z_count < 1 || dim < 1)
    throw std::invalid_argument("feature spec needs z_count >= 1 and dim >= 1");
  FeatureSpec spec;
  spec.dim = dim;
  spec.sigma = sigma;
  spec.mean_u = Eigen::MatrixXd::Zero(z_count, dim);
  spec.mean_v = Eigen::MatrixXd::Zero(z_count, dim);
  for (int z = 0; z < z_count; ++z) {
    if (dim == 1) {
      spec.mean_u(z, 0) = spread * (z - 0.5 * (z_count - 1));
    } else {
      const double theta = 2.0 * 3.14159265358979323846 * z / z_count;
      spec.mean_u(z, 0) = spread * std::cos(theta);
      spec.mean_u(z, 1) = spread * std::sin(theta);
    }
    spec.mean_v.row(z) = -spec.mean_u.row(z);
  }
  return spec;
}

void attach_features(InformationTrace& trace, const FeatureSpec& spec,
                     std::uint64_t seed) {
  if (spec.mean_u.cols() != spec.dim || spec.mean_v.cols() != spec.dim ||
      spec.mean_u.rows() != spec.mean_v.rows())
    throw std::invalid_argument("feature spec mean shapes disagree");
  Rng rng(seed);
  for (TraceEvent& e : trace.events) {
    if (!e.edge_type)
      throw std::invalid_argument("attach_features requires typed events");
    if (*e.edge_type < 0 || *e.edge_type >= spec.mean_u.rows())
      throw std::invalid_argument("event type outside the feature spec range");
    Eigen::VectorXd xu(spec.dim), xv(spec.dim);
    for (int d = 0; d < spec.dim; ++d)
      xu[d] = spec.mean_u(*e.edge_type, d) + spec.sigma * rng.next_gaussian();
    for (int d = 0; d < spec.dim; ++d)
      xv[d] = spec.mean_v(*e.edge_type, d) + spec.sigma * rng.next_gaussian();
    e.xu = std::move(xu);
    e.xv = std::move(xv);
  }
}

}  // namespace cascade
