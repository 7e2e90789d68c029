#include "cascade/gnn.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace cascade::gnn {

namespace {

Eigen::VectorXd softmax(Eigen::VectorXd logits) {
  logits.array() -= logits.maxCoeff();
  Eigen::VectorXd e = logits.array().exp();
  return e / e.sum();
}

Eigen::VectorXd floored(Eigen::VectorXd v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v[i] < kScoreFloor) v[i] = kScoreFloor;
  return v;
}

int argmax_smallest(const Eigen::VectorXd& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = static_cast<int>(i);
  return best;
}

Eigen::VectorXd event_features(const TraceEvent& e) {
  if (!e.xu || !e.xv)
    throw std::invalid_argument("gin scorer requires feature-bearing events");
  Eigen::VectorXd x(e.xu->size() + e.xv->size());
  x << *e.xu, *e.xv;
  return x;
}

}  // namespace

void validate(const GinWeights& w) {
  if (w.W1.rows() == 0 || w.W1.cols() == 0)
    throw std::invalid_argument("W1 must be nonempty");
  if (w.b1.size() != w.W1.rows())
    throw std::invalid_argument("b1 size must match W1 rows");
  if (w.W2.cols() != w.W1.rows())
    throw std::invalid_argument("W2 columns must match the hidden width");
  if (w.b2.size() != w.W2.rows())
    throw std::invalid_argument("b2 size must match W2 rows");
}

GinWeights read_gin_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open weights file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed weights file " + path + ": " + e.what());
  }
  const int d = j.at("d").get<int>();
  const int h = j.at("h").get<int>();
  const int m = j.at("M").get<int>();
  GinWeights w;
  w.epsilon = j.at("epsilon").get<double>();
  w.W1.resize(h, d);
  w.b1.resize(h);
  w.W2.resize(m, h);
  w.b2.resize(m);
  for (int r = 0; r < h; ++r) {
    w.b1[r] = j.at("b1").at(r).get<double>();
    for (int c = 0; c < d; ++c) w.W1(r, c) = j.at("W1").at(r).at(c).get<double>();
  }
  for (int r = 0; r < m; ++r) {
    w.b2[r] = j.at("b2").at(r).get<double>();
    for (int c = 0; c < h; ++c) w.W2(r, c) = j.at("W2").at(r).at(c).get<double>();
  }
  validate(w);
  return w;
}

void write_gin_weights(const GinWeights& w, const std::string& path) {
  validate(w);
  nlohmann::json j;
  j["d"] = w.feature_dim();
  j["h"] = w.hidden_dim();
  j["M"] = w.class_count();
  j["epsilon"] = w.epsilon;
  auto mat = [](const Eigen::MatrixXd& m) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      auto row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  auto vec = [](const Eigen::VectorXd& v) {
    auto row = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(v[i]);
    return row;
  };
  j["W1"] = mat(w.W1);
  j["b1"] = vec(w.b1);
  j["W2"] = mat(w.W2);
  j["b2"] = vec(w.b2);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write weights file: " + path);
  out << j.dump(2) << "\n";
}

Eigen::VectorXd gin_forward(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const std::optional<Eigen::VectorXd>& parent_x,
                            const GinWeights& w) {
  validate(w);
  if (x.size() != w.feature_dim())
    throw std::invalid_argument("gin_forward: input dimension mismatch");
  const Eigen::VectorXd hidden =
      ((w.W1 * x + w.b1).array().max(0.0)).matrix();
  Eigen::VectorXd combined = (1.0 + w.epsilon) * hidden;
  if (parent_x) {
    if (parent_x->size() != w.feature_dim())
      throw std::invalid_argument("gin_forward: parent dimension mismatch");
    combined += ((w.W1 * *parent_x + w.b1).array().max(0.0)).matrix();
  }
  return softmax(w.W2 * combined + w.b2);
}

OracleScorer::OracleScorer(kernels::ModelSet set) : set_(std::move(set)) {
  kernels::validate(set_);
}

Eigen::VectorXd OracleScorer::score(const InformationTrace& trace, int index) const {
  const TraceEvent& e = trace.events.at(index);
  if (!e.edge_type)
    throw std::invalid_argument("oracle scorer requires typed events");
  const int z = *e.edge_type;
  const int anc = ancestor_type(trace, index);
  Eigen::VectorXd lik(set_.m_count());
  for (int m = 0; m < set_.m_count(); ++m)
    lik[m] = anc == kSourceParent ? set_.models[m].eta[z]
                                  : set_.models[m].alpha(anc, z);
  lik = floored(std::move(lik));
  return lik / lik.sum();
}

TabularScorer::TabularScorer(std::vector<Eigen::MatrixXd> table)
    : table_(std::move(table)) {
  if (table_.size() < 2)
    throw std::invalid_argument("tabular scorer needs Z ancestor rows plus a source row");
  for (const auto& block : table_)
    if (block.rows() != table_.front().rows() ||
        block.cols() != table_.front().cols())
      throw std::invalid_argument("tabular scorer blocks must share shape");
}

int TabularScorer::class_count() const {
  return static_cast<int>(table_.front().cols());
}

Eigen::VectorXd TabularScorer::score(const InformationTrace& trace, int index) const {
  const TraceEvent& e = trace.events.at(index);
  if (!e.edge_type)
    throw std::invalid_argument("tabular scorer requires typed events");
  const int z_count = static_cast<int>(table_.front().rows());
  const int anc = ancestor_type(trace, index);
  const int row = anc == kSourceParent ? z_count : anc;
  if (*e.edge_type >= z_count || row >= static_cast<int>(table_.size()))
    throw std::invalid_argument("tabular scorer index out of range");
  return floored(table_[row].row(*e.edge_type).transpose());
}

TabularScorer fit_tabular_scorer(const TraceSet& traces, int m_count, int z_count) {
  if (m_count < 1 || z_count < 1)
    throw std::invalid_argument("fit_tabular_scorer needs positive class and state counts");
  // counts[anc](z, m), anc == z_count for source events; add-1 smoothing.
  std::vector<Eigen::MatrixXd> counts(
      z_count + 1, Eigen::MatrixXd::Ones(z_count, m_count));
  for (const InformationTrace& tr : traces) {
    if (tr.label < 0 || tr.label >= m_count)
      throw std::invalid_argument("trace label outside the class range");
    for (const TraceEvent& e : tr.events) {
      if (!e.edge_type)
        throw std::invalid_argument("fit_tabular_scorer requires typed events");
      const int anc = ancestor_type(tr, e.index);
      const int row = anc == kSourceParent ? z_count : anc;
      counts[row](*e.edge_type, tr.label) += 1.0;
    }
  }
  for (auto& block : counts)
    for (Eigen::Index r = 0; r < block.rows(); ++r)
      block.row(r) /= block.row(r).sum();
  return TabularScorer(std::move(counts));
}

GinScorer::GinScorer(GinWeights w) : w_(std::move(w)) { validate(w_); }

Eigen::VectorXd GinScorer::score(const InformationTrace& trace, int index) const {
  const TraceEvent& e = trace.events.at(index);
  std::optional<Eigen::VectorXd> parent_x;
  if (e.parent_index != kSourceParent)
    parent_x = event_features(trace.events.at(e.parent_index));
  return floored(gin_forward(event_features(e), parent_x, w_));
}

AggregatorState init_aggregator(int m_count) {
  if (m_count < 1)
    throw std::invalid_argument("aggregator needs at least one class");
  return {Eigen::VectorXd::Zero(m_count), 0};
}

Eigen::VectorXd aggregate_step(AggregatorState& state,
                               const Eigen::Ref<const Eigen::VectorXd>& phi) {
  if (phi.size() != state.log_sums.size())
    throw std::invalid_argument("aggregate_step: class count mismatch");
  for (Eigen::Index m = 0; m < phi.size(); ++m)
    if (!(phi[m] > 0.0))
      throw std::invalid_argument(
          "scorer contract violation: score vector has a nonpositive entry");
  state.log_sums += phi.array().log().matrix();
  ++state.count;
  return softmax(state.log_sums);
}

sdr::SdrOutcome run_gnn_sdr(const InformationTrace& trace, const NodeScorer& scorer,
                            const sdr::SdrConfig& cfg, const Eigen::VectorXd& priors) {
  const int m = scorer.class_count();
  sdr::validate(cfg, m);
  Eigen::VectorXd phi0 = priors.size() == 0
                             ? Eigen::VectorXd::Constant(m, 1.0 / m)
                             : priors;
  if (phi0.size() != m)
    throw std::invalid_argument("priors size must match the scorer class count");

  sdr::SdrOutcome out;
  if (cfg.record_trajectory) out.trajectory.push_back(phi0);
  const Eigen::VectorXd thresholds =
      (1.0 + cfg.thresholds_a.array()).inverse().matrix();

  AggregatorState state = init_aggregator(m);
  Eigen::VectorXd agg = phi0;
  int step = 0;
  for (const TraceEvent& e : trace.events) {
    agg = aggregate_step(state, scorer.score(trace, e.index));
    ++step;
    if (cfg.record_trajectory) out.trajectory.push_back(agg);
    for (int i = 0; i < m; ++i) {
      if (agg[i] >= thresholds[i]) {
        out.stop_time = step;
        out.stopped = true;
        out.decision = argmax_smallest(agg);
        return out;
      }
    }
  }
  out.stop_time = step;
  out.stopped = false;
  out.forced = true;
  out.decision = argmax_smallest(agg);
  return out;
}

XiEstimate estimate_xi(const NodeScorer& scorer, const kernels::ModelSet& set,
                       int max_len, int n_sequences, std::uint64_t seed,
                       const FeatureSpec* features) {
  kernels::validate(set);
  const int m = set.m_count();
  if (m < 2) throw std::invalid_argument("xi undefined for M<2");
  if (scorer.class_count() != m)
    throw std::invalid_argument("scorer class count must match the model set");
  if (max_len < 1 || n_sequences < 1)
    throw std::invalid_argument("estimate_xi needs positive max_len and n_sequences");
  if (scorer.needs_features() && features == nullptr)
    throw std::invalid_argument(
        "estimate_xi: feature-based scorers need a feature spec");

  XiEstimate best;
  double best_log = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_sequences; ++s) {
    const int label = s % m;
    InformationTrace trace =
        sample_trace(set.models[label], label, max_len,
                     FrontierPolicy::uniform_frontier(), seed + s);
    if (features)
      attach_features(trace, *features, seed + 0x9e3779b97f4a7c15ULL + s);

    Eigen::VectorXd log_phi = Eigen::VectorXd::Zero(m);  // aggregate log sums
    Eigen::VectorXd log_f = Eigen::VectorXd::Zero(m);    // true log-likelihoods
    for (const TraceEvent& e : trace.events) {
      const Eigen::VectorXd phi = scorer.score(trace, e.index);
      for (int i = 0; i < m; ++i) {
        if (!(phi[i] > 0.0))
          throw std::invalid_argument(
              "scorer contract violation: score vector has a nonpositive entry");
        log_phi[i] += std::log(phi[i]);
      }
      const int z = *e.edge_type;
      const int anc = ancestor_type(trace, e.index);
      for (int i = 0; i < m; ++i) {
        const double p = anc == kSourceParent ? set.models[i].eta[z]
                                              : set.models[i].alpha(anc, z);
        log_f[i] += std::log(std::max(p, kScoreFloor));
      }
      for (int k = 0; k < m; ++k) {
        for (int j = 0; j < m; ++j) {
          if (k == j) continue;
          const double v = (log_phi[k] - log_phi[j]) - (log_f[k] - log_f[j]);
          if (v > best_log) {
            best_log = v;
            best.k = k;
            best.j = j;
            best.sequence = s;
            best.prefix_len = e.index + 1;
          }
        }
      }
    }
  }
  best.xi_hat = std::exp(best_log);
  return best;
}

}  // namespace cascade::gnn
