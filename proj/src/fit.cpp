#include "cascade/fit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "cascade/rng.hpp"

namespace cascade::fit {

namespace {

Eigen::VectorXd event_features(const TraceEvent& e) {
  if (!e.xu || !e.xv)
    throw std::invalid_argument("classifier requires feature-bearing events");
  Eigen::VectorXd x(e.xu->size() + e.xv->size());
  x << *e.xu, *e.xv;
  return x;
}

int nearest_centroid(const Eigen::MatrixXd& centroids, const Eigen::VectorXd& x) {
  int best = 0;
  double best_d = (centroids.row(0).transpose() - x).squaredNorm();
  for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
    const double d = (centroids.row(c).transpose() - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

int infer_m_count(const TraceSet& traces) {
  int m = 0;
  for (const InformationTrace& tr : traces) m = std::max(m, tr.label + 1);
  return m;
}

}  // namespace

int pairing_theta(const Eigen::Ref<const Eigen::VectorXd>& score) {
  const int m = static_cast<int>(score.size());
  if (m < 2) throw std::invalid_argument("pairing needs at least two classes");
  int l1 = 0;
  for (int i = 1; i < m; ++i)
    if (score[i] > score[l1]) l1 = i;
  int l2 = l1 == 0 ? 1 : 0;
  for (int i = 0; i < m; ++i)
    if (i != l1 && score[i] > score[l2]) l2 = i;
  return l1 * (m - 1) + l2 - (l2 > l1 ? 1 : 0);
}

int classify_event(const EdgeClassifier& clf, const InformationTrace& trace,
                   int index) {
  const TraceEvent& e = trace.events.at(index);
  switch (clf.mode) {
    case ClassifierMode::Identity:
      if (!e.edge_type)
        throw std::invalid_argument("identity classifier requires typed events");
      return *e.edge_type;
    case ClassifierMode::KMeans:
      return nearest_centroid(clf.centroids, event_features(e));
    case ClassifierMode::Pairing:
      if (!clf.scorer)
        throw std::invalid_argument("pairing classifier has no scorer");
      return pairing_theta(clf.scorer->score(trace, index));
  }
  throw std::logic_error("unknown classifier mode");
}

TraceSet classify_traces(const EdgeClassifier& clf, const TraceSet& traces) {
  TraceSet out = traces;
  for (InformationTrace& tr : out)
    for (TraceEvent& e : tr.events)
      e.edge_type = classify_event(clf, tr, e.index);
  return out;
}

KMeansResult kmeans(const Eigen::Ref<const Eigen::MatrixXd>& X, int k,
                    std::uint64_t seed, double tol, int max_iter) {
  const Eigen::Index n = X.rows();
  if (k < 1) throw std::invalid_argument("kmeans needs k >= 1");
  if (n < k) throw std::invalid_argument("kmeans needs at least k points");
  {
    std::set<std::vector<double>> distinct;
    for (Eigen::Index i = 0; i < n && static_cast<int>(distinct.size()) < k; ++i)
      distinct.emplace(X.row(i).data(), X.row(i).data() + X.cols());
    if (static_cast<int>(distinct.size()) < k)
      throw std::invalid_argument("kmeans needs at least k distinct points");
  }

  Rng rng(seed);
  KMeansResult result;
  result.centroids.resize(k, X.cols());

  // k-means++ seeding: next centroid drawn with probability proportional to
  // the squared distance to the nearest one chosen so far.
  Eigen::VectorXd dist2 = Eigen::VectorXd::Constant(n, 0.0);
  result.centroids.row(0) = X.row(static_cast<Eigen::Index>(rng.below(n)));
  for (Eigen::Index i = 0; i < n; ++i)
    dist2[i] = (X.row(i) - result.centroids.row(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    Eigen::Index pick;
    if (dist2.sum() > 0.0) {
      pick = rng.categorical(dist2);
    } else {
      pick = static_cast<Eigen::Index>(rng.below(n));
    }
    result.centroids.row(c) = X.row(pick);
    for (Eigen::Index i = 0; i < n; ++i)
      dist2[i] = std::min(dist2[i],
                          (X.row(i) - result.centroids.row(c)).squaredNorm());
  }

  result.assignment.assign(n, 0);
  for (int iter = 0; iter < max_iter; ++iter) {
    double objective = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      result.assignment[i] = nearest_centroid(result.centroids, X.row(i).transpose());
      objective += (X.row(i) - result.centroids.row(result.assignment[i])).squaredNorm();
    }
    result.objective.push_back(objective);

    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, X.cols());
    Eigen::VectorXd count = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      next.row(result.assignment[i]) += X.row(i);
      count[result.assignment[i]] += 1.0;
    }
    for (int c = 0; c < k; ++c) {
      if (count[c] > 0.0) {
        next.row(c) /= count[c];
      } else {
        // Re-seed an empty cluster at the point farthest from its centroid.
        Eigen::Index far = 0;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double d =
              (X.row(i) - result.centroids.row(result.assignment[i])).squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        next.row(c) = X.row(far);
      }
    }
    const double shift = (next - result.centroids).rowwise().norm().maxCoeff();
    result.centroids = std::move(next);
    if (shift < tol) break;
  }

  // Final assignment against the converged centroids.
  double objective = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    result.assignment[i] = nearest_centroid(result.centroids, X.row(i).transpose());
    objective += (X.row(i) - result.centroids.row(result.assignment[i])).squaredNorm();
  }
  result.objective.push_back(objective);
  return result;
}

EdgeClassifier fit_kmeans_classifier(const TraceSet& traces, int z_count,
                                     std::uint64_t seed) {
  Eigen::Index rows = 0;
  for (const InformationTrace& tr : traces) rows += tr.events.size();
  if (rows == 0) throw std::invalid_argument("no events to cluster");
  Eigen::Index dim = -1;
  Eigen::MatrixXd X;
  Eigen::Index r = 0;
  for (const InformationTrace& tr : traces) {
    for (const TraceEvent& e : tr.events) {
      const Eigen::VectorXd x = event_features(e);
      if (dim < 0) {
        dim = x.size();
        X.resize(rows, dim);
      }
      if (x.size() != dim)
        throw std::invalid_argument("inconsistent feature dimensions across events");
      X.row(r++) = x.transpose();
    }
  }
  EdgeClassifier clf;
  clf.mode = ClassifierMode::KMeans;
  clf.z_count = z_count;
  clf.centroids = kmeans(X, z_count, seed).centroids;
  return clf;
}

InitialEstimate estimate_initial(const TraceSet& traces, int m_count, int z_count) {
  if (m_count < 1 || z_count < 1)
    throw std::invalid_argument("estimate_initial needs positive class and state counts");
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(m_count, z_count);
  Eigen::VectorXd trace_counts = Eigen::VectorXd::Zero(m_count);
  for (const InformationTrace& tr : traces) {
    if (tr.label < 0 || tr.label >= m_count)
      throw std::invalid_argument("trace label outside the class range");
    trace_counts[tr.label] += 1.0;
    for (const TraceEvent& e : tr.events) {
      if (e.parent_index != kSourceParent) continue;
      if (!e.edge_type || *e.edge_type < 0 || *e.edge_type >= z_count)
        throw std::invalid_argument("source event lacks a valid type");
      counts(tr.label, *e.edge_type) += 1.0;
    }
  }
  InitialEstimate est;
  est.eta_raw.resize(m_count, z_count);
  est.eta_hat.resize(m_count, z_count);
  for (int m = 0; m < m_count; ++m) {
    if (trace_counts[m] == 0.0) {
      std::ostringstream msg;
      msg << "no training traces for class " << m;
      throw std::invalid_argument(msg.str());
    }
    est.eta_raw.row(m) = counts.row(m) / trace_counts[m];
    const double total = est.eta_raw.row(m).sum();
    if (total <= 0.0) {
      std::ostringstream msg;
      msg << "class " << m << " has no source-adjacent events";
      throw std::invalid_argument(msg.str());
    }
    est.eta_hat.row(m) = est.eta_raw.row(m) / total;
  }
  return est;
}

TransitionEstimate estimate_transitions_dcb(const TraceSet& traces, int m_count,
                                            int z_count, double s) {
  if (m_count < 1 || z_count < 1)
    throw std::invalid_argument("estimate_transitions_dcb needs positive counts");
  if (s < 0.0) throw std::invalid_argument("pseudo-count s must be >= 0");

  TransitionEstimate est;
  est.s = s;
  est.n_ij.assign(m_count, Eigen::MatrixXd::Zero(z_count, z_count));
  est.n_i = Eigen::MatrixXd::Zero(m_count, z_count);
  est.theta = Eigen::MatrixXd::Zero(m_count, z_count);
  Eigen::VectorXd trace_counts = Eigen::VectorXd::Zero(m_count);

  for (const InformationTrace& tr : traces) {
    if (tr.label < 0 || tr.label >= m_count)
      throw std::invalid_argument("trace label outside the class range");
    trace_counts[tr.label] += 1.0;
    for (const TraceEvent& e : tr.events) {
      if (!e.edge_type || *e.edge_type < 0 || *e.edge_type >= z_count)
        throw std::invalid_argument("event lacks a valid type");
      est.theta(tr.label, *e.edge_type) += 1.0;
      if (e.parent_index == kSourceParent) continue;
      const int anc = ancestor_type(tr, e.index);
      est.n_ij[tr.label](anc, *e.edge_type) += 1.0;
    }
  }
  for (int m = 0; m < m_count; ++m) {
    if (trace_counts[m] > 0.0) est.theta.row(m) /= trace_counts[m];
    est.n_i.row(m) = est.n_ij[m].rowwise().sum().transpose();
  }

  est.alpha_hat.assign(m_count, Eigen::MatrixXd::Zero(z_count, z_count));
  for (int m = 0; m < m_count; ++m) {
    for (int i = 0; i < z_count; ++i) {
      Eigen::VectorXd row =
          est.n_ij[m].row(i).transpose().array() + s * est.theta(m, i);
      const double total = row.sum();
      if (total > 0.0) {
        est.alpha_hat[m].row(i) = (row / total).transpose();
      } else {
        est.alpha_hat[m].row(i).setConstant(1.0 / z_count);
        est.uniform_rows.emplace_back(m, i);
      }
    }
  }
  return est;
}

FitResult fit_offline(const TraceSet& traces, const FitConfig& cfg) {
  if (traces.empty()) throw std::invalid_argument("empty training set");
  const int m_count = cfg.m_count > 0 ? cfg.m_count : infer_m_count(traces);

  FitResult result;
  result.classifier.mode = cfg.mode;
  switch (cfg.mode) {
    case ClassifierMode::Identity: {
      int z = cfg.z_count;
      if (z <= 0) {
        for (const InformationTrace& tr : traces)
          for (const TraceEvent& e : tr.events) {
            if (!e.edge_type)
              throw std::invalid_argument("identity classifier requires typed events");
            z = std::max(z, *e.edge_type + 1);
          }
      }
      result.classifier.z_count = z;
      break;
    }
    case ClassifierMode::KMeans:
      if (cfg.z_count <= 0)
        throw std::invalid_argument("kmeans classifier requires z_count");
      result.classifier = fit_kmeans_classifier(traces, cfg.z_count, cfg.seed);
      break;
    case ClassifierMode::Pairing:
      if (!cfg.scorer)
        throw std::invalid_argument("pairing classifier requires a scorer");
      if (cfg.scorer->class_count() < 2)
        throw std::invalid_argument("pairing requires at least two classes");
      result.classifier.scorer = cfg.scorer;
      result.classifier.z_count =
          cfg.z_count > 0 ? cfg.z_count
                          : cfg.scorer->class_count() * (cfg.scorer->class_count() - 1);
      break;
  }

  const TraceSet typed = cfg.mode == ClassifierMode::Identity
                             ? traces
                             : classify_traces(result.classifier, traces);
  const int z_count = result.classifier.z_count;
  const double s = cfg.s < 0.0 ? static_cast<double>(z_count) : cfg.s;

  result.s = s;
  result.initial = estimate_initial(typed, m_count, z_count);
  result.transitions = estimate_transitions_dcb(typed, m_count, z_count, s);

  result.model_set.priors = Eigen::VectorXd::Constant(m_count, 1.0 / m_count);
  if (cfg.priors == PriorMode::Empirical) {
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(m_count);
    for (const InformationTrace& tr : typed) counts[tr.label] += 1.0;
    result.model_set.priors = counts / counts.sum();
  }
  for (int m = 0; m < m_count; ++m) {
    kernels::HypothesisModel hm;
    hm.eta = result.initial.eta_hat.row(m).transpose();
    hm.alpha = result.transitions.alpha_hat[m];
    result.model_set.models.push_back(std::move(hm));
  }
  kernels::validate(result.model_set);
  return result;
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd json_matrix(const nlohmann::json& rows) {
  const Eigen::Index r = rows.size();
  const Eigen::Index c = r == 0 ? 0 : rows.at(0).size();
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows.at(i).at(j).get<double>();
  return m;
}

const char* mode_name(ClassifierMode mode) {
  switch (mode) {
    case ClassifierMode::Identity: return "identity";
    case ClassifierMode::KMeans: return "kmeans";
    case ClassifierMode::Pairing: return "pairing";
  }
  return "unknown";
}

}  // namespace

void write_fit_sidecar(const FitResult& result, const std::string& path) {
  nlohmann::json j;
  j["theta"] = matrix_json(result.transitions.theta);
  j["s"] = result.s;
  nlohmann::json counts;
  counts["n_i"] = matrix_json(result.transitions.n_i);
  auto n_ij = nlohmann::json::array();
  for (const auto& m : result.transitions.n_ij) n_ij.push_back(matrix_json(m));
  counts["n_ij"] = std::move(n_ij);
  nlohmann::json uniform = nlohmann::json::array();
  for (const auto& [m, i] : result.transitions.uniform_rows)
    uniform.push_back({{"class", m}, {"state", i}});
  counts["uniform_rows"] = std::move(uniform);
  counts["eta_raw"] = matrix_json(result.initial.eta_raw);
  j["counts"] = std::move(counts);
  nlohmann::json clf;
  clf["mode"] = mode_name(result.classifier.mode);
  clf["z_count"] = result.classifier.z_count;
  if (result.classifier.mode == ClassifierMode::KMeans)
    clf["centroids"] = matrix_json(result.classifier.centroids);
  j["classifier"] = std::move(clf);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write fit sidecar: " + path);
  out << j.dump(2) << "\n";
}

EdgeClassifier read_classifier(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fit sidecar: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed fit sidecar " + path + ": " + e.what());
  }
  const auto& clf = j.at("classifier");
  EdgeClassifier out;
  out.z_count = clf.at("z_count").get<int>();
  const std::string mode = clf.at("mode").get<std::string>();
  if (mode == "identity") {
    out.mode = ClassifierMode::Identity;
  } else if (mode == "kmeans") {
    out.mode = ClassifierMode::KMeans;
    out.centroids = json_matrix(clf.at("centroids"));
  } else if (mode == "pairing") {
    throw std::runtime_error("pairing classifiers are not serialized; rebuild from a scorer");
  } else {
    throw std::runtime_error("unknown classifier mode in sidecar: " + mode);
  }
  return out;
}

}  // namespace cascade::fit
