#include "cascade/kernels.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <json.hpp>

namespace cascade::kernels {

namespace {

void check_prob_vector(const Eigen::VectorXd& v, const std::string& what) {
  if (v.size() == 0)
    throw std::invalid_argument(what + " is empty");
  if ((v.array() < 0.0).any())
    throw std::invalid_argument(what + " has a negative entry");
  if (std::abs(v.sum() - 1.0) > kProbTol)
    throw std::invalid_argument(what + " does not sum to 1 within 1e-9");
}

}  // namespace

void validate(const HypothesisModel& model) {
  check_prob_vector(model.eta, "eta");
  const Eigen::Index z = model.eta.size();
  if (model.alpha.rows() != z || model.alpha.cols() != z)
    throw std::invalid_argument("alpha must be square with the size of eta");
  for (Eigen::Index i = 0; i < z; ++i) {
    std::ostringstream name;
    name << "alpha row " << i;
    check_prob_vector(model.alpha.row(i).transpose(), name.str());
  }
}

void validate(const ModelSet& set) {
  if (set.models.empty())
    throw std::invalid_argument("model set has no hypotheses");
  check_prob_vector(set.priors, "priors");
  if (set.priors.size() != static_cast<Eigen::Index>(set.models.size()))
    throw std::invalid_argument("priors size must equal the number of hypotheses");
  const int z = set.z_count();
  for (std::size_t m = 0; m < set.models.size(); ++m) {
    if (set.models[m].eta.size() != z)
      throw std::invalid_argument("all hypotheses must share the state count");
    validate(set.models[m]);
  }
}

double hellinger_affinity(int k, int j, int z, const ModelSet& set) {
  return hellinger_affinity(set.models.at(k).alpha.row(z),
                            set.models.at(j).alpha.row(z));
}

double conditional_kl(int k, int j, int z, const ModelSet& set) {
  return kl_divergence(set.models.at(k).alpha.row(z),
                       set.models.at(j).alpha.row(z));
}

double chi_square(int k, int j, int z, const ModelSet& set) {
  return chi_square_divergence(set.models.at(k).alpha.row(z),
                               set.models.at(j).alpha.row(z));
}

double stationary_kl(int k, int j, const ModelSet& set) {
  const Eigen::VectorXd pi = stationary_distribution(set.models.at(k).alpha);
  double out = 0.0;
  for (Eigen::Index z = 0; z < pi.size(); ++z) {
    if (pi[z] <= 0.0) continue;
    const double d = conditional_kl(k, j, static_cast<int>(z), set);
    if (std::isinf(d)) return std::numeric_limits<double>::infinity();
    out += pi[z] * d;
  }
  return out;
}

namespace {

// States strongly connected to state 0 under the positive-entry graph.
std::vector<int> unreachable_states(const Eigen::Ref<const Eigen::MatrixXd>& alpha) {
  const int n = static_cast<int>(alpha.rows());
  auto closure = [&](bool forward) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const int s = stack.back();
      stack.pop_back();
      for (int t = 0; t < n; ++t) {
        const double w = forward ? alpha(s, t) : alpha(t, s);
        if (w > 0.0 && !seen[t]) {
          seen[t] = 1;
          stack.push_back(t);
        }
      }
    }
    return seen;
  };
  const auto fwd = closure(true);
  const auto bwd = closure(false);
  std::vector<int> out;
  for (int s = 0; s < n; ++s)
    if (!fwd[s] || !bwd[s]) out.push_back(s);
  return out;
}

Eigen::VectorXd finish_stationary(Eigen::VectorXd v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v[i] < 0.0) v[i] = 0.0;
  const double s = v.sum();
  if (!(s > 0.0))
    throw std::runtime_error("stationary distribution collapsed to zero mass");
  return v / s;
}

}  // namespace

Eigen::VectorXd stationary_distribution(const Eigen::Ref<const Eigen::MatrixXd>& alpha) {
  const Eigen::Index n = alpha.rows();
  if (n == 0 || alpha.cols() != n)
    throw std::invalid_argument("stationary_distribution: kernel must be square");
  const auto bad = unreachable_states(alpha);
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "reducible transition kernel: states {";
    for (std::size_t i = 0; i < bad.size(); ++i)
      msg << (i ? "," : "") << bad[i];
    msg << "} are not strongly connected to state 0";
    throw std::runtime_error(msg.str());
  }

  if (n <= 64) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(alpha.transpose());
    if (es.info() != Eigen::Success)
      throw std::runtime_error("stationary_distribution: eigensolver failed");
    Eigen::Index best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::complex<double> ev = es.eigenvalues()[i];
      const double dist = std::abs(ev - std::complex<double>(1.0, 0.0));
      if (dist < best_dist) {
        best_dist = dist;
        best = i;
      }
    }
    Eigen::VectorXd v = es.eigenvectors().col(best).real();
    if (v.sum() < 0.0) v = -v;
    return finish_stationary(std::move(v));
  }

  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (int iter = 0; iter < 100000; ++iter) {
    Eigen::VectorXd next = alpha.transpose() * v;
    next /= next.sum();
    const double delta = (next - v).cwiseAbs().sum();
    v = std::move(next);
    if (delta < 1e-12) break;
  }
  return finish_stationary(std::move(v));
}

TailConstants tail_constants(int k, const ModelSet& set,
                             const Eigen::Ref<const Eigen::VectorXd>& a) {
  validate(set);
  const int m_count = set.m_count();
  const int z_count = set.z_count();
  if (k < 0 || k >= m_count)
    throw std::invalid_argument("tail_constants: hypothesis index out of range");
  if (a.size() != m_count)
    throw std::invalid_argument("tail_constants: thresholds must have one entry per hypothesis");
  const double min_a = a.minCoeff();
  if (!(min_a > 0.0))
    throw std::invalid_argument("tail_constants: thresholds must be positive");

  double max_s = -1.0;
  int worst_z = -1;
  double max_ratio = 0.0;
  for (int j = 0; j < m_count; ++j) {
    if (j == k) continue;
    for (int z = 0; z < z_count; ++z) {
      const double s = hellinger_affinity(k, j, z, set);
      if (s > max_s) {
        max_s = s;
        worst_z = z;
      }
    }
    max_ratio = std::max(max_ratio, set.priors[j] / (set.priors[k] * min_a));
  }
  if (max_s >= 1.0 - 1e-12) {
    std::ostringstream msg;
    msg << "hypotheses not Hellinger-separated at state " << worst_z;
    throw std::runtime_error(msg.str());
  }

  TailConstants out;
  out.c1 = std::pow(static_cast<double>(m_count - 1), 1.5) * std::sqrt(max_ratio);
  out.c2 = -std::log(max_s);
  return out;
}

DivergenceReport compute_divergences(const ModelSet& set) {
  validate(set);
  const int m = set.m_count();
  const int z = set.z_count();
  DivergenceReport rep;
  rep.S.assign(m, Eigen::MatrixXd::Zero(m, z));
  rep.kl_cond.assign(m, Eigen::MatrixXd::Zero(m, z));
  rep.chi2.assign(m, Eigen::MatrixXd::Zero(m, z));
  rep.kl_stat = Eigen::MatrixXd::Zero(m, m);
  rep.stationary = Eigen::MatrixXd::Zero(m, z);
  for (int k = 0; k < m; ++k)
    rep.stationary.row(k) = stationary_distribution(set.models[k].alpha).transpose();
  for (int k = 0; k < m; ++k) {
    for (int j = 0; j < m; ++j) {
      double stat = 0.0;
      for (int s = 0; s < z; ++s) {
        rep.S[k](j, s) = hellinger_affinity(k, j, s, set);
        rep.kl_cond[k](j, s) = conditional_kl(k, j, s, set);
        rep.chi2[k](j, s) = chi_square(k, j, s, set);
        if (rep.stationary(k, s) > 0.0 && !std::isinf(stat))
          stat = std::isinf(rep.kl_cond[k](j, s))
                     ? std::numeric_limits<double>::infinity()
                     : stat + rep.stationary(k, s) * rep.kl_cond[k](j, s);
      }
      rep.kl_stat(k, j) = stat;
    }
  }
  return rep;
}

ModelSet read_model_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed model file " + path + ": " + e.what());
  }
  ModelSet set;
  const int m = j.at("M").get<int>();
  const int z = j.at("Z").get<int>();
  const auto& priors = j.at("priors");
  if (static_cast<int>(priors.size()) != m)
    throw std::runtime_error("model file priors size does not match M");
  set.priors.resize(m);
  for (int i = 0; i < m; ++i) set.priors[i] = priors.at(i).get<double>();
  const auto& models = j.at("models");
  if (static_cast<int>(models.size()) != m)
    throw std::runtime_error("model file models size does not match M");
  for (int i = 0; i < m; ++i) {
    HypothesisModel hm;
    const auto& eta = models.at(i).at("eta");
    const auto& alpha = models.at(i).at("alpha");
    if (static_cast<int>(eta.size()) != z || static_cast<int>(alpha.size()) != z)
      throw std::runtime_error("model file entry does not match Z");
    hm.eta.resize(z);
    hm.alpha.resize(z, z);
    for (int r = 0; r < z; ++r) {
      hm.eta[r] = eta.at(r).get<double>();
      const auto& row = alpha.at(r);
      if (static_cast<int>(row.size()) != z)
        throw std::runtime_error("model file alpha row does not match Z");
      for (int c = 0; c < z; ++c) hm.alpha(r, c) = row.at(c).get<double>();
    }
    set.models.push_back(std::move(hm));
  }
  validate(set);
  return set;
}

void write_model_set(const ModelSet& set, const std::string& path) {
  validate(set);
  nlohmann::json j;
  j["M"] = set.m_count();
  j["Z"] = set.z_count();
  j["priors"] = std::vector<double>(set.priors.data(),
                                    set.priors.data() + set.priors.size());
  j["models"] = nlohmann::json::array();
  for (const auto& m : set.models) {
    nlohmann::json jm;
    jm["eta"] = std::vector<double>(m.eta.data(), m.eta.data() + m.eta.size());
    auto rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.alpha.rows(); ++r) {
      auto row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < m.alpha.cols(); ++c) row.push_back(m.alpha(r, c));
      rows.push_back(std::move(row));
    }
    jm["alpha"] = std::move(rows);
    j["models"].push_back(std::move(jm));
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace cascade::kernels
