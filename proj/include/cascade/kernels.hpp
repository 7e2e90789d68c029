#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cascade::kernels {

// Tolerance for probability-vector validation.
inline constexpr double kProbTol = 1e-9;

/**
 * One hypothesis: an initial distribution over edge types and a row-stochastic
 * transition kernel. Rows of alpha are indexed by the conditioning type.
 */
struct HypothesisModel {
  Eigen::VectorXd eta;    // size Z
  Eigen::MatrixXd alpha;  // Z x Z, rows sum to 1
};

struct ModelSet {
  std::vector<HypothesisModel> models;
  Eigen::VectorXd priors;  // size M, sums to 1

  int m_count() const { return static_cast<int>(models.size()); }
  int z_count() const {
    return models.empty() ? 0 : static_cast<int>(models.front().eta.size());
  }
};

// Throw std::invalid_argument if shapes disagree or a row/vector is not a
// probability distribution within kProbTol.
void validate(const HypothesisModel& model);
void validate(const ModelSet& set);

// Bhattacharyya-type affinity between two distributions; in [0, 1], and 1
// exactly when p == q.
template <typename DA, typename DB>
double hellinger_affinity(const Eigen::MatrixBase<DA>& p,
                          const Eigen::MatrixBase<DB>& q) {
  return (p.derived().array().template cast<double>() *
          q.derived().array().template cast<double>())
      .sqrt()
      .sum();
}

// KL divergence sum_i p_i log(p_i / q_i); +infinity when p puts mass where q
// does not (the caller-facing "support violation" flag).
template <typename DA, typename DB>
double kl_divergence(const Eigen::MatrixBase<DA>& p,
                     const Eigen::MatrixBase<DB>& q) {
  double out = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pi = p.derived()(i);
    if (pi <= 0.0) continue;
    const double qi = q.derived()(i);
    if (qi <= 0.0) return std::numeric_limits<double>::infinity();
    out += pi * std::log(pi / qi);
  }
  return out;
}

// Chi-square divergence sum_i p_i^2 / q_i - 1; +infinity on support violation.
template <typename DA, typename DB>
double chi_square_divergence(const Eigen::MatrixBase<DA>& p,
                             const Eigen::MatrixBase<DB>& q) {
  double out = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pi = p.derived()(i);
    const double qi = q.derived()(i);
    if (qi <= 0.0) {
      if (pi > 0.0) return std::numeric_limits<double>::infinity();
      continue;
    }
    out += pi * pi / qi;
  }
  return out - 1.0;
}

// Conditional (per ancestor type z) divergences between hypotheses k and j.
double hellinger_affinity(int k, int j, int z, const ModelSet& set);
double conditional_kl(int k, int j, int z, const ModelSet& set);
double chi_square(int k, int j, int z, const ModelSet& set);

// Conditional KL averaged under the stationary distribution of hypothesis k:
// sum_z pi_k^stat(z) * KL(alpha_k(.|z) || alpha_j(.|z)).
double stationary_kl(int k, int j, const ModelSet& set);

// Stationary distribution of an irreducible row-stochastic kernel. Dense
// eigensolve up to 64 states, power iteration (tol 1e-12, cap 1e5) above.
// Throws std::runtime_error naming the unreachable states when reducible.
Eigen::VectorXd stationary_distribution(const Eigen::Ref<const Eigen::MatrixXd>& alpha);

struct TailConstants {
  double c1 = 0.0;  // (M-1)^{3/2} * max_{j!=k} sqrt(pi_j / (pi_k * min_l a_l))
  double c2 = 0.0;  // -log(max_{j!=k} max_z S_{k,j}(z)), the valid exponent
};

// Constants of the exponential stopping-time tail bound under hypothesis k.
// Requires min_l a_l > 0 and Hellinger separation max_{j!=k} max_z S < 1.
TailConstants tail_constants(int k, const ModelSet& set,
                             const Eigen::Ref<const Eigen::VectorXd>& a);

/** All pairwise divergences plus stationary distributions of a model set. */
struct DivergenceReport {
  std::vector<Eigen::MatrixXd> S;        // S[k](j, z) conditional affinity
  std::vector<Eigen::MatrixXd> kl_cond;  // kl_cond[k](j, z)
  Eigen::MatrixXd kl_stat;               // (k, j)
  std::vector<Eigen::MatrixXd> chi2;     // chi2[k](j, z)
  Eigen::MatrixXd stationary;            // (k, z)
};

DivergenceReport compute_divergences(const ModelSet& set);

// Model file: JSON {"M","Z","priors":[...],"models":[{"eta":[...],"alpha":[[...]]}]}.
ModelSet read_model_set(const std::string& path);
void write_model_set(const ModelSet& set, const std::string& path);

}  // namespace cascade::kernels
