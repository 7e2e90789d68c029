#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "cascade/kernels.hpp"
#include "cascade/presets.hpp"

using namespace cascade;

namespace {

kernels::ModelSet pair_set() { return presets::two_state_pair(); }
kernels::ModelSet tri_set() { return presets::three_class_shift(); }

}  // namespace

TEST_CASE("validate accepts the bundled models") {
  CHECK_NOTHROW(kernels::validate(pair_set()));
  CHECK_NOTHROW(kernels::validate(tri_set()));
}

TEST_CASE("validate names the offending field") {
  kernels::ModelSet set = pair_set();
  set.priors[0] = -0.25;
  set.priors[1] = 1.25;
  CHECK_THROWS_WITH_AS(kernels::validate(set),
                       doctest::Contains("prior"), std::invalid_argument);

  set = pair_set();
  set.models[0].eta[0] = 0.75;  // row no longer sums to one
  CHECK_THROWS_AS(kernels::validate(set), std::invalid_argument);

  set = pair_set();
  set.models[1].alpha(0, 0) = -0.1;
  set.models[1].alpha(0, 1) = 1.1;
  CHECK_THROWS_AS(kernels::validate(set), std::invalid_argument);

  set = pair_set();
  set.models[0].alpha.resize(3, 3);  // dimension mismatch vs eta
  CHECK_THROWS_AS(kernels::validate(set), std::invalid_argument);
}

TEST_CASE("stationary distribution rejects reducible kernels by state set") {
  Eigen::MatrixXd reducible(3, 3);
  reducible << 0.5, 0.5, 0.0,  //
      0.5, 0.5, 0.0,           //
      0.0, 0.0, 1.0;           // state 2 not strongly connected to state 0
  CHECK_THROWS_WITH_AS(kernels::stationary_distribution(reducible),
                       doctest::Contains("states {2}"), std::runtime_error);
}

TEST_CASE("hellinger affinity matches the hand-computed value") {
  const kernels::ModelSet set = pair_set();
  // sqrt(0.9*0.5) + sqrt(0.1*0.5)
  CHECK(kernels::hellinger_affinity(set.models[0].alpha.row(0),
                                    set.models[1].alpha.row(0)) ==
        doctest::Approx(0.89442719099991586).epsilon(1e-14));
  CHECK(kernels::hellinger_affinity(0, 1, 0, set) ==
        doctest::Approx(0.89442719099991586).epsilon(1e-14));
  CHECK(kernels::hellinger_affinity(0, 1, 1, set) ==
        doctest::Approx(0.89442719099991586).epsilon(1e-14));
  // affinity is symmetric and equals one for identical rows
  CHECK(kernels::hellinger_affinity(1, 0, 0, set) ==
        doctest::Approx(kernels::hellinger_affinity(0, 1, 0, set)));
  CHECK(kernels::hellinger_affinity(set.models[0].alpha.row(0),
                                    set.models[0].alpha.row(0)) ==
        doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("conditional KL matches the hand-computed values") {
  const kernels::ModelSet set = pair_set();
  CHECK(kernels::conditional_kl(0, 1, 0, set) ==
        doctest::Approx(0.36806420716849708).epsilon(1e-14));
  CHECK(kernels::conditional_kl(0, 1, 1, set) ==
        doctest::Approx(0.51082562376599072).epsilon(1e-14));
  CHECK(kernels::conditional_kl(1, 0, 0, set) ==
        doctest::Approx(0.51082562376599072).epsilon(1e-14));
}

TEST_CASE("divergences flag support violations with +inf instead of throwing") {
  Eigen::Vector2d p(0.5, 0.5), q(1.0, 0.0);
  const double kl = kernels::kl_divergence(p, q);
  const double chi2 = kernels::chi_square_divergence(p, q);
  CHECK(std::isinf(kl));
  CHECK(kl > 0);
  CHECK(std::isinf(chi2));
  CHECK(chi2 > 0);
  // zero mass in p contributes nothing
  CHECK(kernels::kl_divergence(q, p) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("chi-square matches the hand-computed value") {
  const kernels::ModelSet set = pair_set();
  CHECK(kernels::chi_square(0, 1, 0, set) ==
        doctest::Approx(0.64).epsilon(1e-12));
}

TEST_CASE("stationary distribution of the two-state kernel is (5/6, 1/6)") {
  const kernels::ModelSet set = pair_set();
  const Eigen::VectorXd pi = kernels::stationary_distribution(set.models[0].alpha);
  CHECK(pi.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pi[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(pi[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  // invariance: pi^T alpha == pi^T
  const Eigen::VectorXd img = set.models[0].alpha.transpose() * pi;
  CHECK((img - pi).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("stationary distribution via power iteration on a large circulant") {
  const int n = 70;  // beyond the dense-solver cutoff
  Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    alpha(i, (i + 1) % n) = 0.5;
    alpha(i, (i + 2) % n) = 0.3;
    alpha(i, i) = 0.2;
  }
  const Eigen::VectorXd pi = kernels::stationary_distribution(alpha);
  CHECK(pi.sum() == doctest::Approx(1.0).epsilon(1e-10));
  // doubly stochastic: stationary law is uniform
  CHECK((pi.array() - 1.0 / n).abs().maxCoeff() < 1e-9);
}

TEST_CASE("stationary conditional KL matches the frozen reference") {
  const kernels::ModelSet set = pair_set();
  CHECK(kernels::stationary_kl(0, 1, set) ==
        doctest::Approx(0.39185777660141269).epsilon(1e-13));
  CHECK(kernels::stationary_kl(1, 0, set) ==
        doctest::Approx(0.39185777660141269).epsilon(1e-13));
  CHECK(kernels::stationary_kl(0, 0, set) == doctest::Approx(0.0));
}

TEST_CASE("tail constants match the closed forms") {
  const kernels::ModelSet tri = tri_set();
  const Eigen::VectorXd a = Eigen::VectorXd::Constant(3, 0.1);
  const kernels::TailConstants c = kernels::tail_constants(0, tri, a);
  // (M-1)^{3/2} sqrt(max_j pi_j / (pi_k min_l a_l)) with uniform priors
  CHECK(c.c1 == doctest::Approx(8.9442719099991592).epsilon(1e-13));
  // -log of the worst per-state affinity 2*sqrt(0.7*0.15) + 0.15
  CHECK(c.c2 == doctest::Approx(0.22555386649042167).epsilon(1e-13));

  const kernels::ModelSet pair = pair_set();
  const kernels::TailConstants cp =
      kernels::tail_constants(0, pair, Eigen::VectorXd::Constant(2, 0.1));
  CHECK(cp.c2 == doctest::Approx(0.11157177565710491).epsilon(1e-13));
}

TEST_CASE("tail constants require Hellinger-separated hypotheses") {
  kernels::ModelSet set = pair_set();
  set.models[1] = set.models[0];  // identical kernels, affinity 1 everywhere
  CHECK_THROWS_WITH_AS(
      kernels::tail_constants(0, set, Eigen::VectorXd::Constant(2, 0.1)),
      doctest::Contains("Hellinger"), std::runtime_error);
}

TEST_CASE("divergence report has coherent shapes and diagonals") {
  const kernels::ModelSet set = tri_set();
  const kernels::DivergenceReport rep = kernels::compute_divergences(set);
  REQUIRE(rep.S.size() == 3);
  CHECK(rep.S[0].rows() == 3);
  CHECK(rep.S[0].cols() == 3);
  CHECK(rep.kl_stat.rows() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(rep.kl_stat(k, k) == doctest::Approx(0.0));
    for (int z = 0; z < 3; ++z) {
      CHECK(rep.S[k](k, z) == doctest::Approx(1.0));
      for (int j = 0; j < 3; ++j) {
        CHECK(rep.S[k](j, z) == doctest::Approx(rep.S[j](k, z)));
        CHECK(rep.S[k](j, z) <= 1.0 + 1e-12);
      }
    }
    CHECK(rep.stationary.row(k).sum() == doctest::Approx(1.0).epsilon(1e-10));
  }
  // distinct shifted kernels: every off-diagonal stationary KL is positive
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 3; ++j)
      if (j != k) CHECK(rep.kl_stat(k, j) > 0.1);
}

TEST_CASE("model set JSON round trip is lossless") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "cascade_model_rt.json").string();
  const kernels::ModelSet set = tri_set();
  kernels::write_model_set(set, path);
  const kernels::ModelSet back = kernels::read_model_set(path);
  REQUIRE(back.m_count() == set.m_count());
  REQUIRE(back.z_count() == set.z_count());
  CHECK((back.priors - set.priors).cwiseAbs().maxCoeff() == 0.0);
  for (int m = 0; m < set.m_count(); ++m) {
    CHECK((back.models[m].eta - set.models[m].eta).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.models[m].alpha - set.models[m].alpha).cwiseAbs().maxCoeff() ==
          0.0);
  }
  std::filesystem::remove(path);
}

TEST_CASE("preset lookup by name") {
  CHECK(presets::by_name("pair").m_count() == 2);
  CHECK(presets::by_name("tri").m_count() == 3);
  CHECK_THROWS_AS(presets::by_name("nope"), std::invalid_argument);
}
