#include "cascade/presets.hpp"

#include <stdexcept>

namespace cascade::presets {

kernels::ModelSet two_state_pair() {
  kernels::ModelSet set;
  set.priors = Eigen::VectorXd::Constant(2, 0.5);
  kernels::HypothesisModel a;
  a.eta = Eigen::VectorXd::Constant(2, 0.5);
  a.alpha.resize(2, 2);
  a.alpha << 0.9, 0.1,
             0.5, 0.5;
  kernels::HypothesisModel b;
  b.eta = Eigen::VectorXd::Constant(2, 0.5);
  b.alpha.resize(2, 2);
  b.alpha << 0.5, 0.5,
             0.1, 0.9;
  set.models = {std::move(a), std::move(b)};
  kernels::validate(set);
  return set;
}

kernels::ModelSet three_class_shift() {
  kernels::ModelSet set;
  set.priors = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
  for (int m = 0; m < 3; ++m) {
    kernels::HypothesisModel hm;
    hm.eta = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
    hm.alpha = Eigen::MatrixXd::Constant(3, 3, 0.15);
    for (int i = 0; i < 3; ++i) hm.alpha(i, (i + m) % 3) = 0.7;
    set.models.push_back(std::move(hm));
  }
  kernels::validate(set);
  return set;
}

kernels::ModelSet by_name(const std::string& name) {
  if (name == "pair") return two_state_pair();
  if (name == "tri") return three_class_shift();
  throw std::invalid_argument("unknown preset: " + name + " (expected pair|tri)");
}

}  // namespace cascade::presets
