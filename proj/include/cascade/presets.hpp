#pragma once

#include <string>

#include "cascade/kernels.hpp"

namespace cascade::presets {

// Two-hypothesis pair on two states with uniform eta and kernels
// ((0.9,0.1),(0.5,0.5)) vs ((0.5,0.5),(0.1,0.9)); stationary (5/6, 1/6) under
// the first hypothesis. The workhorse for stopping-time and AEP checks.
kernels::ModelSet two_state_pair();

// Three well-separated hypotheses on three states: hypothesis m concentrates
// mass 0.7 on the (i + m) mod 3 successor of state i.
kernels::ModelSet three_class_shift();

// Lookup by name ("pair" | "tri"); throws std::invalid_argument otherwise.
kernels::ModelSet by_name(const std::string& name);

}  // namespace cascade::presets
