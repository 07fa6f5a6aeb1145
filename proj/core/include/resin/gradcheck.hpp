#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "resin/nn.hpp"

namespace resin::nn {

struct GradCheckResult {
  std::string name;
  double max_rel_error;
};

// Central-difference checks (step 1e-5, 64-bit) on random small shapes for
// every layer type and the fused head; parameters and inputs both checked.
// The finite-difference side uses only forward evaluations.
std::vector<GradCheckResult> gradient_check_suite(std::uint64_t seed);

}  // namespace resin::nn
