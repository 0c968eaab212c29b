#pragma once

#include "lago/types.hpp"

namespace lago {

// Builds the fixed-effects design matrix and response for a dataset.
// Column order: [a_1..a_P | centre 1..J | stage 2..K indicators]; there is no
// global intercept (the centre indicators span it). Stage indicators are only
// emitted when the dataset spans more than one stage.
DesignMatrix build_design(const TrialDataset& dataset);

}  // namespace lago
