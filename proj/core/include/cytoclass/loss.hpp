#pragma once

#include "cytoclass/classifier.hpp"

#include <vector>

namespace cyto {

/// Floor applied to the true-class probability before the log, so a
/// confidently wrong row yields a large finite loss instead of infinity.
inline constexpr double kProbabilityClamp = 1e-7;

/// Mean over samples of -ln(p_true), with p clamped to [1e-7, 1].
double categorical_cross_entropy(const ProbabilityMatrix& probabilities,
                                 const std::vector<int>& labels);

/// Fraction of rows whose argmax equals the label.
double classification_accuracy(const ProbabilityMatrix& probabilities,
                               const std::vector<int>& labels);

} // namespace cyto
