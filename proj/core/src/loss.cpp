#include "cytoclass/loss.hpp"

#include "cytoclass/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cyto {

namespace {

void check_inputs(const ProbabilityMatrix& probabilities, const std::vector<int>& labels) {
    if (probabilities.rows != static_cast<int>(labels.size()))
        throw ConfigError("probability rows (" + std::to_string(probabilities.rows) +
                          ") and labels (" + std::to_string(labels.size()) + ") disagree");
    if (probabilities.rows == 0)
        throw ConfigError("cannot score an empty batch");
    for (int label : labels)
        if (label < 0 || label >= probabilities.cols)
            throw ConfigError("label " + std::to_string(label) + " outside [0, " +
                              std::to_string(probabilities.cols) + ")");
}

} // namespace

double categorical_cross_entropy(const ProbabilityMatrix& probabilities,
                                 const std::vector<int>& labels) {
    check_inputs(probabilities, labels);
    double sum = 0.0;
    for (int r = 0; r < probabilities.rows; ++r) {
        const double p = std::clamp(static_cast<double>(probabilities.at(r, labels[r])),
                                    kProbabilityClamp, 1.0);
        sum += -std::log(p);
    }
    return sum / static_cast<double>(probabilities.rows);
}

double classification_accuracy(const ProbabilityMatrix& probabilities,
                               const std::vector<int>& labels) {
    check_inputs(probabilities, labels);
    int correct = 0;
    for (int r = 0; r < probabilities.rows; ++r)
        if (probabilities.argmax(r) == labels[r]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(probabilities.rows);
}

} // namespace cyto
