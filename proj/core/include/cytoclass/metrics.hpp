#pragma once

#include "cytoclass/classifier.hpp"
#include "cytoclass/dataset.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cyto {

/// K x K counts; rows are the true class, columns the predicted class.
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(int k);

    static ConfusionMatrix from_predictions(const std::vector<int>& predicted,
                                            const std::vector<int>& actual, int k);

    int k() const { return k_; }
    long long at(int true_class, int predicted_class) const;
    long long& at(int true_class, int predicted_class);

    long long total() const;
    long long trace() const;
    long long row_sum(int true_class) const;    // support of a class
    long long col_sum(int predicted_class) const;

private:
    int k_ = 0;
    std::vector<long long> counts_;
};

/// One-vs-rest counts for a single class; always partitions the total.
struct PerClassCounts {
    long long tp = 0;
    long long tn = 0;
    long long fp = 0;
    long long fn = 0;
};

PerClassCounts per_class_counts(const ConfusionMatrix& cm, int class_index);

/// (TP + TN) / total, i.e. trace / total in the multiclass matrix.
double accuracy(const ConfusionMatrix& cm);

/// Per-class TP / (TP + FP), unweighted mean over all K classes. A class
/// with TP + FP = 0 contributes 0 and emits a degenerate-class warning.
double precision_macro(const ConfusionMatrix& cm, std::vector<std::string>* warnings = nullptr);

/// Per-class TP / (TP + FN), same averaging and degenerate handling.
double recall_macro(const ConfusionMatrix& cm, std::vector<std::string>* warnings = nullptr);

/// Pooled counts over all classes; for single-label data both equal accuracy.
double precision_micro(const ConfusionMatrix& cm);
double recall_micro(const ConfusionMatrix& cm);

/// One-vs-rest ROC-AUC per class via the rank statistic (ties half-credited),
/// unweighted mean over classes having both positives and negatives. Classes
/// lacking either are skipped with a warning; no usable class is an error.
double auc_macro(const ProbabilityMatrix& probabilities, const std::vector<int>& actual,
                 std::vector<std::string>* warnings = nullptr);

/// Pooled variant: every (sample, class) score participates in one ranking.
double auc_micro(const ProbabilityMatrix& probabilities, const std::vector<int>& actual);

enum class Averaging { macro, micro };
std::string to_string(Averaging a);
Averaging averaging_from_string(const std::string& s);

/// One row of the evaluation report.
struct MetricsReport {
    std::string set_name; // "Training" or "Validation"
    double loss = 0.0;
    double accuracy = 0.0;  // fraction in [0, 1]
    double precision = 0.0;
    double recall = 0.0;
    double auc = 0.0;
    Averaging averaging = Averaging::macro;

    bool operator==(const MetricsReport&) const = default;
};

/// Inference over the index, then loss plus the four confusion-matrix
/// metrics, assembled into a report row.
MetricsReport evaluate(ClassifierModel& model, const DatasetIndex& index,
                       const std::string& set_name, int batch_size = 32,
                       Averaging averaging = Averaging::macro,
                       std::vector<std::string>* warnings = nullptr);

/// Absolute Training/Validation accuracy difference, when both rows exist.
std::optional<double> train_val_accuracy_gap(const std::vector<MetricsReport>& reports);

} // namespace cyto
