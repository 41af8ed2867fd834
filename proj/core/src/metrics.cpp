#include "cytoclass/metrics.hpp"

#include "cytoclass/errors.hpp"
#include "cytoclass/loss.hpp"

#include <algorithm>
#include <numeric>

namespace cyto {

ConfusionMatrix::ConfusionMatrix(int k) : k_(k) {
    if (k <= 0) throw ConfigError("confusion matrix needs k >= 1");
    counts_.assign(static_cast<std::size_t>(k) * k, 0);
}

ConfusionMatrix ConfusionMatrix::from_predictions(const std::vector<int>& predicted,
                                                  const std::vector<int>& actual, int k) {
    if (predicted.size() != actual.size())
        throw ConfigError("predicted (" + std::to_string(predicted.size()) + ") and actual (" +
                          std::to_string(actual.size()) + ") lengths differ");
    ConfusionMatrix cm(k);
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const int p = predicted[i], a = actual[i];
        if (p < 0 || p >= k || a < 0 || a >= k)
            throw ConfigError("class index outside [0, " + std::to_string(k) + ") at sample " +
                              std::to_string(i));
        ++cm.at(a, p);
    }
    return cm;
}

long long ConfusionMatrix::at(int true_class, int predicted_class) const {
    if (true_class < 0 || true_class >= k_ || predicted_class < 0 || predicted_class >= k_)
        throw ConfigError("confusion matrix index out of range");
    return counts_[static_cast<std::size_t>(true_class) * k_ + predicted_class];
}

long long& ConfusionMatrix::at(int true_class, int predicted_class) {
    if (true_class < 0 || true_class >= k_ || predicted_class < 0 || predicted_class >= k_)
        throw ConfigError("confusion matrix index out of range");
    return counts_[static_cast<std::size_t>(true_class) * k_ + predicted_class];
}

long long ConfusionMatrix::total() const {
    return std::accumulate(counts_.begin(), counts_.end(), 0LL);
}

long long ConfusionMatrix::trace() const {
    long long t = 0;
    for (int i = 0; i < k_; ++i) t += counts_[static_cast<std::size_t>(i) * k_ + i];
    return t;
}

long long ConfusionMatrix::row_sum(int true_class) const {
    long long s = 0;
    for (int j = 0; j < k_; ++j) s += at(true_class, j);
    return s;
}

long long ConfusionMatrix::col_sum(int predicted_class) const {
    long long s = 0;
    for (int i = 0; i < k_; ++i) s += at(i, predicted_class);
    return s;
}

PerClassCounts per_class_counts(const ConfusionMatrix& cm, int class_index) {
    if (class_index < 0 || class_index >= cm.k())
        throw ConfigError("class index out of range: " + std::to_string(class_index));
    PerClassCounts c;
    c.tp = cm.at(class_index, class_index);
    c.fn = cm.row_sum(class_index) - c.tp;
    c.fp = cm.col_sum(class_index) - c.tp;
    c.tn = cm.total() - c.tp - c.fn - c.fp;
    return c;
}

namespace {

void require_nonempty(const ConfusionMatrix& cm) {
    if (cm.k() == 0 || cm.total() == 0)
        throw DataError("metric undefined on an empty confusion matrix");
}

} // namespace

double accuracy(const ConfusionMatrix& cm) {
    require_nonempty(cm);
    return static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
}

double precision_macro(const ConfusionMatrix& cm, std::vector<std::string>* warnings) {
    require_nonempty(cm);
    double sum = 0.0;
    for (int i = 0; i < cm.k(); ++i) {
        const PerClassCounts c = per_class_counts(cm, i);
        const long long denom = c.tp + c.fp;
        if (denom == 0) {
            if (warnings)
                warnings->push_back("precision undefined for class " + std::to_string(i) +
                                    " (no predicted positives); counted as 0");
            continue;
        }
        sum += static_cast<double>(c.tp) / static_cast<double>(denom);
    }
    return sum / static_cast<double>(cm.k());
}

double recall_macro(const ConfusionMatrix& cm, std::vector<std::string>* warnings) {
    require_nonempty(cm);
    double sum = 0.0;
    for (int i = 0; i < cm.k(); ++i) {
        const PerClassCounts c = per_class_counts(cm, i);
        const long long denom = c.tp + c.fn;
        if (denom == 0) {
            if (warnings)
                warnings->push_back("recall undefined for class " + std::to_string(i) +
                                    " (no true samples); counted as 0");
            continue;
        }
        sum += static_cast<double>(c.tp) / static_cast<double>(denom);
    }
    return sum / static_cast<double>(cm.k());
}

double precision_micro(const ConfusionMatrix& cm) {
    require_nonempty(cm);
    long long tp = 0, fp = 0;
    for (int i = 0; i < cm.k(); ++i) {
        const PerClassCounts c = per_class_counts(cm, i);
        tp += c.tp;
        fp += c.fp;
    }
    return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double recall_micro(const ConfusionMatrix& cm) {
    require_nonempty(cm);
    long long tp = 0, fn = 0;
    for (int i = 0; i < cm.k(); ++i) {
        const PerClassCounts c = per_class_counts(cm, i);
        tp += c.tp;
        fn += c.fn;
    }
    return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

namespace {

// Rank-statistic AUC over (score, is_positive) pairs, ties half-credited via
// average ranks. Returns nullopt when either side is empty.
std::optional<double> rank_auc(std::vector<std::pair<double, bool>>& scored) {
    std::size_t n_pos = 0;
    for (const auto& [s, pos] : scored)
        if (pos) ++n_pos;
    const std::size_t n_neg = scored.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) return std::nullopt;

    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < scored.size()) {
        std::size_t j = i;
        while (j < scored.size() && scored[j].first == scored[i].first) ++j;
        // 1-based ranks i+1..j share the average rank.
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t)
            if (scored[t].second) pos_rank_sum += avg_rank;
        i = j;
    }
    const double u = pos_rank_sum -
                     static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

void check_scores(const ProbabilityMatrix& probabilities, const std::vector<int>& actual) {
    if (probabilities.rows != static_cast<int>(actual.size()))
        throw ConfigError("probability rows and actual labels disagree");
    if (probabilities.rows == 0) throw DataError("AUC undefined without samples");
    for (int label : actual)
        if (label < 0 || label >= probabilities.cols)
            throw ConfigError("label " + std::to_string(label) + " outside [0, " +
                              std::to_string(probabilities.cols) + ")");
}

} // namespace

double auc_macro(const ProbabilityMatrix& probabilities, const std::vector<int>& actual,
                 std::vector<std::string>* warnings) {
    check_scores(probabilities, actual);
    double sum = 0.0;
    int usable = 0;
    for (int c = 0; c < probabilities.cols; ++c) {
        std::vector<std::pair<double, bool>> scored;
        scored.reserve(actual.size());
        for (int r = 0; r < probabilities.rows; ++r)
            scored.emplace_back(static_cast<double>(probabilities.at(r, c)), actual[r] == c);
        auto auc = rank_auc(scored);
        if (!auc) {
            if (warnings)
                warnings->push_back("AUC skipped for class " + std::to_string(c) +
                                    " (needs at least one positive and one negative)");
            continue;
        }
        sum += *auc;
        ++usable;
    }
    if (usable == 0)
        throw DataError("AUC undefined: no class has both positives and negatives");
    return sum / static_cast<double>(usable);
}

double auc_micro(const ProbabilityMatrix& probabilities, const std::vector<int>& actual) {
    check_scores(probabilities, actual);
    std::vector<std::pair<double, bool>> scored;
    scored.reserve(static_cast<std::size_t>(probabilities.rows) * probabilities.cols);
    for (int c = 0; c < probabilities.cols; ++c)
        for (int r = 0; r < probabilities.rows; ++r)
            scored.emplace_back(static_cast<double>(probabilities.at(r, c)), actual[r] == c);
    auto auc = rank_auc(scored);
    if (!auc) throw DataError("AUC undefined: no class has both positives and negatives");
    return *auc;
}

std::string to_string(Averaging a) { return a == Averaging::macro ? "macro" : "micro"; }

Averaging averaging_from_string(const std::string& s) {
    if (s == "macro") return Averaging::macro;
    if (s == "micro") return Averaging::micro;
    throw ConfigError("unknown averaging mode: " + s);
}

MetricsReport evaluate(ClassifierModel& model, const DatasetIndex& index,
                       const std::string& set_name, int batch_size, Averaging averaging,
                       std::vector<std::string>* warnings) {
    if (index.empty()) throw ConfigError("cannot evaluate an empty index");
    try {
        InferenceOutput inference = run_inference(model, index, batch_size);

        std::vector<int> predicted(inference.labels.size());
        for (std::size_t i = 0; i < predicted.size(); ++i)
            predicted[i] = inference.probabilities.argmax(static_cast<int>(i));
        const ConfusionMatrix cm = ConfusionMatrix::from_predictions(
            predicted, inference.labels, model.config().num_classes);

        MetricsReport report;
        report.set_name = set_name;
        report.averaging = averaging;
        report.loss = categorical_cross_entropy(inference.probabilities, inference.labels);
        report.accuracy = accuracy(cm);
        if (averaging == Averaging::macro) {
            report.precision = precision_macro(cm, warnings);
            report.recall = recall_macro(cm, warnings);
            report.auc = auc_macro(inference.probabilities, inference.labels, warnings);
        } else {
            report.precision = precision_micro(cm);
            report.recall = recall_micro(cm);
            report.auc = auc_micro(inference.probabilities, inference.labels);
        }
        return report;
    } catch (const DataError& e) {
        throw DataError("evaluating set '" + set_name + "': " + e.what());
    }
}

std::optional<double> train_val_accuracy_gap(const std::vector<MetricsReport>& reports) {
    const MetricsReport* train = nullptr;
    const MetricsReport* val = nullptr;
    for (const auto& r : reports) {
        if (r.set_name == "Training") train = &r;
        if (r.set_name == "Validation") val = &r;
    }
    if (!train || !val) return std::nullopt;
    return std::abs(train->accuracy - val->accuracy);
}

} // namespace cyto
