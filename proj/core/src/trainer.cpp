#include "cytoclass/trainer.hpp"

#include "cytoclass/checkpoint.hpp"
#include "cytoclass/errors.hpp"
#include "cytoclass/image_io.hpp"
#include "cytoclass/loss.hpp"
#include "cytoclass/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace cyto {

void TrainConfig::validate() const {
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (optimizer != "adam") throw ConfigError("unsupported optimizer: " + optimizer);
    if (loss != "categorical_cross_entropy") throw ConfigError("unsupported loss: " + loss);
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
        throw ConfigError("adam betas must be in [0, 1)");
    if (!(epsilon > 0.0)) throw ConfigError("adam epsilon must be > 0");
}

long steps_per_epoch(std::size_t n_samples, int batch_size) {
    if (batch_size <= 0) throw ConfigError("batch size must be positive");
    return static_cast<long>((n_samples + static_cast<std::size_t>(batch_size) - 1) /
                             static_cast<std::size_t>(batch_size));
}

namespace {

ProbabilityMatrix to_probability_matrix(const Tensor& out) {
    ProbabilityMatrix probs(out.n(), out.c());
    probs.data = out.data;
    return probs;
}

// d(mean CCE)/d(probabilities); the clamp floor bounds the magnitude for
// confidently wrong rows.
Tensor loss_gradient(const Tensor& probs, const std::vector<int>& labels) {
    Tensor grad(probs.n(), 1, 1, probs.c());
    const float inv_n = 1.0f / static_cast<float>(probs.n());
    for (int r = 0; r < probs.n(); ++r) {
        const float p = std::max(probs.at(r, 0, 0, labels[static_cast<std::size_t>(r)]),
                                 static_cast<float>(kProbabilityClamp));
        grad.at(r, 0, 0, labels[static_cast<std::size_t>(r)]) = -inv_n / p;
    }
    return grad;
}

} // namespace

TrainHistory train(ClassifierModel& model, const DatasetIndex& train_idx,
                   const DatasetIndex& val_idx, const TrainConfig& config,
                   const TrainOptions& options) {
    config.validate();
    if (train_idx.empty()) throw ConfigError("training index is empty");
    if (val_idx.empty()) throw ConfigError("validation index is empty");

    AdamConfig adam_config;
    adam_config.learning_rate = config.learning_rate;
    adam_config.beta1 = config.beta1;
    adam_config.beta2 = config.beta2;
    adam_config.epsilon = config.epsilon;
    AdamOptimizer optimizer(model.trainable_parameters(), adam_config);

    if (options.checkpoint_dir) {
        std::error_code ec;
        std::filesystem::create_directories(*options.checkpoint_dir, ec);
        if (ec) throw IoError("cannot create checkpoint directory: " +
                              options.checkpoint_dir->string());
    }

    TrainHistory history;
    std::vector<SampleRecord> order = train_idx.samples();

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        long correct = 0;
        long seen = 0;
        long step = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            ++step;
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            std::vector<SampleRecord> slice(order.begin() + static_cast<std::ptrdiff_t>(start),
                                            order.begin() + static_cast<std::ptrdiff_t>(end));
            ImageBatch batch = load_batch(slice, model.config().input_size);

            Tensor out = model.forward_training(batch.pixels);
            ProbabilityMatrix probs = to_probability_matrix(out);
            const double batch_loss = categorical_cross_entropy(probs, batch.labels);
            if (!std::isfinite(batch_loss))
                throw TrainingError("training diverged at epoch " + std::to_string(epoch) +
                                    " step " + std::to_string(step) + ": non-finite loss");

            model.backward(loss_gradient(out, batch.labels));
            optimizer.step();

            const long batch_n = static_cast<long>(end - start);
            loss_sum += batch_loss * static_cast<double>(batch_n);
            for (int r = 0; r < probs.rows; ++r)
                if (probs.argmax(r) == batch.labels[static_cast<std::size_t>(r)]) ++correct;
            seen += batch_n;
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = loss_sum / static_cast<double>(seen);
        stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(seen);

        InferenceOutput val = run_inference(model, val_idx, config.batch_size);
        stats.val_loss = categorical_cross_entropy(val.probabilities, val.labels);
        stats.val_accuracy = classification_accuracy(val.probabilities, val.labels);
        if (!std::isfinite(stats.val_loss))
            throw TrainingError("training diverged at epoch " + std::to_string(epoch) +
                                ": non-finite validation loss");
        history.epochs.push_back(stats);

        if (options.verbose)
            std::cerr << "epoch " << epoch << "/" << config.epochs << "  loss "
                      << stats.train_loss << "  acc " << stats.train_accuracy << "  val_loss "
                      << stats.val_loss << "  val_acc " << stats.val_accuracy << "\n";

        if (options.checkpoint_dir)
            save_checkpoint(model, *options.checkpoint_dir / ("epoch_" + std::to_string(epoch)));
    }
    return history;
}

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write history: " + path.string());
    out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
    char buf[160];
    for (const auto& e : history.epochs) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", e.epoch, e.train_loss,
                      e.train_accuracy, e.val_loss, e.val_accuracy);
        out << buf;
    }
    if (!out) throw IoError("failed writing history: " + path.string());
}

TrainHistory read_history_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open history: " + path.string());
    TrainHistory history;
    std::string line;
    bool first = true;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (first) {
            first = false;
            continue; // header
        }
        EpochStats e;
        std::istringstream ls(line);
        char comma;
        if (!(ls >> e.epoch >> comma >> e.train_loss >> comma >> e.train_accuracy >> comma >>
              e.val_loss >> comma >> e.val_accuracy))
            throw DataError(path.string() + " line " + std::to_string(lineno) +
                            ": malformed history row");
        history.epochs.push_back(e);
    }
    return history;
}

} // namespace cyto
