#include "cytoclass/metrics.hpp"

#include "cytoclass/errors.hpp"
#include "cytoclass/fixture.hpp"
#include "cytoclass/loss.hpp"
#include "cytoclass/rng.hpp"
#include "cytoclass/trainer.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace cyto;

TEST_CASE("confusion matrix construction") {
    SUBCASE("all-correct predictions give a diagonal matrix") {
        ConfusionMatrix cm = ConfusionMatrix::from_predictions({0, 1, 2}, {0, 1, 2}, 3);
        CHECK(cm.trace() == 3);
        CHECK(cm.total() == 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(cm.at(i, j) == (i == j && i < 3 ? (i < 3 ? 1 : 0) : 0));
    }
    SUBCASE("hand-counted 2x2 case") {
        ConfusionMatrix cm = ConfusionMatrix::from_predictions({1, 1}, {0, 1}, 2);
        CHECK(cm.at(0, 1) == 1);
        CHECK(cm.at(1, 1) == 1);
        CHECK(cm.at(0, 0) == 0);
        CHECK(cm.at(1, 0) == 0);
    }
    SUBCASE("500 random pairs at k=21 recount to 500") {
        Rng rng(99);
        std::vector<int> predicted, actual;
        for (int i = 0; i < 500; ++i) {
            predicted.push_back(static_cast<int>(rng.next_below(21)));
            actual.push_back(static_cast<int>(rng.next_below(21)));
        }
        ConfusionMatrix cm = ConfusionMatrix::from_predictions(predicted, actual, 21);
        CHECK(cm.total() == 500);
        // Row sums are class supports.
        for (int c = 0; c < 21; ++c) {
            const long long support =
                std::count(actual.begin(), actual.end(), c);
            CHECK(cm.row_sum(c) == support);
        }
    }
    SUBCASE("argument errors") {
        CHECK_THROWS_AS((void)ConfusionMatrix::from_predictions({0}, {0, 1}, 2), ConfigError);
        CHECK_THROWS_AS((void)ConfusionMatrix::from_predictions({2}, {0}, 2), ConfigError);
        CHECK_THROWS_AS((void)ConfusionMatrix::from_predictions({-1}, {0}, 2), ConfigError);
    }
}

TEST_CASE("per-class counts") {
    SUBCASE("diagonal matrix has no errors") {
        ConfusionMatrix cm = ConfusionMatrix::from_predictions({0, 1, 2}, {0, 1, 2}, 3);
        for (int i = 0; i < 3; ++i) {
            PerClassCounts c = per_class_counts(cm, i);
            CHECK(c.fp == 0);
            CHECK(c.fn == 0);
            CHECK(c.tp == 1);
        }
    }
    SUBCASE("hand count on the 2x2 case") {
        ConfusionMatrix cm = ConfusionMatrix::from_predictions({1, 1}, {0, 1}, 2);
        PerClassCounts c = per_class_counts(cm, 1);
        CHECK(c.tp == 1);
        CHECK(c.fp == 1);
        CHECK(c.fn == 0);
        CHECK(c.tn == 0);
    }
    SUBCASE("counts always partition the total (property)") {
        Rng rng(7);
        for (int trial = 0; trial < 50; ++trial) {
            const int k = 2 + static_cast<int>(rng.next_below(20));
            const int n = 1 + static_cast<int>(rng.next_below(400));
            std::vector<int> predicted, actual;
            for (int i = 0; i < n; ++i) {
                predicted.push_back(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(k))));
                actual.push_back(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(k))));
            }
            ConfusionMatrix cm = ConfusionMatrix::from_predictions(predicted, actual, k);
            for (int c = 0; c < k; ++c) {
                PerClassCounts pc = per_class_counts(cm, c);
                CHECK(pc.tp + pc.tn + pc.fp + pc.fn == cm.total());
                CHECK(pc.tp >= 0);
                CHECK(pc.tn >= 0);
                CHECK(pc.fp >= 0);
                CHECK(pc.fn >= 0);
            }
        }
    }
    SUBCASE("out-of-range class rejected") {
        ConfusionMatrix cm(3);
        CHECK_THROWS_AS((void)per_class_counts(cm, 3), ConfigError);
    }
}

TEST_CASE("accuracy") {
    SUBCASE("trace 19 of 20 is 0.95") {
        ConfusionMatrix cm(2);
        cm.at(0, 0) = 10;
        cm.at(1, 1) = 9;
        cm.at(1, 0) = 1;
        CHECK(accuracy(cm) == doctest::Approx(0.95));
    }
    SUBCASE("all-correct gives 1.0") {
        ConfusionMatrix cm = ConfusionMatrix::from_predictions({0, 1, 2}, {0, 1, 2}, 3);
        CHECK(accuracy(cm) == 1.0);
    }
    SUBCASE("empty matrix is an error") {
        ConfusionMatrix cm(3);
        CHECK_THROWS_AS((void)accuracy(cm), DataError);
    }
}

TEST_CASE("macro precision and recall") {
    SUBCASE("diagonal matrix scores 1.0") {
        ConfusionMatrix cm = ConfusionMatrix::from_predictions({0, 1, 2}, {0, 1, 2}, 3);
        CHECK(precision_macro(cm) == 1.0);
        CHECK(recall_macro(cm) == 1.0);
    }
    SUBCASE("hand-derived 2-class values") {
        // cm rows=true, cols=predicted: [[3,1],[2,4]]
        ConfusionMatrix cm(2);
        cm.at(0, 0) = 3;
        cm.at(0, 1) = 1;
        cm.at(1, 0) = 2;
        cm.at(1, 1) = 4;
        CHECK(precision_macro(cm) == doctest::Approx(0.7).epsilon(1e-12));
        CHECK(recall_macro(cm) == doctest::Approx(0.7083333333333334).epsilon(1e-12));
    }
    SUBCASE("degenerate classes contribute 0 and warn") {
        // Class 2 never predicted and never present.
        ConfusionMatrix cm(3);
        cm.at(0, 0) = 5;
        cm.at(1, 1) = 5;
        std::vector<std::string> warnings;
        const double p = precision_macro(cm, &warnings);
        CHECK(p == doctest::Approx(2.0 / 3.0));
        CHECK(warnings.size() == 1);
        warnings.clear();
        const double r = recall_macro(cm, &warnings);
        CHECK(r == doctest::Approx(2.0 / 3.0));
        CHECK(warnings.size() == 1);
    }
}

TEST_CASE("metrics agree with brute-force counting (oracle property)") {
    Rng rng(123);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 2 + static_cast<int>(rng.next_below(20));
        const int n = 1 + static_cast<int>(rng.next_below(1000));
        std::vector<int> predicted, actual;
        for (int i = 0; i < n; ++i) {
            predicted.push_back(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(k))));
            actual.push_back(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(k))));
        }
        ConfusionMatrix cm = ConfusionMatrix::from_predictions(predicted, actual, k);
        const auto expected = oracle::brute_force_metrics(predicted, actual, k);
        CHECK(accuracy(cm) == expected.accuracy);
        CHECK(precision_macro(cm) == expected.precision_macro);
        CHECK(recall_macro(cm) == expected.recall_macro);
    }
}

TEST_CASE("accuracy equals micro recall and micro precision") {
    Rng rng(321);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 2 + static_cast<int>(rng.next_below(20));
        const int n = 1 + static_cast<int>(rng.next_below(500));
        std::vector<int> predicted, actual;
        for (int i = 0; i < n; ++i) {
            predicted.push_back(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(k))));
            actual.push_back(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(k))));
        }
        ConfusionMatrix cm = ConfusionMatrix::from_predictions(predicted, actual, k);
        CHECK(accuracy(cm) == recall_micro(cm));
        CHECK(accuracy(cm) == precision_micro(cm));
    }
}

TEST_CASE("permuting sample order changes no metric") {
    Rng rng(55);
    const int k = 6, n = 200;
    std::vector<int> predicted, actual;
    ProbabilityMatrix probs(n, k);
    for (int i = 0; i < n; ++i) {
        actual.push_back(static_cast<int>(rng.next_below(k)));
        double sum = 0.0;
        for (int c = 0; c < k; ++c) {
            probs.at(i, c) = rng.next_float() + 0.01f;
            sum += probs.at(i, c);
        }
        for (int c = 0; c < k; ++c) probs.at(i, c) = static_cast<float>(probs.at(i, c) / sum);
        predicted.push_back(probs.argmax(i));
    }

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng shuffle_rng(77);
    shuffle_rng.shuffle(perm);
    std::vector<int> predicted_p(n), actual_p(n);
    ProbabilityMatrix probs_p(n, k);
    for (int i = 0; i < n; ++i) {
        predicted_p[i] = predicted[static_cast<std::size_t>(perm[i])];
        actual_p[i] = actual[static_cast<std::size_t>(perm[i])];
        for (int c = 0; c < k; ++c) probs_p.at(i, c) = probs.at(perm[i], c);
    }

    auto cm = ConfusionMatrix::from_predictions(predicted, actual, k);
    auto cm_p = ConfusionMatrix::from_predictions(predicted_p, actual_p, k);
    CHECK(accuracy(cm) == accuracy(cm_p));
    CHECK(precision_macro(cm) == precision_macro(cm_p));
    CHECK(recall_macro(cm) == recall_macro(cm_p));
    CHECK(auc_macro(probs, actual) == doctest::Approx(auc_macro(probs_p, actual_p)).epsilon(1e-12));
}

TEST_CASE("ROC AUC") {
    SUBCASE("perfect separation scores 1.0") {
        ProbabilityMatrix probs(4, 2);
        probs.at(0, 1) = 0.9f;
        probs.at(1, 1) = 0.8f;
        probs.at(2, 1) = 0.2f;
        probs.at(3, 1) = 0.1f;
        for (int r = 0; r < 4; ++r) probs.at(r, 0) = 1.0f - probs.at(r, 1);
        CHECK(auc_macro(probs, {1, 1, 0, 0}) == 1.0);
    }
    SUBCASE("constant scores give 0.5 (all ties, half credit)") {
        ProbabilityMatrix probs(6, 3);
        for (int r = 0; r < 6; ++r)
            for (int c = 0; c < 3; ++c) probs.at(r, c) = 1.0f / 3.0f;
        CHECK(auc_macro(probs, {0, 1, 2, 0, 1, 2}) == 0.5);
    }
    SUBCASE("classes without positives are skipped with a warning") {
        ProbabilityMatrix probs(4, 3);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 3; ++c) probs.at(r, c) = (c == 0) ? 0.8f : 0.1f;
        std::vector<std::string> warnings;
        (void)auc_macro(probs, {0, 0, 1, 1}, &warnings);
        CHECK(warnings.size() == 1); // class 2 has no positives
    }
    SUBCASE("single-class labels are an error") {
        ProbabilityMatrix probs(3, 2);
        for (int r = 0; r < 3; ++r) {
            probs.at(r, 0) = 0.6f;
            probs.at(r, 1) = 0.4f;
        }
        CHECK_THROWS_AS((void)auc_macro(probs, {0, 0, 0}), DataError);
    }
    SUBCASE("rank statistic equals pair counting (oracle property)") {
        Rng rng(888);
        for (int trial = 0; trial < 30; ++trial) {
            const int k = 2 + static_cast<int>(rng.next_below(4));
            const int n = 10 + static_cast<int>(rng.next_below(490));
            ProbabilityMatrix probs(n, k);
            std::vector<int> actual;
            for (int r = 0; r < n; ++r) {
                actual.push_back(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(k))));
                double sum = 0.0;
                for (int c = 0; c < k; ++c) {
                    // Coarse quantization forces plenty of ties.
                    probs.at(r, c) = static_cast<float>(rng.next_below(8)) / 8.0f + 0.05f;
                    sum += probs.at(r, c);
                }
                for (int c = 0; c < k; ++c)
                    probs.at(r, c) = static_cast<float>(probs.at(r, c) / sum);
            }

            double expected_sum = 0.0;
            int usable = 0;
            for (int c = 0; c < k; ++c) {
                std::vector<double> scores;
                std::vector<bool> is_pos;
                bool has_pos = false, has_neg = false;
                for (int r = 0; r < n; ++r) {
                    scores.push_back(static_cast<double>(probs.at(r, c)));
                    is_pos.push_back(actual[static_cast<std::size_t>(r)] == c);
                    (actual[static_cast<std::size_t>(r)] == c ? has_pos : has_neg) = true;
                }
                if (!has_pos || !has_neg) continue;
                expected_sum += oracle::pair_counting_auc(scores, is_pos);
                ++usable;
            }
            REQUIRE(usable > 0);
            CHECK(std::abs(auc_macro(probs, actual) - expected_sum / usable) < 1e-9);
        }
    }
}

TEST_CASE("evaluate assembles a full report") {
    // Three fixture classes relabelled 0..2 so a 3-class model can be driven
    // to perfection and every metric is exercised at its extreme.
    testutil::TempDir dir("evaluate");
    const auto tax = ClassTaxonomy::builtin();
    generate_synthetic_fixture({{"ABE", 12}, {"KSC", 12}, {"PMO", 12}}, 16, 6, dir.path(), tax);

    std::vector<SampleRecord> samples;
    int next = 0;
    for (const char* code : {"ABE", "KSC", "PMO"}) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(dir.path() / code))
            files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            SampleRecord rec;
            rec.id = std::string(code) + "/" + f.filename().string();
            rec.path = f;
            rec.label = next;
            samples.push_back(std::move(rec));
        }
        ++next;
    }
    Lineage lineage;
    lineage.source_root = dir.path().string();
    DatasetIndex index(samples, lineage);

    ModelConfig mc;
    mc.backbone_name = kTinyConvBackbone;
    mc.input_size = 16;
    mc.num_classes = 3;
    mc.head_dense_units = 24;
    mc.dropout_rate = 0.0;
    mc.freeze_policy = FreezePolicy::freeze_backbone;
    auto model = build_classifier(mc, {}, 17);

    TrainConfig tc;
    tc.batch_size = 32;
    tc.epochs = 45;
    tc.learning_rate = 0.02;
    tc.seed = 3;
    (void)train(model, index, index, tc);

    std::vector<std::string> warnings;
    MetricsReport report = evaluate(model, index, "Training", 32, Averaging::macro, &warnings);
    CHECK(report.set_name == "Training");
    CHECK(report.accuracy == 1.0);
    CHECK(report.precision == 1.0);
    CHECK(report.recall == 1.0);
    CHECK(report.auc == 1.0);
    CHECK(report.loss < 0.05);
    CHECK(report.averaging == Averaging::macro);
    CHECK(warnings.empty());

    SUBCASE("micro averaging ties precision/recall to accuracy") {
        MetricsReport micro = evaluate(model, index, "Training", 32, Averaging::micro);
        CHECK(micro.precision == micro.accuracy);
        CHECK(micro.recall == micro.accuracy);
    }
    SUBCASE("empty index rejected") {
        CHECK_THROWS_AS((void)evaluate(model, DatasetIndex{}, "Training"), ConfigError);
    }
}

TEST_CASE("train/val accuracy gap") {
    std::vector<MetricsReport> reports(2);
    reports[0].set_name = "Training";
    reports[0].accuracy = 0.9639;
    reports[1].set_name = "Validation";
    reports[1].accuracy = 0.9619;
    auto gap = train_val_accuracy_gap(reports);
    REQUIRE(gap.has_value());
    CHECK(std::abs(*gap - 0.002) < 1e-9);

    CHECK_FALSE(train_val_accuracy_gap({reports[0]}).has_value());
}
