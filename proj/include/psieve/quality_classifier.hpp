#pragma once

#include "psieve/corpus_io.hpp"
#include "psieve/text_features.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace psieve {

struct TrainConfig {
    std::uint32_t epochs = 5;
    double learning_rate = 0.1;
    std::uint64_t seed = 0;
    FeatureConfig features;

    void validate() const;
};

struct TrainMeta {
    std::uint32_t epochs = 0;
    double learning_rate = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t n_pos = 0;
    std::uint64_t n_neg = 0;
};

/// Logistic regression over hashed n-gram counts. The score is the
/// probability of the positive ("high quality") class and always lies
/// strictly inside (0, 1). Immutable after training; safe to share across
/// threads for scoring.
struct LinearModel {
    FeatureConfig cfg;
    std::vector<double> weights;  // cfg.buckets entries
    double bias = 0.0;
    std::string positive_label = "positive";
    std::string negative_label = "negative";
    TrainMeta train_meta;

    /// Zero weights and bias for the given feature layout.
    static LinearModel zeros(const FeatureConfig& cfg);

    double margin(const FeatureVector& x) const;
    double score(const FeatureVector& x) const;
    double score_text(std::string_view text) const;
};

/// Logistic function clamped into the open interval (0, 1).
double sigmoid(double z);

double score(const LinearModel& model, const Document& doc);

/// Gradient of the per-example logistic loss with respect to the weights
/// (sparse, aligned with x.entries) and the bias.
struct Gradient {
    std::vector<double> weights;
    double bias = 0.0;
};

/// Logistic loss softplus(z) - y*z at margin z = w.x + b.
double example_loss(const LinearModel& model, const FeatureVector& x, bool positive);
Gradient example_gradient(const LinearModel& model, const FeatureVector& x, bool positive);

/// One SGD step: w <- w + lr (y - sigma(w.x + b)) x, and likewise for the bias.
void sgd_step(LinearModel& model, const FeatureVector& x, bool positive, double learning_rate);

struct LabeledLabels {
    std::string positive = "positive";
    std::string negative = "negative";
};

/// Fits the model by SGD from zero initialization. Each epoch visits a
/// keyed shuffle (seed, epoch) of the interleaved examples p0, n0, p1, n1, ...
/// Single-threaded; identical inputs and config give identical weights.
LinearModel train(std::span<const Document> positives, std::span<const Document> negatives,
                  const TrainConfig& tc, const LabeledLabels& labels = {});

struct EvalResult {
    double accuracy = 0.0;
    std::uint64_t n = 0;
};

/// Positives count as correct when score > 0.5, negatives when score <= 0.5.
EvalResult evaluate(const LinearModel& model, std::span<const Document> positives,
                    std::span<const Document> negatives);

/// Mean logistic loss over both classes.
double mean_loss(const LinearModel& model, std::span<const Document> positives,
                 std::span<const Document> negatives);

/// Binary model file: "PSIEVE1\0", little-endian header (ngram_order u32,
/// buckets u64, epochs u32, learning_rate f64, seed u64), bias f64,
/// buckets x f64 weights, then the positive and negative labels each as a
/// u32 byte length followed by UTF-8 bytes.
void save_model(const LinearModel& model, const std::filesystem::path& path);
LinearModel load_model(const std::filesystem::path& path);

std::string encode_model(const LinearModel& model);
LinearModel decode_model(std::string_view bytes, const std::string& origin = "<memory>");

}  // namespace psieve
