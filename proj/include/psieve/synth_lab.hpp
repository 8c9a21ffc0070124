#pragma once

#include "psieve/corpus_io.hpp"
#include "psieve/quality_classifier.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace psieve {

// Synthetic corpora with a known ground truth.
//
// Three populations: REF (reference-style high quality), MIN (a minority
// domain that is also high quality) and JUNK. REF and MIN documents draw
// tokens uniformly from their own style vocabulary plus a shared quality
// vocabulary; JUNK draws from a noise vocabulary. A quality proxy trained as
// "REF vs raw mix" learns REF style as its notion of quality, which is the
// mechanism behind over-filtering.

enum class Population { Ref, Minority, Junk };

std::string_view population_name(Population p);

struct SynthMix {
    double ref_quality = 0.3;
    double minority_quality = 0.2;
    double junk = 0.5;
};

struct SynthSpec {
    std::uint64_t n_docs = 20000;
    SynthMix mix;
    std::uint32_t doc_len = 50;
    std::uint32_t ref_vocab = 500;
    std::uint32_t minority_vocab = 500;
    std::uint32_t quality_vocab = 200;
    std::uint32_t noise_vocab = 2000;
    std::uint64_t seed = 0;

    void validate() const;
};

/// JSON form:
/// {"n_docs": 20000, "mix": {"ref_quality": 0.3, "minority_quality": 0.2, "junk": 0.5},
///  "doc_len": 50, "vocab": {"ref_style": 500, "minority_style": 500, "quality": 200, "noise": 2000},
///  "seed": 0}
/// Missing keys take the defaults above; unknown keys are rejected.
SynthSpec parse_synth_spec(std::string_view json_text);
std::string synth_spec_to_json(const SynthSpec& spec);

struct SynthDocument {
    Document doc;
    Population population = Population::Junk;

    int true_quality() const { return population == Population::Junk ? 0 : 1; }
};

/// Deterministic in spec.seed.
std::vector<SynthDocument> generate_corpus(const SynthSpec& spec);

/// One filtering level of the experiment. Optional fields are absent when
/// the survivor set (or its true-quality part) is empty.
struct ExperimentPoint {
    double alpha = 0.0;
    double discard_fraction = 0.0;
    std::uint64_t n_survivors = 0;
    std::uint64_t n_ref = 0;
    std::uint64_t n_minority = 0;
    std::uint64_t n_junk = 0;
    std::optional<double> mean_true_quality;
    std::optional<double> latent_minority_fraction;   // MIN / survivors
    std::optional<double> minority_share_of_quality;  // MIN / (REF + MIN)
    std::optional<double> probe_mean_domain_prob;
    std::optional<double> probe_frac_classified_domain;
    std::optional<double> domain_entropy;  // normalized binary entropy of the REF/MIN split
    std::optional<double> composite;       // mean_true_quality * domain_entropy
};

struct ExperimentReport {
    SynthSpec spec;
    std::vector<ExperimentPoint> points;  // sorted by alpha
    double proxy_train_accuracy = 0.0;
    double probe_train_accuracy = 0.0;
    std::vector<std::string> warnings;

    const ExperimentPoint& at_alpha(double alpha) const;
};

/// Normalized binary entropy in bits; 0 at p in {0, 1}, 1 at p = 0.5.
double binary_entropy(double p);

/// The α grid used when none is given: {0, 1, 2, 3, 4, 5, 6, 7, 8}.
std::vector<double> default_experiment_alphas();

/// Runs the full pipeline on a synthetic corpus:
///  1. quality proxy trained on fresh REF documents (positive) against a
///     fresh unfiltered mixed sample (negative);
///  2. domain probe trained on fresh MIN (positive) against fresh REF;
///  3. the corpus is filtered at every alpha with seed spec.seed and the
///     survivors are measured against the latent tags and the probe.
/// alphas must contain 0. When out_dir is non-empty, quality_curve.csv,
/// composition_curve.csv, composite_curve.csv and spec.json are written.
ExperimentReport goodhart_experiment(const SynthSpec& spec, std::span<const double> alphas,
                                     const std::filesystem::path& out_dir = {}, std::size_t workers = 0);

inline constexpr std::string_view kQualityCurveHeader =
    "alpha,discard_fraction,n_survivors,n_ref,n_minority,n_junk,mean_true_quality,latent_minority_fraction";
inline constexpr std::string_view kCompositeCurveHeader =
    "alpha,discard_fraction,mean_true_quality,minority_share_of_quality,domain_entropy,composite";

std::string render_quality_curve_csv(const ExperimentReport& report);
std::string render_composition_curve_csv(const ExperimentReport& report);
std::string render_composite_curve_csv(const ExperimentReport& report);

}  // namespace psieve
