#pragma once

#include "psieve/corpus_io.hpp"
#include "psieve/pareto_filter.hpp"
#include "psieve/quality_classifier.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace psieve {

struct DomainMeasure {
    double mean = 0.0;             // mean domain probability
    double frac_classified = 0.0;  // share with domain probability > 0.5
    std::uint64_t n = 0;
};

/// Throws Error("empty filtered set") when docs is empty.
DomainMeasure mean_domain_probability(std::span<const Document> docs, const LinearModel& domain_model,
                                      std::size_t workers = 0);

/// Same measure over precomputed domain scores, restricted to entries whose
/// mask flag is set (all entries when mask is empty).
DomainMeasure measure_domain_scores(std::span<const double> domain_scores,
                                    std::span<const unsigned char> mask = {});

/// One filtering level. alpha == 0 is the unfiltered baseline. The two
/// domain readings are absent when nothing survived.
struct CompositionPoint {
    double alpha = 0.0;
    double discard_fraction = 0.0;
    std::optional<double> mean_domain_prob;
    std::optional<double> frac_classified_domain;
    std::uint64_t n_survivors = 0;
};

/// Points sorted by discard_fraction ascending (ties keep alpha order).
struct CompositionCurve {
    std::string domain_label;
    std::vector<CompositionPoint> points;
    std::vector<std::string> warnings;
};

/// Filters the corpus with the quality model at each alpha (0 is always
/// prepended) and measures the domain model over the survivors.
CompositionCurve composition_curve(std::span<const Document> corpus, const LinearModel& quality_model,
                                   const LinearModel& domain_model, std::span<const double> alphas,
                                   std::uint64_t seed, std::size_t workers = 0,
                                   std::string domain_label = {});

/// Core of composition_curve over precomputed scores (aligned arrays).
CompositionCurve composition_curve_scored(std::span<const ScoredDoc> quality_scores,
                                          std::span<const double> domain_scores, std::span<const double> alphas,
                                          std::uint64_t seed, std::string domain_label, std::size_t workers = 1);

inline constexpr std::string_view kCurveCsvHeader =
    "domain,alpha,discard_fraction,mean_domain_prob,frac_classified_domain,n_survivors";

std::string render_curve_csv(const CompositionCurve& curve);

}  // namespace psieve
