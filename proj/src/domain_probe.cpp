#include "psieve/domain_probe.hpp"

#include "psieve/csv.hpp"
#include "psieve/error.hpp"
#include "psieve/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace psieve {

DomainMeasure measure_domain_scores(std::span<const double> domain_scores, std::span<const unsigned char> mask) {
    if (!mask.empty() && mask.size() != domain_scores.size()) throw Error("domain probe: mask size mismatch");
    DomainMeasure m;
    double sum = 0.0;
    std::uint64_t above = 0;
    for (std::size_t i = 0; i < domain_scores.size(); ++i) {
        if (!mask.empty() && !mask[i]) continue;
        sum += domain_scores[i];
        above += domain_scores[i] > 0.5;
        ++m.n;
    }
    if (m.n == 0) throw Error("empty filtered set");
    m.mean = sum / static_cast<double>(m.n);
    m.frac_classified = static_cast<double>(above) / static_cast<double>(m.n);
    return m;
}

DomainMeasure mean_domain_probability(std::span<const Document> docs, const LinearModel& domain_model,
                                      std::size_t workers) {
    if (docs.empty()) throw Error("empty filtered set");
    std::vector<double> scores(docs.size());
    parallel_for(docs.size(), workers, [&](std::size_t i) { scores[i] = score(domain_model, docs[i]); });
    return measure_domain_scores(scores);
}

CompositionCurve composition_curve_scored(std::span<const ScoredDoc> quality_scores,
                                          std::span<const double> domain_scores, std::span<const double> alphas,
                                          std::uint64_t seed, std::string domain_label, std::size_t workers) {
    if (alphas.empty()) throw Error("composition curve: empty alpha list");
    if (quality_scores.size() != domain_scores.size()) throw Error("composition curve: score arrays differ in size");

    std::vector<double> grid{0.0};
    for (const double a : alphas) {
        if (!(a >= 0.0) || !std::isfinite(a)) throw Error("composition curve: alpha must be non-negative");
        if (a > 0.0) grid.push_back(a);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    CompositionCurve curve;
    curve.domain_label = std::move(domain_label);
    std::vector<unsigned char> kept;
    for (const double a : grid) {
        const FilterStats stats = filter_scored(quality_scores, a, seed, &kept, workers);
        CompositionPoint p;
        p.alpha = a;
        p.discard_fraction = stats.fraction_discarded_docs();
        p.n_survivors = stats.n_kept;
        if (stats.n_kept > 0) {
            const DomainMeasure m = measure_domain_scores(domain_scores, kept);
            p.mean_domain_prob = m.mean;
            p.frac_classified_domain = m.frac_classified;
        } else {
            curve.warnings.push_back("alpha=" + csv::number(a) + ": no documents survived filtering");
        }
        curve.points.push_back(p);
    }
    std::stable_sort(curve.points.begin(), curve.points.end(),
                     [](const CompositionPoint& x, const CompositionPoint& y) {
                         return x.discard_fraction < y.discard_fraction;
                     });
    return curve;
}

CompositionCurve composition_curve(std::span<const Document> corpus, const LinearModel& quality_model,
                                   const LinearModel& domain_model, std::span<const double> alphas,
                                   std::uint64_t seed, std::size_t workers, std::string domain_label) {
    const auto quality = score_documents(corpus, quality_model, workers);
    std::vector<double> domain(corpus.size());
    parallel_for(corpus.size(), workers, [&](std::size_t i) { domain[i] = score(domain_model, corpus[i]); });
    if (domain_label.empty()) domain_label = domain_model.positive_label;
    return composition_curve_scored(quality, domain, alphas, seed, std::move(domain_label), workers);
}

std::string render_curve_csv(const CompositionCurve& curve) {
    std::string out(kCurveCsvHeader);
    out += '\n';
    const auto opt = [](const std::optional<double>& v) { return v ? csv::fixed(*v, 6) : std::string(); };
    for (const auto& p : curve.points) {
        out += curve.domain_label + ',' + csv::number(p.alpha) + ',' + csv::fixed(p.discard_fraction, 6) + ',' +
               opt(p.mean_domain_prob) + ',' + opt(p.frac_classified_domain) + ',' + std::to_string(p.n_survivors) +
               '\n';
    }
    return out;
}

}  // namespace psieve
