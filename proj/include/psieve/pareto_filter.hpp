#pragma once

#include "psieve/corpus_io.hpp"
#include "psieve/quality_classifier.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace psieve {

// Stochastic Pareto-threshold filter.
//
// Each document draws a threshold tau from a Lomax law (Pareto type II, unit
// scale, support [0, inf)) with shape alpha, and is kept iff
// tau > 1 - score. The classical Pareto with minimum 1 would make tau >= 1
// and keep everything, hence the shifted form. The keep probability has the
// closed form (2 - score)^(-alpha): larger alpha means a stricter filter, yet
// every score keeps a chance of at least 2^(-alpha).
//
// The uniform draw for a document comes from mix64(seed, doc.id), so a decision
// depends only on (seed, id, alpha, score). Sweeping alpha with one seed
// therefore yields nested keep sets.

struct FilterPolicy {
    double alpha = 1.0;
    std::uint64_t seed = 0;
    std::filesystem::path quality_model_path;

    /// Throws Error unless alpha is positive and finite.
    void validate() const;
};

/// Inverse-CDF Lomax sample: (1 - u)^(-1/alpha) - 1, for u in [0, 1).
double sample_threshold(double alpha, double u);

/// P(tau > 1 - score) = (2 - score)^(-alpha). alpha == 0 means "no filter".
double keep_probability(double score, double alpha);

/// The per-document uniform draw, strictly inside (0, 1).
double document_uniform(std::uint64_t seed, std::uint64_t doc_id);

/// Keep rule for an explicit uniform draw.
bool decide_with_uniform(double u, double score, double alpha);

bool decide(const Document& doc, double score, const FilterPolicy& policy);
bool decide(std::uint64_t doc_id, double score, double alpha, std::uint64_t seed);

/// Kept/discarded accounting for one filtering run. Only counts and sums are
/// accumulated, in input order.
struct FilterStats {
    double alpha = 0.0;
    std::uint64_t n_seen = 0;
    std::uint64_t n_kept = 0;
    std::uint64_t bytes_seen = 0;
    std::uint64_t bytes_kept = 0;
    double sum_score_kept = 0.0;
    double sum_score_discarded = 0.0;

    void record(std::uint64_t byte_len, double score, bool kept);

    double fraction_discarded_docs() const;
    double fraction_discarded_bytes() const;
    /// NaN when no document falls in the group.
    double mean_score_kept() const;
    double mean_score_discarded() const;
};

struct ScoredDoc {
    std::uint64_t id = 0;
    std::uint64_t byte_len = 0;
    double score = 0.0;
};

/// Applies the keep rule to pre-scored documents. If kept is non-null it
/// receives one flag per input. alpha == 0 keeps everything.
FilterStats filter_scored(std::span<const ScoredDoc> docs, double alpha, std::uint64_t seed,
                          std::vector<unsigned char>* kept = nullptr, std::size_t workers = 1);

/// Scores documents in parallel; output order matches input order.
std::vector<ScoredDoc> score_documents(std::span<const Document> docs, const LinearModel& model,
                                       std::size_t workers = 0);

/// Streams a reader through score -> decide, calling on_kept for each
/// surviving document in input order. Scoring runs in batches over
/// `workers` threads; the output is identical for any worker count.
FilterStats filter_stream(DocumentReader& reader, const LinearModel& model, const FilterPolicy& policy,
                          const std::function<void(const Document&)>& on_kept, std::size_t workers = 0,
                          std::size_t batch_size = 8192);

/// Loads the model named by policy.quality_model_path and filters a stream.
FilterStats filter_stream(DocumentReader& reader, const FilterPolicy& policy,
                          const std::function<void(const Document&)>& on_kept, std::size_t workers = 0);

/// In-memory variant returning the survivors.
std::pair<std::vector<Document>, FilterStats> filter_documents(std::span<const Document> docs,
                                                               const LinearModel& model,
                                                               const FilterPolicy& policy,
                                                               std::size_t workers = 0);

struct SweepRow {
    double alpha = 0.0;
    FilterStats stats;
};

/// One row per alpha, ascending.
struct SweepReport {
    std::vector<SweepRow> rows;
};

SweepReport sweep(std::span<const Document> docs, const LinearModel& model, std::span<const double> alphas,
                  std::uint64_t seed, std::size_t workers = 0);
SweepReport sweep_scored(std::span<const ScoredDoc> docs, std::span<const double> alphas, std::uint64_t seed,
                         std::size_t workers = 1);

inline constexpr std::string_view kSweepCsvHeader =
    "alpha,n_seen,n_kept,fraction_discarded_docs,fraction_discarded_bytes,mean_score_kept,mean_score_discarded";
inline constexpr std::string_view kStatsCsvHeader =
    "alpha,n_seen,n_kept,bytes_seen,bytes_kept,fraction_discarded_docs,fraction_discarded_bytes,"
    "mean_score_kept,mean_score_discarded";

/// Table-style CSV: fractions with 4 decimals, mean scores with 6 decimals
/// (empty when undefined).
std::string render_sweep_csv(const SweepReport& report);
/// Parses render_sweep_csv output. Byte counts are not part of the format;
/// they are reconstructed so that fraction_discarded_bytes round-trips at
/// the printed precision.
SweepReport parse_sweep_csv(std::string_view text);

/// Full single-run statistics including byte counts.
std::string render_stats_csv(const FilterStats& stats);

/// Parses a comma-separated alpha list such as "1,2,3,4,5,8".
std::vector<double> parse_alpha_list(std::string_view text);

}  // namespace psieve
