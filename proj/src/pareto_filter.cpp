#include "psieve/pareto_filter.hpp"

#include "psieve/csv.hpp"
#include "psieve/error.hpp"
#include "psieve/keyed_rng.hpp"
#include "psieve/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace psieve {

void FilterPolicy::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error("alpha must be a positive finite number");
}

double sample_threshold(double alpha, double u) { return std::pow(1.0 - u, -1.0 / alpha) - 1.0; }

double keep_probability(double score, double alpha) {
    if (alpha == 0.0) return 1.0;
    return std::pow(2.0 - score, -alpha);
}

// Midpoint mapping onto (0, 1): u is never 0, so tau > 0 and a score of 1 is
// always kept.
double document_uniform(std::uint64_t seed, std::uint64_t doc_id) {
    return (static_cast<double>(mix64(seed, doc_id) >> 11) + 0.5) * 0x1.0p-53;
}

bool decide_with_uniform(double u, double score, double alpha) {
    if (alpha == 0.0) return true;
    return sample_threshold(alpha, u) > 1.0 - score;
}

bool decide(std::uint64_t doc_id, double score, double alpha, std::uint64_t seed) {
    return decide_with_uniform(document_uniform(seed, doc_id), score, alpha);
}

bool decide(const Document& doc, double score, const FilterPolicy& policy) {
    return decide(doc.id, score, policy.alpha, policy.seed);
}

void FilterStats::record(std::uint64_t byte_len, double score, bool kept) {
    ++n_seen;
    bytes_seen += byte_len;
    if (kept) {
        ++n_kept;
        bytes_kept += byte_len;
        sum_score_kept += score;
    } else {
        sum_score_discarded += score;
    }
}

double FilterStats::fraction_discarded_docs() const {
    if (n_seen == 0) return 0.0;
    return 1.0 - static_cast<double>(n_kept) / static_cast<double>(n_seen);
}

double FilterStats::fraction_discarded_bytes() const {
    if (bytes_seen == 0) return 0.0;
    return 1.0 - static_cast<double>(bytes_kept) / static_cast<double>(bytes_seen);
}

double FilterStats::mean_score_kept() const {
    if (n_kept == 0) return std::numeric_limits<double>::quiet_NaN();
    return sum_score_kept / static_cast<double>(n_kept);
}

double FilterStats::mean_score_discarded() const {
    const std::uint64_t n = n_seen - n_kept;
    if (n == 0) return std::numeric_limits<double>::quiet_NaN();
    return sum_score_discarded / static_cast<double>(n);
}

FilterStats filter_scored(std::span<const ScoredDoc> docs, double alpha, std::uint64_t seed,
                          std::vector<unsigned char>* kept, std::size_t workers) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error("alpha must be a non-negative finite number");
    std::vector<unsigned char> local;
    std::vector<unsigned char>& flags = kept != nullptr ? *kept : local;
    flags.assign(docs.size(), 0);
    parallel_for(docs.size(), workers,
                 [&](std::size_t i) { flags[i] = decide(docs[i].id, docs[i].score, alpha, seed); });

    FilterStats stats;
    stats.alpha = alpha;
    for (std::size_t i = 0; i < docs.size(); ++i) stats.record(docs[i].byte_len, docs[i].score, flags[i] != 0);
    return stats;
}

std::vector<ScoredDoc> score_documents(std::span<const Document> docs, const LinearModel& model,
                                       std::size_t workers) {
    std::vector<ScoredDoc> out(docs.size());
    parallel_for(docs.size(), workers, [&](std::size_t i) {
        out[i] = {docs[i].id, docs[i].byte_len, score(model, docs[i])};
    });
    return out;
}

FilterStats filter_stream(DocumentReader& reader, const LinearModel& model, const FilterPolicy& policy,
                          const std::function<void(const Document&)>& on_kept, std::size_t workers,
                          std::size_t batch_size) {
    policy.validate();
    if (batch_size == 0) batch_size = 1;
    FilterStats stats;
    stats.alpha = policy.alpha;
    std::vector<Document> batch;
    std::vector<unsigned char> flags;
    for (;;) {
        batch.clear();
        if (reader.next_batch(batch, batch_size) == 0) break;
        const auto scored = score_documents(batch, model, workers);
        flags.assign(batch.size(), 0);
        parallel_for(batch.size(), workers, [&](std::size_t i) {
            flags[i] = decide(scored[i].id, scored[i].score, policy.alpha, policy.seed);
        });
        // Sums are folded in input order, so they do not depend on the worker count.
        for (std::size_t i = 0; i < batch.size(); ++i) {
            stats.record(batch[i].byte_len, scored[i].score, flags[i] != 0);
            if (flags[i] && on_kept) on_kept(batch[i]);
        }
    }
    return stats;
}

FilterStats filter_stream(DocumentReader& reader, const FilterPolicy& policy,
                          const std::function<void(const Document&)>& on_kept, std::size_t workers) {
    const LinearModel model = load_model(policy.quality_model_path);
    return filter_stream(reader, model, policy, on_kept, workers);
}

std::pair<std::vector<Document>, FilterStats> filter_documents(std::span<const Document> docs,
                                                               const LinearModel& model,
                                                               const FilterPolicy& policy,
                                                               std::size_t workers) {
    policy.validate();
    const auto scored = score_documents(docs, model, workers);
    std::vector<unsigned char> flags;
    FilterStats stats = filter_scored(scored, policy.alpha, policy.seed, &flags, workers);
    std::vector<Document> kept;
    kept.reserve(stats.n_kept);
    for (std::size_t i = 0; i < docs.size(); ++i)
        if (flags[i]) kept.push_back(docs[i]);
    return {std::move(kept), stats};
}

SweepReport sweep_scored(std::span<const ScoredDoc> docs, std::span<const double> alphas, std::uint64_t seed,
                         std::size_t workers) {
    if (alphas.empty()) throw Error("sweep: empty alpha list");
    std::vector<double> sorted(alphas.begin(), alphas.end());
    std::sort(sorted.begin(), sorted.end());
    SweepReport report;
    for (const double a : sorted) {
        if (!(a > 0.0) || !std::isfinite(a)) throw Error("sweep: alpha must be positive and finite");
        report.rows.push_back({a, filter_scored(docs, a, seed, nullptr, workers)});
    }
    return report;
}

SweepReport sweep(std::span<const Document> docs, const LinearModel& model, std::span<const double> alphas,
                  std::uint64_t seed, std::size_t workers) {
    if (alphas.empty()) throw Error("sweep: empty alpha list");
    const auto scored = score_documents(docs, model, workers);
    return sweep_scored(scored, alphas, seed, workers);
}

namespace {

std::string mean_field(double v) { return std::isnan(v) ? std::string() : csv::fixed(v, 6); }

double parse_double(const std::string& s, std::string_view what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (s.empty() || used != s.size()) throw Error("invalid " + std::string(what) + " '" + s + "'");
    return v;
}

std::uint64_t parse_count(const std::string& s, std::string_view what) {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
        v = std::stoull(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (s.empty() || used != s.size() || s.front() == '-')
        throw Error("invalid " + std::string(what) + " '" + s + "'");
    return v;
}

}  // namespace

std::string render_sweep_csv(const SweepReport& report) {
    std::string out(kSweepCsvHeader);
    out += '\n';
    for (const auto& row : report.rows) {
        const auto& s = row.stats;
        out += csv::number(row.alpha) + ',' + std::to_string(s.n_seen) + ',' + std::to_string(s.n_kept) + ',' +
               csv::fixed(s.fraction_discarded_docs(), 4) + ',' + csv::fixed(s.fraction_discarded_bytes(), 4) + ',' +
               mean_field(s.mean_score_kept()) + ',' + mean_field(s.mean_score_discarded()) + '\n';
    }
    return out;
}

SweepReport parse_sweep_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || csv::split(line) != csv::split(kSweepCsvHeader))
        throw Error("sweep report: unexpected header");
    SweepReport report;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto f = csv::split(line);
        if (f.size() != 7) throw Error("sweep report line " + std::to_string(line_no) + ": expected 7 fields");
        SweepRow row;
        row.alpha = parse_double(f[0], "alpha");
        auto& s = row.stats;
        s.alpha = row.alpha;
        s.n_seen = parse_count(f[1], "n_seen");
        s.n_kept = parse_count(f[2], "n_kept");
        if (s.n_kept > s.n_seen) throw Error("sweep report line " + std::to_string(line_no) + ": n_kept > n_seen");
        // Bytes are represented on a 10^4 grid, the printed precision.
        const double frac_bytes = parse_double(f[4], "fraction_discarded_bytes");
        s.bytes_seen = 10000;
        s.bytes_kept = static_cast<std::uint64_t>(std::llround((1.0 - frac_bytes) * 10000.0));
        if (!f[5].empty()) s.sum_score_kept = parse_double(f[5], "mean_score_kept") * static_cast<double>(s.n_kept);
        if (!f[6].empty())
            s.sum_score_discarded =
                parse_double(f[6], "mean_score_discarded") * static_cast<double>(s.n_seen - s.n_kept);
        report.rows.push_back(row);
    }
    return report;
}

std::string render_stats_csv(const FilterStats& s) {
    std::string out(kStatsCsvHeader);
    out += '\n';
    out += csv::number(s.alpha) + ',' + std::to_string(s.n_seen) + ',' + std::to_string(s.n_kept) + ',' +
           std::to_string(s.bytes_seen) + ',' + std::to_string(s.bytes_kept) + ',' +
           csv::fixed(s.fraction_discarded_docs(), 4) + ',' + csv::fixed(s.fraction_discarded_bytes(), 4) + ',' +
           mean_field(s.mean_score_kept()) + ',' + mean_field(s.mean_score_discarded()) + '\n';
    return out;
}

std::vector<double> parse_alpha_list(std::string_view text) {
    std::vector<double> out;
    for (const auto& field : csv::split(text)) {
        const double a = parse_double(field, "alpha");
        if (!(a >= 0.0) || !std::isfinite(a)) throw Error("alpha must be non-negative: '" + field + "'");
        out.push_back(a);
    }
    if (out.empty()) throw Error("empty alpha list");
    return out;
}

}  // namespace psieve
