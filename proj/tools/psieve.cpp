// psieve: corpus quality filtering with Pareto-thresholded classifier scores.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include "psieve/corpus_io.hpp"
#include "psieve/csv.hpp"
#include "psieve/domain_probe.hpp"
#include "psieve/error.hpp"
#include "psieve/eval_aggregate.hpp"
#include "psieve/keyed_rng.hpp"
#include "psieve/pareto_filter.hpp"
#include "psieve/parallel.hpp"
#include "psieve/quality_classifier.hpp"
#include "psieve/synth_lab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace fs = std::filesystem;
using namespace psieve;

namespace {

struct GlobalOptions {
    std::uint64_t seed = 0;
    std::size_t workers = 0;
    bool verbose = false;

    std::size_t worker_count() const { return workers == 0 ? default_workers() : workers; }
};

GlobalOptions g;

void log(const std::string& msg) {
    if (g.verbose) std::cerr << "[psieve] " << msg << '\n';
}

void write_text(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
    if (!out) throw Error("write failed for " + path.string());
}

std::vector<fs::path> to_paths(const std::vector<std::string>& in) { return {in.begin(), in.end()}; }

// Scores a document stream batch by batch, keeping only (id, bytes, score).
struct ScoredStream {
    std::vector<ScoredDoc> quality;
    std::vector<double> domain;
};

ScoredStream score_stream(const std::vector<std::string>& inputs, const std::string& format,
                          const LinearModel& quality, const LinearModel* domain) {
    DocumentReader reader(to_paths(inputs), parse_format(format));
    ScoredStream out;
    std::vector<Document> batch;
    while (true) {
        batch.clear();
        if (reader.next_batch(batch, 8192) == 0) break;
        const auto scored = score_documents(batch, quality, g.worker_count());
        out.quality.insert(out.quality.end(), scored.begin(), scored.end());
        if (domain != nullptr) {
            std::vector<double> ds(batch.size());
            parallel_for(batch.size(), g.worker_count(), [&](std::size_t i) { ds[i] = score(*domain, batch[i]); });
            out.domain.insert(out.domain.end(), ds.begin(), ds.end());
        }
    }
    log("scored " + std::to_string(out.quality.size()) + " documents");
    return out;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
    std::vector<std::string> pos, neg;
    std::string format = "jsonl";
    std::uint32_t ngram = 2;
    std::uint64_t buckets = std::uint64_t{1} << 20;
    std::uint32_t epochs = 5;
    double lr = 0.1;
    std::string out;
    double holdout = 0.0;
    std::string pos_label = "positive", neg_label = "negative";
};

// Holdout membership is keyed on (seed, class, id) so it is reproducible.
void split_holdout(std::vector<Document> docs, double fraction, std::uint64_t tag, std::vector<Document>& train_set,
                   std::vector<Document>& held) {
    const std::uint64_t key = derive_key(g.seed, tag);
    for (auto& d : docs) {
        if (fraction > 0.0 && keyed_unit(key, d.id) < fraction)
            held.push_back(std::move(d));
        else
            train_set.push_back(std::move(d));
    }
}

int run_train(const TrainArgs& a) {
    const auto format = parse_format(a.format);
    auto pos = read_documents(to_paths(a.pos), format);
    auto neg = read_documents(to_paths(a.neg), format);
    std::vector<Document> pos_train, pos_held, neg_train, neg_held;
    split_holdout(std::move(pos), a.holdout, 0x706F73, pos_train, pos_held);
    split_holdout(std::move(neg), a.holdout, 0x6E6567, neg_train, neg_held);
    log("training on " + std::to_string(pos_train.size()) + " positive / " + std::to_string(neg_train.size()) +
        " negative documents");

    TrainConfig tc;
    tc.epochs = a.epochs;
    tc.learning_rate = a.lr;
    tc.seed = g.seed;
    tc.features = {a.ngram, a.buckets};
    const auto t0 = std::chrono::steady_clock::now();
    const LinearModel model = train(pos_train, neg_train, tc, {a.pos_label, a.neg_label});
    log("trained in " +
        std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) + " s");
    save_model(model, a.out);

    const EvalResult tr = evaluate(model, pos_train, neg_train);
    std::cout << "train_accuracy=" << csv::fixed(tr.accuracy, 4) << " n=" << tr.n << '\n';
    if (a.holdout > 0.0) {
        if (pos_held.empty() && neg_held.empty()) throw Error("holdout set is empty; raise --holdout");
        const EvalResult ho = evaluate(model, pos_held, neg_held);
        std::cout << "holdout_accuracy=" << csv::fixed(ho.accuracy, 4) << " n=" << ho.n << '\n';
    }
    return 0;
}

// ---- filter ----------------------------------------------------------------

struct FilterArgs {
    std::string model;
    double alpha = 1.0;
    double target_bytes = 40e9;
    std::vector<std::string> in;
    std::string format = "jsonl";
    std::string out;
};

int run_filter(const FilterArgs& a) {
    FilterPolicy policy{a.alpha, g.seed, a.model};
    policy.validate();
    const LinearModel model = load_model(policy.quality_model_path);
    DocumentReader reader(to_paths(a.in), parse_format(a.format));
    if (a.target_bytes != std::floor(a.target_bytes) || a.target_bytes > 1.8e19)
        throw Error("--target-bytes must be a whole number of bytes");
    ChunkWriter writer(a.out, static_cast<std::uint64_t>(a.target_bytes));
    const FilterStats stats =
        filter_stream(reader, model, policy, [&](const Document& d) { writer.add(d); }, g.worker_count());
    const ChunkManifest manifest = writer.finish();
    write_text(fs::path(a.out) / "stats.csv", render_stats_csv(stats));
    std::cout << "n_seen=" << stats.n_seen << " n_kept=" << stats.n_kept
              << " fraction_discarded_docs=" << csv::fixed(stats.fraction_discarded_docs(), 4)
              << " chunks=" << manifest.chunk_paths.size() << '\n';
    return 0;
}

// ---- sweep -----------------------------------------------------------------

struct SweepArgs {
    std::string model;
    std::string alphas = "1,2,3,4,5,8";
    std::vector<std::string> in;
    std::string format = "jsonl";
    std::string out;
};

int run_sweep(const SweepArgs& a) {
    const auto alphas = parse_alpha_list(a.alphas);
    for (const double x : alphas)
        if (x <= 0.0) throw Error("sweep alphas must be positive");
    const LinearModel model = load_model(a.model);
    const auto scored = score_stream(a.in, a.format, model, nullptr);
    const SweepReport report = sweep_scored(scored.quality, alphas, g.seed, g.worker_count());
    const std::string text = render_sweep_csv(report);
    write_text(a.out, text);
    if (g.verbose) std::cerr << text;
    return 0;
}

// ---- probe -----------------------------------------------------------------

struct ProbeArgs {
    std::string quality_model, domain_model;
    std::string alphas = "1,2,3,4,5,8";
    std::vector<std::string> in;
    std::string format = "jsonl";
    std::string out;
    std::string label;
};

int run_probe(const ProbeArgs& a) {
    const auto alphas = parse_alpha_list(a.alphas);
    const LinearModel quality = load_model(a.quality_model);
    const LinearModel domain = load_model(a.domain_model);
    const auto scored = score_stream(a.in, a.format, quality, &domain);
    const CompositionCurve curve = composition_curve_scored(
        scored.quality, scored.domain, alphas, g.seed, a.label.empty() ? domain.positive_label : a.label,
        g.worker_count());
    for (const auto& w : curve.warnings) std::cerr << "warning: " << w << '\n';
    write_text(a.out, render_curve_csv(curve));
    return 0;
}

// ---- aggregate -------------------------------------------------------------

struct AggregateArgs {
    std::string in, out;
};

int run_aggregate(const AggregateArgs& a) {
    const ParsedResults parsed = parse_results_csv(read_file(a.in));
    for (const auto& t : parsed.skipped) std::cerr << "note: excluding perplexity metric '" << t << "'\n";
    const auto rows = aggregate_curve(parsed.results);
    write_text(a.out, render_aggregate_csv(rows));
    return 0;
}

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
    std::string spec;
    std::string alphas = "0,1,2,3,4,5,6,7,8";
    std::string out;
};

int run_synth(const SynthArgs& a, bool seed_given) {
    SynthSpec spec;
    if (!a.spec.empty()) spec = parse_synth_spec(read_file(a.spec));
    if (seed_given) spec.seed = g.seed;
    auto alphas = parse_alpha_list(a.alphas);
    if (std::find(alphas.begin(), alphas.end(), 0.0) == alphas.end()) alphas.insert(alphas.begin(), 0.0);
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentReport report = goodhart_experiment(spec, alphas, a.out, g.worker_count());
    log("experiment finished in " +
        std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) + " s");
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "proxy_train_accuracy=" << csv::fixed(report.proxy_train_accuracy, 4)
              << " probe_train_accuracy=" << csv::fixed(report.probe_train_accuracy, 4) << '\n';
    std::cout << render_composite_curve_csv(report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"psieve: Pareto-thresholded corpus quality filtering"};
    app.require_subcommand(1);
    app.fallthrough();
    auto* seed_opt = app.add_option("--seed", g.seed, "Seed for all keyed randomness");
    app.add_option("--workers", g.workers, "Worker threads (default: all cores)")->check(CLI::PositiveNumber);
    app.add_flag("-v,--verbose", g.verbose, "Log progress to stderr");

    TrainArgs ta;
    auto* train_cmd = app.add_subcommand("train", "Train a hashed n-gram logistic classifier");
    train_cmd->add_option("--pos", ta.pos, "Positive-class inputs")->required();
    train_cmd->add_option("--neg", ta.neg, "Negative-class inputs")->required();
    train_cmd->add_option("--format", ta.format, "jsonl | txt | txt-dir")->capture_default_str();
    train_cmd->add_option("--ngram", ta.ngram, "Maximum n-gram order")->check(CLI::Range(1, 16))->capture_default_str();
    train_cmd->add_option("--buckets", ta.buckets, "Hash buckets")->check(CLI::Range(std::uint64_t{2}, std::uint64_t{1} << 32))->capture_default_str();
    train_cmd->add_option("--epochs", ta.epochs, "SGD epochs")->check(CLI::PositiveNumber)->capture_default_str();
    train_cmd->add_option("--lr", ta.lr, "Learning rate")->check(CLI::PositiveNumber)->capture_default_str();
    train_cmd->add_option("--out", ta.out, "Model output path")->required();
    train_cmd->add_option("--holdout", ta.holdout, "Fraction of each class held out for evaluation")
        ->check(CLI::Range(0.0, 0.99));
    train_cmd->add_option("--pos-label", ta.pos_label)->capture_default_str();
    train_cmd->add_option("--neg-label", ta.neg_label)->capture_default_str();

    FilterArgs fa;
    auto* filter_cmd = app.add_subcommand("filter", "Filter documents and write byte-budget chunks");
    filter_cmd->add_option("--model", fa.model, "Quality model")->required();
    filter_cmd->add_option("--alpha", fa.alpha, "Pareto shape (larger discards more)")->required()->check(CLI::PositiveNumber);
    filter_cmd->add_option("--target-bytes", fa.target_bytes, "Chunk size budget in serialized bytes (e.g. 40e9)")->check(CLI::Range(1.0, 1.8e19))->capture_default_str();
    filter_cmd->add_option("--in", fa.in, "Input files")->required();
    filter_cmd->add_option("--format", fa.format, "jsonl | txt | txt-dir")->capture_default_str();
    filter_cmd->add_option("--out", fa.out, "Output directory")->required();

    SweepArgs sa;
    auto* sweep_cmd = app.add_subcommand("sweep", "Discard fractions over a list of alphas");
    sweep_cmd->add_option("--model", sa.model, "Quality model")->required();
    sweep_cmd->add_option("--alphas", sa.alphas, "Comma-separated alphas")->capture_default_str();
    sweep_cmd->add_option("--in", sa.in, "Input files")->required();
    sweep_cmd->add_option("--format", sa.format, "jsonl | txt | txt-dir")->capture_default_str();
    sweep_cmd->add_option("--out", sa.out, "Report CSV")->required();

    ProbeArgs pa;
    auto* probe_cmd = app.add_subcommand("probe", "Domain composition of filtered sets");
    probe_cmd->add_option("--quality-model", pa.quality_model, "Quality model")->required();
    probe_cmd->add_option("--domain-model", pa.domain_model, "Domain-vs-reference model")->required();
    probe_cmd->add_option("--alphas", pa.alphas, "Comma-separated alphas (0 is always added)")->capture_default_str();
    probe_cmd->add_option("--in", pa.in, "Input files")->required();
    probe_cmd->add_option("--format", pa.format, "jsonl | txt | txt-dir")->capture_default_str();
    probe_cmd->add_option("--domain-label", pa.label, "Label for the domain column (default: model's positive label)");
    probe_cmd->add_option("--out", pa.out, "Curve CSV")->required();

    AggregateArgs aa;
    auto* agg_cmd = app.add_subcommand("aggregate", "Equal-weight task average with propagated standard error");
    agg_cmd->add_option("--in", aa.in, "Results CSV (task,alpha,accuracy,se,n_instances)")->required();
    agg_cmd->add_option("--out", aa.out, "Aggregate CSV")->required();

    SynthArgs ya;
    auto* synth_cmd = app.add_subcommand("synth", "Synthetic over-filtering experiment");
    synth_cmd->add_option("--spec", ya.spec, "SynthSpec JSON (defaults when omitted)");
    synth_cmd->add_option("--alphas", ya.alphas, "Comma-separated alphas (0 is always added)")->capture_default_str();
    synth_cmd->add_option("--out", ya.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return 2;
    }

    try {
        if (*train_cmd) return run_train(ta);
        if (*filter_cmd) return run_filter(fa);
        if (*sweep_cmd) return run_sweep(sa);
        if (*probe_cmd) return run_probe(pa);
        if (*agg_cmd) return run_aggregate(aa);
        if (*synth_cmd) return run_synth(ya, seed_opt->count() > 0);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
