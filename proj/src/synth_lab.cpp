#include "psieve/synth_lab.hpp"

#include "psieve/csv.hpp"
#include "psieve/domain_probe.hpp"
#include "psieve/error.hpp"
#include "psieve/keyed_rng.hpp"
#include "psieve/pareto_filter.hpp"
#include "psieve/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace psieve {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view population_name(Population p) {
    switch (p) {
        case Population::Ref: return "REF";
        case Population::Minority: return "MIN";
        case Population::Junk: return "JUNK";
    }
    return "?";
}

void SynthSpec::validate() const {
    if (n_docs < 1) throw Error("synth spec: n_docs must be >= 1");
    for (const double p : {mix.ref_quality, mix.minority_quality, mix.junk})
        if (!(p >= 0.0 && p <= 1.0)) throw Error("synth spec: mix proportions must lie in [0, 1]");
    if (std::abs(mix.ref_quality + mix.minority_quality + mix.junk - 1.0) > 1e-12)
        throw Error("synth spec: mix proportions must sum to 1");
    if (doc_len < 1) throw Error("synth spec: doc_len must be >= 1");
    if (ref_vocab < 1 || minority_vocab < 1 || noise_vocab < 1)
        throw Error("synth spec: style and noise vocabularies must be non-empty");
}

SynthSpec parse_synth_spec(std::string_view json_text) {
    json j = json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error("synth spec: not a JSON object");
    SynthSpec s;
    const auto check_keys = [](const json& obj, std::initializer_list<std::string_view> allowed, const char* where) {
        for (const auto& [key, value] : obj.items())
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
                throw Error(std::string("synth spec: unknown key '") + key + "' in " + where);
    };
    try {
        check_keys(j, {"n_docs", "mix", "doc_len", "vocab", "seed"}, "spec");
        if (j.contains("n_docs")) s.n_docs = j.at("n_docs").get<std::uint64_t>();
        if (j.contains("doc_len")) s.doc_len = j.at("doc_len").get<std::uint32_t>();
        if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("mix")) {
            const json& m = j.at("mix");
            check_keys(m, {"ref_quality", "minority_quality", "junk"}, "mix");
            if (m.contains("ref_quality")) s.mix.ref_quality = m.at("ref_quality").get<double>();
            if (m.contains("minority_quality")) s.mix.minority_quality = m.at("minority_quality").get<double>();
            if (m.contains("junk")) s.mix.junk = m.at("junk").get<double>();
        }
        if (j.contains("vocab")) {
            const json& v = j.at("vocab");
            check_keys(v, {"ref_style", "minority_style", "quality", "noise"}, "vocab");
            if (v.contains("ref_style")) s.ref_vocab = v.at("ref_style").get<std::uint32_t>();
            if (v.contains("minority_style")) s.minority_vocab = v.at("minority_style").get<std::uint32_t>();
            if (v.contains("quality")) s.quality_vocab = v.at("quality").get<std::uint32_t>();
            if (v.contains("noise")) s.noise_vocab = v.at("noise").get<std::uint32_t>();
        }
    } catch (const json::exception& e) {
        throw Error(std::string("synth spec: ") + e.what());
    }
    s.validate();
    return s;
}

std::string synth_spec_to_json(const SynthSpec& s) {
    json j;
    j["n_docs"] = s.n_docs;
    j["mix"] = {{"ref_quality", s.mix.ref_quality},
                {"minority_quality", s.mix.minority_quality},
                {"junk", s.mix.junk}};
    j["doc_len"] = s.doc_len;
    j["vocab"] = {{"ref_style", s.ref_vocab},
                  {"minority_style", s.minority_vocab},
                  {"quality", s.quality_vocab},
                  {"noise", s.noise_vocab}};
    j["seed"] = s.seed;
    return j.dump(2) + "\n";
}

namespace {

constexpr std::uint64_t kPopulationTag = 1;
constexpr std::uint64_t kTokenTag = 2;

std::string make_text(const SynthSpec& spec, Population pop, KeyedStream& rng) {
    std::string text;
    text.reserve(spec.doc_len * 6);
    for (std::uint32_t t = 0; t < spec.doc_len; ++t) {
        if (t > 0) text.push_back(' ');
        if (pop == Population::Junk) {
            text += 'n';
            text += std::to_string(rng.next_below(spec.noise_vocab));
            continue;
        }
        const std::uint32_t style = pop == Population::Ref ? spec.ref_vocab : spec.minority_vocab;
        const std::uint64_t k = rng.next_below(std::uint64_t{style} + spec.quality_vocab);
        if (k < style) {
            text += pop == Population::Ref ? 'r' : 'm';
            text += std::to_string(k);
        } else {
            text += 'q';
            text += std::to_string(k - style);
        }
    }
    return text;
}

SynthSpec with_mix(SynthSpec spec, SynthMix mix, std::uint64_t n_docs, std::uint64_t seed) {
    spec.mix = mix;
    spec.n_docs = n_docs;
    spec.seed = seed;
    return spec;
}

std::vector<Document> docs_of(const std::vector<SynthDocument>& corpus) {
    std::vector<Document> out;
    out.reserve(corpus.size());
    for (const auto& s : corpus) out.push_back(s.doc);
    return out;
}

}  // namespace

std::vector<SynthDocument> generate_corpus(const SynthSpec& spec) {
    spec.validate();
    std::vector<SynthDocument> out(spec.n_docs);
    KeyedStream pop_rng(derive_key(spec.seed, kPopulationTag));
    for (auto& d : out) {
        const double u = pop_rng.next_unit();
        if (u < spec.mix.ref_quality)
            d.population = Population::Ref;
        else if (u < spec.mix.ref_quality + spec.mix.minority_quality)
            d.population = Population::Minority;
        else
            d.population = Population::Junk;
    }
    const std::uint64_t token_key = derive_key(spec.seed, kTokenTag);
    for (std::uint64_t i = 0; i < spec.n_docs; ++i) {
        KeyedStream rng(mix64(token_key, i));
        out[i].doc = Document::make(i, make_text(spec, out[i].population, rng),
                                    std::string(population_name(out[i].population)));
    }
    return out;
}

double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

std::vector<double> default_experiment_alphas() { return {0, 1, 2, 3, 4, 5, 6, 7, 8}; }

const ExperimentPoint& ExperimentReport::at_alpha(double alpha) const {
    for (const auto& p : points)
        if (p.alpha == alpha) return p;
    throw Error("experiment report: no point at alpha=" + csv::number(alpha));
}

ExperimentReport goodhart_experiment(const SynthSpec& spec, std::span<const double> alphas,
                                     const fs::path& out_dir, std::size_t workers) {
    spec.validate();
    std::vector<double> grid(alphas.begin(), alphas.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.empty() || grid.front() != 0.0) throw Error("goodhart experiment: alpha grid must include 0");
    for (const double a : grid)
        if (!std::isfinite(a) || a < 0.0) throw Error("goodhart experiment: alpha must be non-negative");

    ExperimentReport report;
    report.spec = spec;

    // Training sets are drawn fresh, independent of the evaluated corpus.
    const std::uint64_t n_train = std::max<std::uint64_t>(1, spec.n_docs / 2);
    const std::uint64_t n_probe = std::max<std::uint64_t>(1, spec.n_docs / 4);
    const auto proxy_pos = docs_of(generate_corpus(with_mix(spec, {1, 0, 0}, n_train, derive_key(spec.seed, 101))));
    const auto proxy_neg = docs_of(generate_corpus(with_mix(spec, spec.mix, n_train, derive_key(spec.seed, 102))));
    const auto probe_pos = docs_of(generate_corpus(with_mix(spec, {0, 1, 0}, n_probe, derive_key(spec.seed, 103))));
    const auto probe_neg = docs_of(generate_corpus(with_mix(spec, {1, 0, 0}, n_probe, derive_key(spec.seed, 104))));

    TrainConfig tc;
    tc.seed = spec.seed;
    const LinearModel proxy = train(proxy_pos, proxy_neg, tc, {"reference", "raw"});
    const LinearModel probe = train(probe_pos, probe_neg, tc, {"minority", "reference"});
    report.proxy_train_accuracy = evaluate(proxy, proxy_pos, proxy_neg).accuracy;
    report.probe_train_accuracy = evaluate(probe, probe_pos, probe_neg).accuracy;

    const auto corpus = generate_corpus(spec);
    const auto docs = docs_of(corpus);
    const auto quality = score_documents(docs, proxy, workers);
    std::vector<double> domain(docs.size());
    parallel_for(docs.size(), workers, [&](std::size_t i) { domain[i] = score(probe, docs[i]); });

    std::vector<unsigned char> kept;
    for (const double a : grid) {
        const FilterStats stats = filter_scored(quality, a, spec.seed, &kept, workers);
        ExperimentPoint p;
        p.alpha = a;
        p.discard_fraction = stats.fraction_discarded_docs();
        p.n_survivors = stats.n_kept;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            if (!kept[i]) continue;
            switch (corpus[i].population) {
                case Population::Ref: ++p.n_ref; break;
                case Population::Minority: ++p.n_minority; break;
                case Population::Junk: ++p.n_junk; break;
            }
        }
        if (p.n_survivors > 0) {
            const auto n = static_cast<double>(p.n_survivors);
            const auto good = p.n_ref + p.n_minority;
            p.mean_true_quality = static_cast<double>(good) / n;
            p.latent_minority_fraction = static_cast<double>(p.n_minority) / n;
            if (good > 0) {
                p.minority_share_of_quality = static_cast<double>(p.n_minority) / static_cast<double>(good);
                p.domain_entropy = binary_entropy(*p.minority_share_of_quality);
            } else {
                p.domain_entropy = 0.0;
            }
            p.composite = *p.mean_true_quality * *p.domain_entropy;
            const DomainMeasure m = measure_domain_scores(domain, kept);
            p.probe_mean_domain_prob = m.mean;
            p.probe_frac_classified_domain = m.frac_classified;
        } else {
            report.warnings.push_back("alpha=" + csv::number(a) + ": no documents survived filtering");
        }
        report.points.push_back(p);
    }

    if (!out_dir.empty()) {
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec || !fs::is_directory(out_dir)) throw Error("cannot create output directory " + out_dir.string());
        const auto write = [&](const char* name, const std::string& content) {
            std::ofstream out(out_dir / name, std::ios::binary | std::ios::trunc);
            out << content;
            if (!out) throw Error("cannot write " + (out_dir / name).string());
        };
        write("quality_curve.csv", render_quality_curve_csv(report));
        write("composition_curve.csv", render_composition_curve_csv(report));
        write("composite_curve.csv", render_composite_curve_csv(report));
        write("spec.json", synth_spec_to_json(spec));
    }
    return report;
}

namespace {

std::string opt6(const std::optional<double>& v) { return v ? csv::fixed(*v, 6) : std::string(); }

}  // namespace

std::string render_quality_curve_csv(const ExperimentReport& report) {
    std::string out(kQualityCurveHeader);
    out += '\n';
    for (const auto& p : report.points)
        out += csv::number(p.alpha) + ',' + csv::fixed(p.discard_fraction, 6) + ',' + std::to_string(p.n_survivors) +
               ',' + std::to_string(p.n_ref) + ',' + std::to_string(p.n_minority) + ',' + std::to_string(p.n_junk) +
               ',' + opt6(p.mean_true_quality) + ',' + opt6(p.latent_minority_fraction) + '\n';
    return out;
}

std::string render_composition_curve_csv(const ExperimentReport& report) {
    CompositionCurve curve;
    curve.domain_label = "minority";
    for (const auto& p : report.points)
        curve.points.push_back({p.alpha, p.discard_fraction, p.probe_mean_domain_prob,
                                p.probe_frac_classified_domain, p.n_survivors});
    std::stable_sort(curve.points.begin(), curve.points.end(),
                     [](const auto& x, const auto& y) { return x.discard_fraction < y.discard_fraction; });
    return render_curve_csv(curve);
}

std::string render_composite_curve_csv(const ExperimentReport& report) {
    std::string out(kCompositeCurveHeader);
    out += '\n';
    for (const auto& p : report.points)
        out += csv::number(p.alpha) + ',' + csv::fixed(p.discard_fraction, 6) + ',' + opt6(p.mean_true_quality) +
               ',' + opt6(p.minority_share_of_quality) + ',' + opt6(p.domain_entropy) + ',' + opt6(p.composite) +
               '\n';
    return out;
}

}  // namespace psieve
