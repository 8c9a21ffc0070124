#include "psieve/error.hpp"
#include "psieve/synth_lab.hpp"

#include "support.hpp"

#include <chrono>
#include <cmath>

#include "doctest.h"

using namespace psieve;
using namespace psieve::testing;

TEST_CASE("pure reference mix produces only REF documents") {
    SynthSpec spec;
    spec.n_docs = 500;
    spec.mix = {1, 0, 0};
    const auto corpus = generate_corpus(spec);
    REQUIRE(corpus.size() == 500);
    for (const auto& d : corpus) {
        CHECK(d.population == Population::Ref);
        CHECK(d.true_quality() == 1);
        CHECK(d.doc.text.find('m') == std::string::npos);
        CHECK(d.doc.text.find('n') == std::string::npos);
    }
}

TEST_CASE("population proportions match the mix") {
    SynthSpec spec;
    spec.n_docs = 10000;
    spec.doc_len = 2;
    spec.seed = 5;
    const auto corpus = generate_corpus(spec);
    double counts[3] = {0, 0, 0};
    for (const auto& d : corpus) counts[static_cast<int>(d.population)] += 1;
    const double probs[3] = {0.3, 0.2, 0.5};
    for (int k = 0; k < 3; ++k) {
        const double sigma = std::sqrt(10000 * probs[k] * (1 - probs[k]));
        CHECK(std::abs(counts[k] - 10000 * probs[k]) <= 4 * sigma);
    }
}

TEST_CASE("generation is deterministic in the seed") {
    SynthSpec spec;
    spec.n_docs = 200;
    spec.seed = 9;
    const auto a = generate_corpus(spec);
    const auto b = generate_corpus(spec);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].doc.text == b[i].doc.text);
        CHECK(a[i].population == b[i].population);
        CHECK(a[i].doc.id == i);
    }
    spec.seed = 10;
    const auto c = generate_corpus(spec);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) differs |= a[i].doc.text != c[i].doc.text;
    CHECK(differs);
}

TEST_CASE("documents use the documented token families") {
    SynthSpec spec;
    spec.n_docs = 300;
    spec.doc_len = 20;
    for (const auto& d : generate_corpus(spec)) {
        std::istringstream ss(d.doc.text);
        std::string tok;
        int n = 0;
        while (ss >> tok) {
            ++n;
            const char c = tok[0];
            switch (d.population) {
                case Population::Ref: CHECK((c == 'r' || c == 'q')); break;
                case Population::Minority: CHECK((c == 'm' || c == 'q')); break;
                case Population::Junk: CHECK(c == 'n'); break;
            }
        }
        CHECK(n == 20);
    }
}

TEST_CASE("spec json parsing") {
    const SynthSpec s = parse_synth_spec(
        R"({"n_docs": 100, "mix": {"ref_quality": 0.5, "minority_quality": 0.25, "junk": 0.25},
            "doc_len": 7, "vocab": {"ref_style": 10, "minority_style": 11, "quality": 12, "noise": 13}, "seed": 4})");
    CHECK(s.n_docs == 100);
    CHECK(s.mix.ref_quality == 0.5);
    CHECK(s.mix.minority_quality == 0.25);
    CHECK(s.mix.junk == 0.25);
    CHECK(s.doc_len == 7);
    CHECK(s.ref_vocab == 10);
    CHECK(s.minority_vocab == 11);
    CHECK(s.quality_vocab == 12);
    CHECK(s.noise_vocab == 13);
    CHECK(s.seed == 4);

    const SynthSpec d = parse_synth_spec("{}");
    CHECK(d.n_docs == 20000);
    CHECK(d.noise_vocab == 2000);

    const SynthSpec r = parse_synth_spec(synth_spec_to_json(s));
    CHECK(r.n_docs == s.n_docs);
    CHECK(r.mix.minority_quality == s.mix.minority_quality);
    CHECK(r.noise_vocab == s.noise_vocab);

    CHECK_THROWS_AS(parse_synth_spec("{"), Error);
    CHECK_THROWS_AS(parse_synth_spec(R"({"bogus": 1})"), Error);
    CHECK_THROWS_AS(parse_synth_spec(R"({"n_docs": "many"})"), Error);
    CHECK_THROWS_AS(parse_synth_spec(R"({"mix": {"ref_quality": -1, "minority_quality": 1, "junk": 1}})"), Error);
    CHECK_THROWS_AS(parse_synth_spec(R"({"mix": {"ref_quality": 0, "minority_quality": 0, "junk": 0}})"), Error);
    CHECK_THROWS_AS(parse_synth_spec(R"({"n_docs": 0})"), Error);
}

TEST_CASE("binary entropy") {
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0));
    CHECK(binary_entropy(0.2) == doctest::Approx(-(0.2 * std::log2(0.2) + 0.8 * std::log2(0.8))));
}

TEST_CASE("experiment requires the unfiltered baseline") {
    SynthSpec spec;
    spec.n_docs = 100;
    const std::vector<double> alphas{1, 2};
    CHECK_THROWS_AS(goodhart_experiment(spec, alphas), Error);
}

TEST_CASE("default experiment reproduces the over-filtering pattern") {
    const TempDir tmp;
    const SynthSpec spec;
    const auto alphas = default_experiment_alphas();
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentReport r = goodhart_experiment(spec, alphas, tmp.path());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(secs < 60.0);

    REQUIRE(r.points.size() == 9);
    const auto& base = r.at_alpha(0);
    CHECK(base.discard_fraction == 0.0);
    CHECK(base.n_survivors == spec.n_docs);

    // (a) true quality is non-decreasing with alpha.
    for (std::size_t i = 1; i < r.points.size(); ++i)
        CHECK(*r.points[i].mean_true_quality >= *r.points[i - 1].mean_true_quality);

    // (b) the latent minority fraction collapses and the probe agrees.
    CHECK(*r.at_alpha(8).latent_minority_fraction < 0.5 * *base.latent_minority_fraction);
    for (std::size_t i = 1; i < r.points.size(); ++i) {
        const auto& a = r.points[i - 1];
        const auto& b = r.points[i];
        if (*b.latent_minority_fraction < *a.latent_minority_fraction)
            CHECK(*b.probe_frac_classified_domain <= *a.probe_frac_classified_domain);
    }

    // (c) the composite peaks strictly inside the grid.
    std::size_t best = 0;
    for (std::size_t i = 1; i < r.points.size(); ++i)
        if (*r.points[i].composite > *r.points[best].composite) best = i;
    CHECK(best > 0);
    CHECK(best + 1 < r.points.size());

    for (const char* name : {"quality_curve.csv", "composition_curve.csv", "composite_curve.csv", "spec.json"})
        CHECK(std::filesystem::exists(tmp / name));
    const std::string q = slurp(tmp / "quality_curve.csv");
    CHECK(q.rfind(std::string(kQualityCurveHeader) + "\n", 0) == 0);
    const std::string c = slurp(tmp / "composite_curve.csv");
    CHECK(c.rfind(std::string(kCompositeCurveHeader) + "\n", 0) == 0);
    const SynthSpec echoed = parse_synth_spec(slurp(tmp / "spec.json"));
    CHECK(echoed.n_docs == spec.n_docs);
}
