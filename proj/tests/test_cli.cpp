#include "psieve/csv.hpp"
#include "psieve/pareto_filter.hpp"
#include "psieve/quality_classifier.hpp"

#include "support.hpp"

#include <cmath>

#include "doctest.h"

using namespace psieve;
using namespace psieve::testing;

namespace {

const std::string kCli = PSIEVE_CLI_PATH;

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

CommandResult cli(const std::string& args, const TempDir& tmp) { return run_command(kCli + " " + args, tmp.path()); }

struct SeparableFiles {
    fs::path pos, neg;
    explicit SeparableFiles(const TempDir& tmp) : pos(tmp / "pos.jsonl"), neg(tmp / "neg.jsonl") {
        write_jsonl(pos, random_texts(1, 400, "a", 300, 15));
        write_jsonl(neg, random_texts(2, 400, "b", 300, 15));
    }
};

struct StatsLine {
    double n_seen = 0, n_kept = 0;
    double discarded() const { return 1.0 - n_kept / n_seen; }
};

StatsLine read_stats(const fs::path& p) {
    std::istringstream in(slurp(p));
    std::string header, line;
    std::getline(in, header);
    std::getline(in, line);
    REQUIRE(header == kStatsCsvHeader);
    const auto f = csv::split(line);
    REQUIRE(f.size() == 9);
    return {std::stod(f[1]), std::stod(f[2])};
}

}  // namespace

TEST_CASE("train reaches full holdout accuracy on separable classes") {
    const TempDir tmp;
    const SeparableFiles f(tmp);
    const auto r = cli("train --pos " + q(f.pos) + " --neg " + q(f.neg) + " --holdout 0.25 --out " +
                           q(tmp / "m.bin"),
                       tmp);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("train_accuracy=1.0000") != std::string::npos);
    CHECK(r.out.find("holdout_accuracy=1.0000") != std::string::npos);
    CHECK(fs::exists(tmp / "m.bin"));
}

TEST_CASE("train is byte-for-byte reproducible") {
    const TempDir tmp;
    const SeparableFiles f(tmp);
    const std::string common = "train --pos " + q(f.pos) + " --neg " + q(f.neg) + " --epochs 2 --buckets 4096";
    REQUIRE(cli("--seed 3 " + common + " --out " + q(tmp / "a.bin"), tmp).exit_code == 0);
    REQUIRE(cli("--seed 3 --workers 4 " + common + " --out " + q(tmp / "b.bin"), tmp).exit_code == 0);
    CHECK(slurp(tmp / "a.bin") == slurp(tmp / "b.bin"));
}

TEST_CASE("usage errors exit with status 2, runtime errors with 1") {
    const TempDir tmp;
    const SeparableFiles f(tmp);
    CHECK(cli("train --pos " + q(f.pos) + " --out " + q(tmp / "m.bin"), tmp).exit_code == 2);
    CHECK(cli("", tmp).exit_code == 2);
    CHECK(cli("frobnicate", tmp).exit_code == 2);
    CHECK(cli("--help", tmp).exit_code == 0);

    const auto missing = cli("train --pos " + q(tmp / "nope.jsonl") + " --neg " + q(f.neg) + " --out " +
                                 q(tmp / "m.bin"),
                             tmp);
    CHECK(missing.exit_code == 1);
    CHECK(missing.err.find("nope.jsonl") != std::string::npos);

    write_file(tmp / "bad.jsonl", "{\"text\": \"ok\"}\nnot json\n");
    const auto bad = cli("train --pos " + q(tmp / "bad.jsonl") + " --neg " + q(f.neg) + " --out " +
                             q(tmp / "m.bin"),
                         tmp);
    CHECK(bad.exit_code == 1);
    CHECK(bad.err.find("bad.jsonl:2") != std::string::npos);

    write_file(tmp / "junk.bin", "definitely not a model");
    const auto not_model = cli("filter --model " + q(tmp / "junk.bin") + " --alpha 1 --in " + q(f.pos) +
                                   " --out " + q(tmp / "o"),
                               tmp);
    CHECK(not_model.exit_code == 1);
    CHECK(not_model.err.find("not a model file") != std::string::npos);
}

TEST_CASE("filter: tiny alpha keeps nearly everything, uniform scores at alpha 2 discard half") {
    const TempDir tmp;
    const UniformScoreFixture fx(1000);
    save_model(fx.model, tmp / "u.bin");
    write_jsonl(tmp / "docs.jsonl", fx.texts(100000));

    const auto tiny = cli("filter --model " + q(tmp / "u.bin") + " --alpha 1e-9 --in " + q(tmp / "docs.jsonl") +
                              " --out " + q(tmp / "tiny"),
                          tmp);
    REQUIRE(tiny.exit_code == 0);
    const StatsLine t = read_stats(tmp / "tiny" / "stats.csv");
    CHECK(t.n_seen == 100000);
    CHECK(t.discarded() < 1e-3);

    const auto two = cli("--seed 11 filter --model " + q(tmp / "u.bin") + " --alpha 2 --in " +
                             q(tmp / "docs.jsonl") + " --out " + q(tmp / "two"),
                         tmp);
    REQUIRE(two.exit_code == 0);
    CHECK(std::abs(read_stats(tmp / "two" / "stats.csv").discarded() - 0.5) <= 0.01);
    CHECK(fs::exists(tmp / "two" / "manifest.json"));
    CHECK(fs::exists(tmp / "two" / "chunk-00000.jsonl"));
}

TEST_CASE("filter output does not depend on the worker count") {
    const TempDir tmp;
    const UniformScoreFixture fx(200);
    save_model(fx.model, tmp / "u.bin");
    write_jsonl(tmp / "docs.jsonl", fx.texts(5000, 3));
    for (const char* w : {"1", "8"}) {
        const auto r = cli(std::string("--workers ") + w + " filter --model " + q(tmp / "u.bin") +
                               " --alpha 2 --target-bytes 20000 --in " + q(tmp / "docs.jsonl") + " --out " +
                               q(tmp / ("w" + std::string(w))),
                           tmp);
        REQUIRE(r.exit_code == 0);
    }
    std::size_t chunks = 0;
    for (const auto& e : fs::directory_iterator(tmp / "w1")) {
        const auto name = e.path().filename().string();
        CHECK(slurp(e.path()) == slurp(tmp / "w8" / name));
        chunks += name.rfind("chunk-", 0) == 0;
    }
    CHECK(chunks > 1);
}

TEST_CASE("sweep, probe, aggregate and synth subcommands") {
    const TempDir tmp;
    const UniformScoreFixture fx(100);
    save_model(fx.model, tmp / "u.bin");
    write_jsonl(tmp / "docs.jsonl", fx.texts(2000));

    REQUIRE(cli("sweep --model " + q(tmp / "u.bin") + " --alphas 4,1,2 --in " + q(tmp / "docs.jsonl") +
                    " --out " + q(tmp / "sweep.csv"),
                tmp)
                .exit_code == 0);
    const SweepReport sw = parse_sweep_csv(slurp(tmp / "sweep.csv"));
    REQUIRE(sw.rows.size() == 3);
    CHECK(sw.rows[0].alpha == 1.0);
    CHECK(sw.rows[2].alpha == 4.0);
    CHECK(sw.rows[0].stats.fraction_discarded_docs() < sw.rows[2].stats.fraction_discarded_docs());
    CHECK(cli("sweep --model " + q(tmp / "u.bin") + " --alphas 0,1 --in " + q(tmp / "docs.jsonl") + " --out " +
                  q(tmp / "x.csv"),
              tmp)
              .exit_code == 1);

    REQUIRE(cli("probe --quality-model " + q(tmp / "u.bin") + " --domain-model " + q(tmp / "u.bin") +
                    " --alphas 1,2 --in " + q(tmp / "docs.jsonl") + " --out " + q(tmp / "curve.csv"),
                tmp)
                .exit_code == 0);
    const std::string curve = slurp(tmp / "curve.csv");
    CHECK(curve.rfind("domain,alpha,discard_fraction,mean_domain_prob,frac_classified_domain,n_survivors\n", 0) == 0);
    CHECK(curve.find("\nuniform,0,0.000000,") != std::string::npos);

    write_file(tmp / "results.csv",
               "task,alpha,accuracy,se,n_instances\n"
               "arc,1,0.6,0.03,\n"
               "piqa,1,0.8,0.02,\n"
               "wiki_ppl,1,12.5,,\n");
    const auto agg = cli("aggregate --in " + q(tmp / "results.csv") + " --out " + q(tmp / "agg.csv"), tmp);
    REQUIRE(agg.exit_code == 0);
    CHECK(slurp(tmp / "agg.csv") == "alpha,mean_accuracy,se_mean,n_tasks\n1,0.700000,0.018028,2\n");
    CHECK(agg.err.find("wiki_ppl") != std::string::npos);

    write_file(tmp / "spec.json", R"({"n_docs": 2000, "seed": 2})");
    const auto syn = cli("synth --spec " + q(tmp / "spec.json") + " --alphas 1,4 --out " + q(tmp / "synth"), tmp);
    REQUIRE(syn.exit_code == 0);
    CHECK(syn.out.find("proxy_train_accuracy=") != std::string::npos);
    for (const char* name : {"quality_curve.csv", "composition_curve.csv", "composite_curve.csv", "spec.json"})
        CHECK(fs::exists(tmp / "synth" / name));
    CHECK(cli("synth --spec " + q(tmp / "missing.json") + " --out " + q(tmp / "s2"), tmp).exit_code == 1);
}
