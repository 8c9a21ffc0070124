#pragma once

// Shared fixtures for the unit, CLI and acceptance suites.

#include "psieve/corpus_io.hpp"
#include "psieve/keyed_rng.hpp"
#include "psieve/quality_classifier.hpp"
#include "psieve/text_features.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

namespace psieve::testing {

namespace fs = std::filesystem;

/// Unique scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("psieve-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes documents as {"text": ...} jsonl.
inline void write_jsonl(const fs::path& p, const std::vector<std::string>& texts) {
    std::string out;
    for (const auto& t : texts) {
        Document d = Document::make(0, t);
        std::string rec = serialize_record(d);
        // Drop the "id" field; inputs only need "text".
        out += "{" + rec.substr(rec.find("\"text\""));
    }
    write_file(p, out);
}

/// Random documents whose tokens are "<prefix><k>" for k < vocab.
inline std::vector<std::string> random_texts(std::uint64_t seed, std::size_t n, const std::string& prefix,
                                             std::uint64_t vocab, std::uint32_t len) {
    std::vector<std::string> out;
    KeyedStream rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        std::string t;
        for (std::uint32_t k = 0; k < len; ++k) {
            if (k) t += ' ';
            t += prefix + std::to_string(rng.next_below(vocab));
        }
        out.push_back(std::move(t));
    }
    return out;
}

inline std::vector<Document> to_docs(const std::vector<std::string>& texts) {
    std::vector<Document> out;
    for (std::size_t i = 0; i < texts.size(); ++i) out.push_back(Document::make(i, texts[i]));
    return out;
}

/// A hand-built model under which document "tK" (one token) scores
/// (K + 0.5) / levels, giving scores evenly spread over (0, 1). Token names
/// are chosen so no two share a hash bucket.
struct UniformScoreFixture {
    LinearModel model;
    std::vector<std::string> tokens;  // tokens[k] scores (k + 0.5) / levels

    explicit UniformScoreFixture(std::size_t levels = 1000) {
        FeatureConfig cfg{1, std::uint64_t{1} << 20};
        model = LinearModel::zeros(cfg);
        model.positive_label = "uniform";
        model.negative_label = "none";
        std::unordered_set<std::uint64_t> used;
        std::size_t candidate = 0;
        while (tokens.size() < levels) {
            const std::string tok = "t" + std::to_string(candidate++);
            const std::uint64_t bucket = fnv1a64(tok) % cfg.buckets;
            if (!used.insert(bucket).second) continue;
            const double p = (static_cast<double>(tokens.size()) + 0.5) / static_cast<double>(levels);
            model.weights[bucket] = std::log(p / (1.0 - p));
            tokens.push_back(tok);
        }
    }

    /// n documents cycling through the score levels in a scrambled order.
    std::vector<std::string> texts(std::size_t n, std::uint64_t seed = 7) const {
        std::vector<std::string> out;
        KeyedStream rng(seed);
        for (std::size_t i = 0; i < n; ++i) out.push_back(tokens[rng.next_below(tokens.size())]);
        return out;
    }
};

struct CommandResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

/// Runs a shell command, capturing stdout and stderr.
inline CommandResult run_command(const std::string& cmd, const fs::path& scratch) {
    static std::atomic<int> counter{0};
    const int k = counter++;
    const fs::path out = scratch / ("stdout-" + std::to_string(k));
    const fs::path err = scratch / ("stderr-" + std::to_string(k));
    const std::string full = cmd + " >'" + out.string() + "' 2>'" + err.string() + "'";
    const int status = std::system(full.c_str());
    CommandResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

}  // namespace psieve::testing
