#include "psieve/eval_aggregate.hpp"

#include "psieve/csv.hpp"
#include "psieve/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <utility>

namespace psieve {

double task_se(double accuracy, std::uint64_t n_instances) {
    if (n_instances == 0) throw Error("n_instances must be >= 1");
    if (!(accuracy >= 0.0 && accuracy <= 1.0)) throw Error("accuracy must lie in [0, 1]");
    return std::sqrt(accuracy * (1.0 - accuracy) / static_cast<double>(n_instances));
}

double TaskResult::standard_error() const {
    if (se) return *se;
    if (n_instances) return task_se(accuracy, *n_instances);
    throw Error("task '" + task + "': neither se nor n_instances given");
}

namespace {

void validate(const TaskResult& r) {
    if (!(r.accuracy >= 0.0 && r.accuracy <= 1.0))
        throw Error("task '" + r.task + "': accuracy must lie in [0, 1]");
    if (!(r.alpha >= 0.0) || !std::isfinite(r.alpha)) throw Error("task '" + r.task + "': alpha must be >= 0");
    if (r.se && !(*r.se >= 0.0 && std::isfinite(*r.se))) throw Error("task '" + r.task + "': se must be >= 0");
    if (r.n_instances && *r.n_instances == 0) throw Error("task '" + r.task + "': n_instances must be >= 1");
    if (!r.se && !r.n_instances) throw Error("task '" + r.task + "': neither se nor n_instances given");
}

}  // namespace

AggregateResult aggregate(std::span<const TaskResult> results) {
    if (results.empty()) throw Error("aggregate: no task results");
    const double alpha = results.front().alpha;
    std::set<std::string> seen;
    // Sum in task-name order so the result does not depend on input order.
    std::vector<const TaskResult*> ordered;
    for (const auto& r : results) {
        validate(r);
        if (r.alpha != alpha) throw Error("aggregate: results span more than one alpha");
        if (!seen.insert(r.task).second) throw Error("duplicate task result: " + r.task);
        ordered.push_back(&r);
    }
    std::sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->task < b->task; });

    double acc_sum = 0.0;
    double var_sum = 0.0;
    for (const auto* r : ordered) {
        acc_sum += r->accuracy;
        const double se = r->standard_error();
        var_sum += se * se;
    }
    const auto n = static_cast<double>(ordered.size());
    return {alpha, acc_sum / n, std::sqrt(var_sum) / n, ordered.size()};
}

std::vector<AggregateResult> aggregate_curve(std::span<const TaskResult> results) {
    std::map<double, std::vector<TaskResult>> groups;
    for (const auto& r : results) groups[r.alpha].push_back(r);
    std::vector<AggregateResult> out;
    out.reserve(groups.size());
    for (const auto& [alpha, group] : groups) out.push_back(aggregate(group));
    return out;
}

bool is_perplexity_task(std::string_view task) {
    std::string lower(task);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return lower.find("perplexity") != std::string::npos ||
           (lower.size() >= 4 && lower.compare(lower.size() - 4, 4, "_ppl") == 0);
}

ParsedResults parse_results_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    static const std::vector<std::string> kHeader{"task", "alpha", "accuracy", "se", "n_instances"};
    if (!std::getline(in, line) || csv::split(line) != kHeader)
        throw Error("results: expected header task,alpha,accuracy,se,n_instances");

    ParsedResults parsed;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::string where = "results line " + std::to_string(line_no) + ": ";
        const auto f = csv::split(line);
        if (f.size() != 5) throw Error(where + "expected 5 fields");
        if (f[0].empty()) throw Error(where + "empty task name");
        if (is_perplexity_task(f[0])) {
            parsed.skipped.push_back(f[0]);
            continue;
        }
        const auto num = [&](const std::string& s, const char* what) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(s, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != s.size()) throw Error(where + "invalid " + what + " '" + s + "'");
            return v;
        };
        TaskResult r;
        r.task = f[0];
        r.alpha = num(f[1], "alpha");
        r.accuracy = num(f[2], "accuracy");
        if (!f[3].empty()) r.se = num(f[3], "se");
        if (!f[4].empty()) {
            const double n = num(f[4], "n_instances");
            if (n < 1 || n != std::floor(n)) throw Error(where + "n_instances must be a positive integer");
            r.n_instances = static_cast<std::uint64_t>(n);
        }
        try {
            validate(r);
        } catch (const Error& e) {
            throw Error(where + e.what());
        }
        parsed.results.push_back(std::move(r));
    }
    return parsed;
}

std::string render_aggregate_csv(std::span<const AggregateResult> rows) {
    std::string out = "alpha,mean_accuracy,se_mean,n_tasks\n";
    for (const auto& r : rows)
        out += csv::number(r.alpha) + ',' + csv::fixed(r.mean_accuracy, 6) + ',' + csv::fixed(r.se_mean, 6) + ',' +
               std::to_string(r.n_tasks) + '\n';
    return out;
}

}  // namespace psieve
