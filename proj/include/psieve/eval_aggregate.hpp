#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace psieve {

/// Accuracy of one downstream task for the model trained at one alpha. At
/// least one of se / n_instances must be present.
struct TaskResult {
    std::string task;
    double alpha = 0.0;
    double accuracy = 0.0;
    std::optional<double> se;
    std::optional<std::uint64_t> n_instances;

    /// se if given, else the binomial estimate from n_instances.
    double standard_error() const;
};

/// Binomial standard error sqrt(acc (1 - acc) / n).
double task_se(double accuracy, std::uint64_t n_instances);

struct AggregateResult {
    double alpha = 0.0;
    double mean_accuracy = 0.0;
    double se_mean = 0.0;
    std::uint64_t n_tasks = 0;
};

/// Equal-weight mean over tasks sharing one alpha, with
/// se_mean = sqrt(sum se_i^2) / n. Throws Error on an empty list, mixed
/// alphas or a task listed twice.
AggregateResult aggregate(std::span<const TaskResult> results);

/// Groups by alpha and aggregates each group; rows sorted by alpha.
std::vector<AggregateResult> aggregate_curve(std::span<const TaskResult> results);

/// Perplexity-style metrics ("lower is better") are not accuracies and are
/// kept out of the average. Matches task names containing "perplexity" or
/// ending in "_ppl" (case-insensitive).
bool is_perplexity_task(std::string_view task);

struct ParsedResults {
    std::vector<TaskResult> results;
    std::vector<std::string> skipped;  // perplexity tasks left out
};

/// Input CSV "task,alpha,accuracy,se,n_instances"; se or n_instances may
/// be empty.
ParsedResults parse_results_csv(std::string_view text);

/// Output CSV "alpha,mean_accuracy,se_mean,n_tasks".
std::string render_aggregate_csv(std::span<const AggregateResult> rows);

}  // namespace psieve
