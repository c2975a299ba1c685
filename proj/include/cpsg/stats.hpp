#pragma once

#include <map>
#include <optional>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpsg/evaluation.hpp"

namespace cpsg {

// (evaluator_id, response_id, metric) -> value in [0,1], duplicate keys rejected.
class ScoreMatrix {
public:
    void add(const MetricScore& score);

    std::vector<std::string> evaluators() const;
    // Response ids an evaluator scored for a metric, sorted.
    std::vector<std::string> responses(const std::string& evaluator, Metric metric) const;
    std::optional<double> get(const std::string& evaluator, const std::string& response,
                              Metric metric) const;
    std::size_t size() const { return values_.size(); }

private:
    using Key = std::tuple<std::string, std::string, Metric>;
    std::map<Key, double> values_;
};

struct SummaryRow {
    std::string evaluator_id;
    Metric metric = Metric::faithfulness;
    double mean = 0.0;
    double sd = 0.0;
    double cv = 0.0;  // sd / mean
    bool consistent = false;
};

struct CorrelationRow {
    std::pair<std::string, std::string> evaluator_pair;  // canonical: first < second
    Metric metric = Metric::faithfulness;
    double rho = 0.0;
};

// Arithmetic mean and sample standard deviation (n-1 divisor). The sd of a
// single value is an error, not zero.
std::pair<double, double> mean_sd(const std::vector<double>& values);

// True iff sd/mean < threshold; mean must be positive.
bool consistency_flag(double mean, double sd, double threshold);

// Average ranks (ties get the mean of their rank positions), 1-based.
std::vector<double> average_ranks(const std::vector<double>& values);

// Pearson correlation of average ranks. Constant vectors have no ranking and
// raise a degenerate-ranking error.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

std::vector<SummaryRow> summary_table(const ScoreMatrix& matrix, double consistency_threshold);

// One row per unordered evaluator pair per metric. Pairs whose response sets
// do not fully overlap, or whose score vector is constant, are skipped with a
// warning.
std::vector<CorrelationRow> correlation_table(const ScoreMatrix& matrix,
                                              std::vector<std::string>* warnings = nullptr);

// Rendered values use half-up (away from zero) rounding to 3 decimals.
std::string format_fixed3(double value);

struct ValidationSummary {
    std::size_t valid = 0;
    std::size_t total = 0;
};

std::string render_report_text(const std::vector<SummaryRow>& summary,
                               const std::vector<CorrelationRow>& correlations,
                               std::optional<ValidationSummary> validation);

nlohmann::json render_report_json(const std::vector<SummaryRow>& summary,
                                  const std::vector<CorrelationRow>& correlations,
                                  std::optional<ValidationSummary> validation);

}  // namespace cpsg
