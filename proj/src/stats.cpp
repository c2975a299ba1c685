#include "cpsg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "cpsg/ratings.hpp"

namespace cpsg {

using nlohmann::json;

void ScoreMatrix::add(const MetricScore& score) {
    if (score.value < 0.0 || score.value > 1.0) {
        throw ValidationError("metric value out of [0,1]: " + std::to_string(score.value));
    }
    Key key{score.evaluator_id, score.response_id, score.metric};
    if (!values_.emplace(key, score.value).second) {
        throw ValidationError("duplicate score for (" + score.evaluator_id + ", " +
                              score.response_id + ", " + to_string(score.metric) + ")");
    }
}

std::vector<std::string> ScoreMatrix::evaluators() const {
    std::set<std::string> ids;
    for (const auto& [key, _] : values_) ids.insert(std::get<0>(key));
    return {ids.begin(), ids.end()};
}

std::vector<std::string> ScoreMatrix::responses(const std::string& evaluator, Metric metric) const {
    std::set<std::string> ids;
    for (const auto& [key, _] : values_) {
        if (std::get<0>(key) == evaluator && std::get<2>(key) == metric) ids.insert(std::get<1>(key));
    }
    return {ids.begin(), ids.end()};
}

std::optional<double> ScoreMatrix::get(const std::string& evaluator, const std::string& response,
                                       Metric metric) const {
    auto it = values_.find({evaluator, response, metric});
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::pair<double, double> mean_sd(const std::vector<double>& values) {
    if (values.empty()) throw ValidationError("mean_sd: empty input");
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() < 2) throw ValidationError("mean_sd: sd undefined for a single value");
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

bool consistency_flag(double mean, double sd, double threshold) {
    if (mean <= 0.0) throw ValidationError("consistency_flag: mean must be positive");
    if (sd < 0.0) throw ValidationError("consistency_flag: sd must be non-negative");
    return sd / mean < threshold;
}

std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // positions i..j (0-based) share the mean of ranks i+1..j+1
        const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

namespace {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

bool is_constant(const std::vector<double>& v) {
    return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ValidationError("spearman: length mismatch");
    if (x.size() < 2) throw ValidationError("spearman: need at least 2 observations");
    if (is_constant(x) || is_constant(y)) {
        throw ValidationError("spearman: degenerate ranking (constant vector)");
    }
    return pearson(average_ranks(x), average_ranks(y));
}

std::vector<SummaryRow> summary_table(const ScoreMatrix& matrix, double consistency_threshold) {
    std::vector<SummaryRow> rows;
    for (const auto& evaluator : matrix.evaluators()) {
        for (Metric metric : kAllMetrics) {
            auto responses = matrix.responses(evaluator, metric);
            if (responses.size() < 2) continue;
            std::vector<double> values;
            values.reserve(responses.size());
            for (const auto& r : responses) values.push_back(*matrix.get(evaluator, r, metric));
            auto [mean, sd] = mean_sd(values);
            SummaryRow row;
            row.evaluator_id = evaluator;
            row.metric = metric;
            row.mean = mean;
            row.sd = sd;
            row.cv = mean > 0.0 ? sd / mean : 0.0;
            row.consistent = mean > 0.0 && consistency_flag(mean, sd, consistency_threshold);
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<CorrelationRow> correlation_table(const ScoreMatrix& matrix,
                                              std::vector<std::string>* warnings) {
    auto warn = [&](const std::string& msg) {
        if (warnings) warnings->push_back(msg);
    };

    const auto evaluators = matrix.evaluators();
    std::vector<CorrelationRow> rows;
    for (std::size_t a = 0; a < evaluators.size(); ++a) {
        for (std::size_t b = a + 1; b < evaluators.size(); ++b) {
            for (Metric metric : kAllMetrics) {
                auto ra = matrix.responses(evaluators[a], metric);
                auto rb = matrix.responses(evaluators[b], metric);
                if (ra.empty() || ra != rb) {
                    warn("skipping " + evaluators[a] + " vs " + evaluators[b] + " on " +
                         to_string(metric) + ": response sets do not fully overlap");
                    continue;
                }
                std::vector<double> x, y;
                x.reserve(ra.size());
                y.reserve(ra.size());
                for (const auto& r : ra) {
                    x.push_back(*matrix.get(evaluators[a], r, metric));
                    y.push_back(*matrix.get(evaluators[b], r, metric));
                }
                try {
                    rows.push_back({{evaluators[a], evaluators[b]}, metric, spearman(x, y)});
                } catch (const ValidationError& e) {
                    warn("skipping " + evaluators[a] + " vs " + evaluators[b] + " on " +
                         to_string(metric) + ": " + e.what());
                }
            }
        }
    }
    return rows;
}

std::string format_fixed3(double value) {
    const double scaled = std::floor(std::abs(value) * 1000.0 + 0.5) / 1000.0;
    std::ostringstream out;
    if (value < 0 && scaled != 0.0) out << '-';
    out.setf(std::ios::fixed);
    out.precision(3);
    out << scaled;
    return out.str();
}

std::string render_report_text(const std::vector<SummaryRow>& summary,
                               const std::vector<CorrelationRow>& correlations,
                               std::optional<ValidationSummary> validation) {
    std::ostringstream out;
    out << "Scenario evaluation report\n";
    out << "==========================\n\n";

    if (validation) {
        const double rate =
            static_cast<double>(validation->valid) / static_cast<double>(validation->total);
        out << "Validation: " << validation->valid << "/" << validation->total << " responses valid ("
            << format_percent(rate) << ")\n\n";
    }

    out << "Mean scores (+/- SD)\n";
    out << "--------------------\n";
    for (const auto& row : summary) {
        out << row.evaluator_id << "  " << to_string(row.metric) << "  " << format_fixed3(row.mean)
            << " \xC2\xB1 " << format_fixed3(row.sd) << "  cv=" << format_fixed3(row.cv)
            << (row.consistent ? "  consistent" : "  inconsistent") << "\n";
    }
    out << "\n";

    out << "Evaluator agreement (Spearman)\n";
    out << "------------------------------\n";
    if (correlations.empty()) {
        out << "(no correlation rows: fewer than two evaluators share a complete response set)\n";
    } else {
        for (const auto& row : correlations) {
            out << row.evaluator_pair.first << " vs " << row.evaluator_pair.second << "  "
                << to_string(row.metric) << "  " << format_fixed3(row.rho) << "\n";
        }
    }
    return out.str();
}

json render_report_json(const std::vector<SummaryRow>& summary,
                        const std::vector<CorrelationRow>& correlations,
                        std::optional<ValidationSummary> validation) {
    json j;
    j["sd_convention"] = "sample (n-1)";
    j["summary"] = json::array();
    for (const auto& row : summary) {
        j["summary"].push_back({{"evaluator_id", row.evaluator_id},
                                {"metric", to_string(row.metric)},
                                {"mean", row.mean},
                                {"sd", row.sd},
                                {"cv", row.cv},
                                {"consistent", row.consistent}});
    }
    j["correlations"] = json::array();
    for (const auto& row : correlations) {
        j["correlations"].push_back({{"evaluator_a", row.evaluator_pair.first},
                                     {"evaluator_b", row.evaluator_pair.second},
                                     {"metric", to_string(row.metric)},
                                     {"rho", row.rho}});
    }
    if (validation) {
        const double rate =
            static_cast<double>(validation->valid) / static_cast<double>(validation->total);
        j["validation"] = {{"valid", validation->valid},
                           {"total", validation->total},
                           {"rate", rate},
                           {"percent", format_percent(rate)}};
    }
    return j;
}

}  // namespace cpsg
