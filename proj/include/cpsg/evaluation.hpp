#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpsg/gateway.hpp"

namespace cpsg {

enum class Metric { faithfulness, answer_relevancy, context_utilization };

constexpr Metric kAllMetrics[] = {Metric::faithfulness, Metric::answer_relevancy,
                                  Metric::context_utilization};

std::string to_string(Metric metric);
Metric metric_from_string(const std::string& name);

struct Verdict {
    std::string statement;
    bool supported = false;
    std::string rationale;
};

struct MetricScore {
    std::string response_id;
    std::string evaluator_id;
    Metric metric = Metric::faithfulness;
    double value = 0.0;
};

// Versioned judge prompt templates, shipped as plain text files and hashed
// into run metadata. Placeholders: {answer}, {statement}, {context},
// {contexts}, {prompt}, {n}.
struct JudgeTemplates {
    std::string statements;
    std::string statement_verdict;
    std::string reverse_questions;
    std::string context_relevance;

    static JudgeTemplates load(const std::filesystem::path& dir);
    nlohmann::json hashes() const;
};

std::string render_template(std::string tmpl,
                            const std::vector<std::pair<std::string, std::string>>& vars);

// Strict verdict grammar: the reply's first whitespace-delimited token must be
// "yes" or "no", case-insensitive. Anything else is a parse error.
bool parse_verdict(const std::string& reply);

// The normative metric formulas, factored out so scripted-judge runs, the
// live pipeline, and the tests all share one definition.
double faithfulness_score(std::size_t supported, std::size_t total);
double answer_relevancy_score(const std::vector<double>& cosines);
double context_utilization_score(const std::vector<int>& verdicts);

class EvaluationEngine {
public:
    EvaluationEngine(ModelGateway& gateway, JudgeTemplates templates, std::size_t reverse_questions_n = 3);

    std::vector<std::string> decompose_statements(const std::string& answer, const ModelRef& judge);

    double faithfulness(const std::string& answer, const std::vector<std::string>& contexts,
                        const ModelRef& judge);

    double answer_relevancy(const std::string& prompt, const std::string& answer,
                            const ModelRef& judge, const ModelRef& embedder, std::size_t n);

    double context_utilization(const std::string& prompt, const std::string& answer,
                               const std::vector<std::string>& contexts, const ModelRef& judge);

    const JudgeTemplates& templates() const { return templates_; }
    std::size_t reverse_questions_n() const { return reverse_questions_n_; }

private:
    ModelGateway& gateway_;
    JudgeTemplates templates_;
    std::size_t reverse_questions_n_;
};

}  // namespace cpsg
