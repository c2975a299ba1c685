#include "cpsg/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "cpsg/embedding_index.hpp"
#include "cpsg/hashing.hpp"

namespace cpsg {

std::string to_string(Metric metric) {
    switch (metric) {
        case Metric::faithfulness: return "faithfulness";
        case Metric::answer_relevancy: return "answer_relevancy";
        case Metric::context_utilization: return "context_utilization";
    }
    throw ValidationError("unknown metric value");
}

Metric metric_from_string(const std::string& name) {
    if (name == "faithfulness") return Metric::faithfulness;
    if (name == "answer_relevancy") return Metric::answer_relevancy;
    if (name == "context_utilization") return Metric::context_utilization;
    throw ValidationError("unknown metric: " + name);
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open template: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> non_empty_lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
        std::size_t b = 0;
        while (b < line.size() && std::isspace(static_cast<unsigned char>(line[b]))) ++b;
        if (b < line.size()) out.push_back(line.substr(b));
    }
    return out;
}

}  // namespace

JudgeTemplates JudgeTemplates::load(const std::filesystem::path& dir) {
    JudgeTemplates t;
    t.statements = read_file(dir / "statements.txt");
    t.statement_verdict = read_file(dir / "statement_verdict.txt");
    t.reverse_questions = read_file(dir / "reverse_questions.txt");
    t.context_relevance = read_file(dir / "context_relevance.txt");
    return t;
}

nlohmann::json JudgeTemplates::hashes() const {
    return {{"statements", sha256_hex(statements)},
            {"statement_verdict", sha256_hex(statement_verdict)},
            {"reverse_questions", sha256_hex(reverse_questions)},
            {"context_relevance", sha256_hex(context_relevance)}};
}

std::string render_template(std::string tmpl,
                            const std::vector<std::pair<std::string, std::string>>& vars) {
    for (const auto& [name, value] : vars) {
        const std::string key = "{" + name + "}";
        std::size_t pos = 0;
        while ((pos = tmpl.find(key, pos)) != std::string::npos) {
            tmpl.replace(pos, key.size(), value);
            pos += value.size();
        }
    }
    return tmpl;
}

bool parse_verdict(const std::string& reply) {
    std::size_t b = 0;
    while (b < reply.size() && std::isspace(static_cast<unsigned char>(reply[b]))) ++b;
    std::size_t e = b;
    while (e < reply.size() && !std::isspace(static_cast<unsigned char>(reply[e]))) ++e;
    std::string token = reply.substr(b, e - b);
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (token == "yes") return true;
    if (token == "no") return false;
    throw ParseError("verdict reply does not start with yes/no: \"" + reply.substr(0, 40) + "\"");
}

double faithfulness_score(std::size_t supported, std::size_t total) {
    if (total == 0) throw ValidationError("faithfulness undefined for zero statements");
    if (supported > total) throw ValidationError("supported count exceeds total");
    return static_cast<double>(supported) / static_cast<double>(total);
}

double answer_relevancy_score(const std::vector<double>& cosines) {
    if (cosines.empty()) throw ValidationError("answer relevancy needs at least one cosine");
    double sum = 0.0;
    for (double c : cosines) sum += std::max(0.0, c);
    double score = sum / static_cast<double>(cosines.size());
    return std::clamp(score, 0.0, 1.0);
}

double context_utilization_score(const std::vector<int>& verdicts) {
    if (verdicts.empty()) throw ValidationError("context utilization needs at least one verdict");
    double weighted = 0.0;
    std::size_t relevant_so_far = 0;
    std::size_t total_relevant = 0;
    for (std::size_t k = 0; k < verdicts.size(); ++k) {
        if (verdicts[k] != 0 && verdicts[k] != 1) throw ValidationError("verdicts must be 0 or 1");
        if (verdicts[k] == 1) {
            ++relevant_so_far;
            ++total_relevant;
            const double precision_at_k =
                static_cast<double>(relevant_so_far) / static_cast<double>(k + 1);
            weighted += precision_at_k;
        }
    }
    if (total_relevant == 0) return 0.0;
    return weighted / static_cast<double>(total_relevant);
}

EvaluationEngine::EvaluationEngine(ModelGateway& gateway, JudgeTemplates templates,
                                   std::size_t reverse_questions_n)
    : gateway_(gateway), templates_(std::move(templates)), reverse_questions_n_(reverse_questions_n) {}

std::vector<std::string> EvaluationEngine::decompose_statements(const std::string& answer,
                                                                const ModelRef& judge) {
    if (answer.empty()) throw ValidationError("decompose_statements: empty answer");

    GenerationRequest req;
    req.prompt = render_template(templates_.statements, {{"answer", answer}});
    GenerationResponse reply = gateway_.generate(judge, req);
    auto statements = non_empty_lines(reply.text);
    if (statements.empty()) {
        throw ParseError("judge produced zero parseable statements");
    }
    return statements;
}

double EvaluationEngine::faithfulness(const std::string& answer,
                                      const std::vector<std::string>& contexts,
                                      const ModelRef& judge) {
    if (contexts.empty()) throw ValidationError("faithfulness: contexts must be non-empty");

    auto statements = decompose_statements(answer, judge);

    std::string joined_context;
    for (const auto& c : contexts) {
        joined_context += c;
        joined_context += "\n\n";
    }

    std::size_t supported = 0;
    for (const auto& statement : statements) {
        GenerationRequest req;
        req.prompt = render_template(templates_.statement_verdict,
                                     {{"context", joined_context}, {"statement", statement}});
        GenerationResponse reply = gateway_.generate(judge, req);
        if (parse_verdict(reply.text)) ++supported;
    }
    return faithfulness_score(supported, statements.size());
}

double EvaluationEngine::answer_relevancy(const std::string& prompt, const std::string& answer,
                                          const ModelRef& judge, const ModelRef& embedder,
                                          std::size_t n) {
    if (answer.empty()) throw ValidationError("answer_relevancy: empty answer");
    if (n == 0) throw ValidationError("answer_relevancy: n must be positive");

    GenerationRequest req;
    req.prompt = render_template(templates_.reverse_questions,
                                 {{"n", std::to_string(n)}, {"answer", answer}});
    GenerationResponse reply = gateway_.generate(judge, req);
    auto questions = non_empty_lines(reply.text);
    if (questions.size() < n) {
        throw ParseError("judge generated " + std::to_string(questions.size()) +
                         " questions, need " + std::to_string(n));
    }
    questions.resize(n);

    EmbeddingVector prompt_vec = gateway_.embed_text(embedder, prompt);
    std::vector<double> cosines;
    cosines.reserve(n);
    for (const auto& question : questions) {
        cosines.push_back(cosine(gateway_.embed_text(embedder, question), prompt_vec));
    }
    return answer_relevancy_score(cosines);
}

double EvaluationEngine::context_utilization(const std::string& prompt, const std::string& answer,
                                             const std::vector<std::string>& contexts,
                                             const ModelRef& judge) {
    if (contexts.empty()) throw ValidationError("context_utilization: contexts must be non-empty");

    std::vector<int> verdicts;
    verdicts.reserve(contexts.size());
    for (const auto& context : contexts) {
        GenerationRequest req;
        req.prompt = render_template(templates_.context_relevance,
                                     {{"prompt", prompt}, {"answer", answer}, {"context", context}});
        GenerationResponse reply = gateway_.generate(judge, req);
        verdicts.push_back(parse_verdict(reply.text) ? 1 : 0);
    }
    return context_utilization_score(verdicts);
}

}  // namespace cpsg
