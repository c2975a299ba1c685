#include "cpsg/scenario.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "cpsg/chunker.hpp"
#include "cpsg/jsonl.hpp"

namespace cpsg {

using nlohmann::json;

std::vector<PromptSpec> load_prompts(const std::filesystem::path& path) {
    std::vector<PromptSpec> prompts;
    std::unordered_set<int> seen;
    for (const auto& rec : jsonl::read_records(path)) {
        PromptSpec p;
        p.prompt_id = rec.at("prompt_id").get<int>();
        p.theme = rec.value("theme", "");
        p.text = rec.at("text").get<std::string>();
        p.followups = rec.value("followups", std::vector<std::string>{});
        if (p.prompt_id < 1) throw ValidationError("prompt_id must be positive");
        if (p.text.empty()) throw ValidationError("prompt " + std::to_string(p.prompt_id) + ": empty text");
        if (!seen.insert(p.prompt_id).second) {
            throw ValidationError("duplicate prompt_id " + std::to_string(p.prompt_id));
        }
        prompts.push_back(std::move(p));
    }
    return prompts;
}

namespace {

struct Line {
    std::size_t begin;  // byte offset of first char
    std::size_t end;    // byte offset one past last char, excluding newline
};

std::vector<Line> split_lines(const std::string& text) {
    std::vector<Line> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) {
            lines.push_back({pos, text.size()});
            break;
        }
        lines.push_back({pos, nl});
        pos = nl + 1;
    }
    return lines;
}

std::string_view trimmed(const std::string& text, Line line) {
    std::size_t b = line.begin, e = line.end;
    while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
    return std::string_view(text).substr(b, e - b);
}

bool is_scenario_marker(std::string_view line) {
    return line.starts_with("Scenario") || line.starts_with("**Scenario");
}

bool is_meta_line(std::string_view line) {
    return line.starts_with("Note:") || line.starts_with("I hope") || line.starts_with("Let me know");
}

std::size_t count_code_points(std::string_view bytes) {
    std::size_t n = 0;
    for (unsigned char c : bytes) {
        if ((c & 0xC0) != 0x80) ++n;
    }
    return n;
}

}  // namespace

std::pair<std::string, CleaningReport> clean_response(const std::string& raw) {
    if (raw.empty()) throw ValidationError("clean_response: empty input");

    const auto lines = split_lines(raw);

    std::optional<std::size_t> marker;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (is_scenario_marker(trimmed(raw, lines[i]))) {
            marker = i;
            break;
        }
    }
    if (!marker) return {raw, CleaningReport{}};

    std::size_t last = lines.size() - 1;
    while (last > *marker && trimmed(raw, lines[last]).empty()) --last;
    while (last > *marker && is_meta_line(trimmed(raw, lines[last]))) {
        --last;
        while (last > *marker && trimmed(raw, lines[last]).empty()) --last;
    }

    const std::size_t begin = lines[*marker].begin;
    const std::size_t end = lines[last].end;
    CleaningReport report;
    report.stripped_prefix_len = count_code_points(std::string_view(raw).substr(0, begin));
    report.stripped_suffix_len = count_code_points(std::string_view(raw).substr(end));
    return {raw.substr(begin, end - begin), report};
}

json ScenarioResponse::to_json() const {
    return {{"response_id", response_id},
            {"prompt_id", prompt_id},
            {"raw_text", raw_text},
            {"cleaned_text", cleaned_text},
            {"retrieved_chunk_ids", retrieved_chunk_ids},
            {"generator", {{"backend_url", generator.backend_url}, {"model_name", generator.model_name}}},
            {"followup_texts", followup_texts},
            {"created_at", created_at}};
}

ScenarioResponse ScenarioResponse::from_json(const json& j) {
    ScenarioResponse r;
    r.response_id = j.at("response_id").get<std::string>();
    r.prompt_id = j.at("prompt_id").get<int>();
    r.raw_text = j.at("raw_text").get<std::string>();
    r.cleaned_text = j.at("cleaned_text").get<std::string>();
    r.retrieved_chunk_ids = j.at("retrieved_chunk_ids").get<std::vector<std::string>>();
    if (j.contains("generator")) {
        r.generator.backend_url = j["generator"].value("backend_url", "");
        r.generator.model_name = j["generator"].value("model_name", "");
        r.generator.role = ModelRole::generator;
    }
    r.followup_texts = j.value("followup_texts", std::vector<std::string>{});
    r.created_at = j.value("created_at", "");
    return r;
}

const char* ScenarioGenerator::system_preamble() {
    return "You are a climate policy expert tasked with generating innovative and actionable "
           "future climate policy scenarios. Your responses should be relevant, detailed, and "
           "well-structured.";
}

ScenarioGenerator::ScenarioGenerator(ModelGateway& gateway, const EmbeddingIndex& index,
                                     GeneratorConfig config)
    : gateway_(gateway), index_(index), config_(std::move(config)) {}

std::vector<RetrievalResult> ScenarioGenerator::retrieve(const std::string& text, std::size_t k) {
    EmbeddingVector query = gateway_.embed_text(config_.embedder, text);
    return index_.query_top_k(query, std::min(k, index_.size()));
}

namespace {

std::string doc_id_of(const std::string& chunk_id) {
    auto pos = chunk_id.rfind(':');
    return pos == std::string::npos ? chunk_id : chunk_id.substr(0, pos);
}

std::vector<std::string> context_blocks_for(const std::vector<RetrievalResult>& hits) {
    std::vector<std::string> blocks;
    blocks.reserve(hits.size());
    for (const auto& hit : hits) {
        blocks.push_back("[" + doc_id_of(hit.chunk_id) + "]\n" + hit.text);
    }
    return blocks;
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

std::vector<std::string> ScenarioGenerator::elicit_themes(std::size_t n) {
    if (n == 0) throw ValidationError("elicit_themes: n must be positive");
    if (index_.size() == 0) throw ValidationError("elicit_themes: empty index");

    std::string instruction = config_.theme_template;
    const std::string placeholder = "{n}";
    if (auto pos = instruction.find(placeholder); pos != std::string::npos) {
        instruction.replace(pos, placeholder.size(), std::to_string(n));
    }

    auto hits = retrieve(instruction, config_.retrieval_k);
    GenerationRequest req;
    req.system = system_preamble();
    req.prompt = instruction;
    req.context_blocks = context_blocks_for(hits);

    GenerationResponse reply = gateway_.generate(config_.generator, req);
    auto themes = non_empty_lines(reply.text);
    if (themes.size() < n) {
        throw BackendError(BackendError::Kind::malformed_payload,
                           "theme elicitation produced " + std::to_string(themes.size()) +
                               " themes, need " + std::to_string(n));
    }
    themes.resize(n);
    return themes;
}

ScenarioResponse ScenarioGenerator::generate_scenario(const PromptSpec& prompt, std::size_t k) {
    if (index_.size() == 0) throw ValidationError("generate_scenario: empty index");
    if (k == 0) throw ValidationError("generate_scenario: k must be positive");

    auto hits = retrieve(prompt.text, k);

    GenerationRequest req;
    req.system = system_preamble();
    req.prompt = prompt.text;
    req.context_blocks = context_blocks_for(hits);

    GenerationResponse reply = gateway_.generate(config_.generator, req);
    if (reply.text.empty()) {
        throw BackendError(BackendError::Kind::malformed_payload, "empty model reply for prompt " +
                                                                      std::to_string(prompt.prompt_id));
    }

    ScenarioResponse resp;
    char id[16];
    std::snprintf(id, sizeof(id), "p%02d", prompt.prompt_id);
    resp.response_id = id;
    resp.prompt_id = prompt.prompt_id;
    resp.raw_text = reply.text;
    resp.cleaned_text = clean_response(reply.text).first;
    for (const auto& hit : hits) resp.retrieved_chunk_ids.push_back(hit.chunk_id);
    resp.generator = config_.generator;
    resp.created_at = now_iso8601();
    return resp;
}

FollowupOutcome ScenarioGenerator::run_followups(ScenarioResponse resp,
                                                 const std::vector<std::string>& followups) {
    if (resp.cleaned_text.empty()) throw ValidationError("run_followups: response has empty cleaned_text");

    FollowupOutcome outcome;
    for (std::size_t i = 0; i < followups.size(); ++i) {
        GenerationRequest req;
        req.system = system_preamble();
        req.prompt = "Previous answer:\n\"\"\"\n" + resp.cleaned_text + "\n\"\"\"\n\n" + followups[i];
        try {
            GenerationResponse reply = gateway_.generate(config_.followup_generator, req);
            resp.followup_texts.push_back(reply.text);
        } catch (const BackendError& e) {
            outcome.failed_index = i;
            outcome.error = e.what();
            break;
        }
    }
    outcome.response = std::move(resp);
    return outcome;
}

}  // namespace cpsg
