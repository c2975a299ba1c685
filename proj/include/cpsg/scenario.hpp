#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpsg/embedding_index.hpp"
#include "cpsg/gateway.hpp"

namespace cpsg {

struct PromptSpec {
    int prompt_id = 0;
    std::string theme;
    std::string text;
    std::vector<std::string> followups;
};

std::vector<PromptSpec> load_prompts(const std::filesystem::path& path);

struct CleaningReport {
    std::size_t stripped_prefix_len = 0;  // Unicode code points
    std::size_t stripped_suffix_len = 0;
};

// Strips a leading block before the first scenario marker (a line starting
// with "Scenario" or "**Scenario") and a trailing block of meta lines
// ("Note:", "I hope", "Let me know"). The cleaned text is always a contiguous
// substring of the raw text; if no marker is found the input comes back
// unchanged.
std::pair<std::string, CleaningReport> clean_response(const std::string& raw);

struct ScenarioResponse {
    std::string response_id;
    int prompt_id = 0;
    std::string raw_text;
    std::string cleaned_text;
    std::vector<std::string> retrieved_chunk_ids;  // retrieval rank order
    ModelRef generator;
    std::vector<std::string> followup_texts;
    std::string created_at;

    nlohmann::json to_json() const;
    static ScenarioResponse from_json(const nlohmann::json& j);
};

struct FollowupOutcome {
    ScenarioResponse response;            // partial followup_texts preserved on failure
    std::optional<std::size_t> failed_index;
    std::string error;
};

struct GeneratorConfig {
    ModelRef generator;
    ModelRef followup_generator;
    ModelRef embedder;
    std::size_t retrieval_k = 4;
    std::string theme_template;  // rendered with {n}
};

class ScenarioGenerator {
public:
    ScenarioGenerator(ModelGateway& gateway, const EmbeddingIndex& index, GeneratorConfig config);

    // One RAG-grounded generation; themes parsed one per line of the reply.
    std::vector<std::string> elicit_themes(std::size_t n);

    ScenarioResponse generate_scenario(const PromptSpec& prompt, std::size_t k);

    // Each follow-up is a single-turn request carrying the prior cleaned text
    // as quoted context. A mid-sequence backend failure preserves the replies
    // gathered so far and reports the failing index.
    FollowupOutcome run_followups(ScenarioResponse resp, const std::vector<std::string>& followups);

    static const char* system_preamble();

private:
    std::vector<RetrievalResult> retrieve(const std::string& text, std::size_t k);

    ModelGateway& gateway_;
    const EmbeddingIndex& index_;
    GeneratorConfig config_;
};

}  // namespace cpsg
