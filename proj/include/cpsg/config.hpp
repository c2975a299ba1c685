#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cpsg {

// Resolution order: built-in defaults, then config file, then CPSG_* env
// vars, then command-line flags (highest wins).
struct RunConfig {
    std::string corpus_manifest;
    std::string prompts_path = "data/prompts.jsonl";
    std::string templates_dir = "data/templates";
    std::string rubric_path = "data/rubric.txt";
    std::string output_dir = "out";

    std::string backend = "http";  // http | scripted
    std::string backend_url = "http://localhost:11434";
    std::string mode = "live";  // live | record | replay
    std::string cassette_path;

    std::string generator_model = "llama3.2";
    std::string followup_model = "llama3";
    std::vector<std::string> judge_models = {"gemma2", "mistral"};
    std::string embedder_model = "nomic-embed-text";

    std::size_t chunk_size = 1000;
    std::size_t overlap = 100;
    std::size_t retrieval_k = 4;
    bool followup_enabled = true;
    long seed = 0;
    long max_tokens = 2048;
    std::size_t themes_n = 5;
    std::size_t reverse_questions_n = 3;
    double consistency_threshold = 0.11;

    // Human-annotation inputs for the stats stage (optional).
    std::string validation_path;
    std::string ratings_path;

    nlohmann::json to_json() const;
    void apply_json(const nlohmann::json& j);
    void apply_env();

    std::string config_hash() const;
    void validate() const;
};

RunConfig load_config(const std::string& config_file_path);

}  // namespace cpsg
