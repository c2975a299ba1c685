#include "cpsg/config.hpp"

#include <cstdlib>
#include <fstream>

#include "cpsg/errors.hpp"
#include "cpsg/hashing.hpp"

namespace cpsg {

using nlohmann::json;

json RunConfig::to_json() const {
    return {{"corpus_manifest", corpus_manifest},
            {"prompts_path", prompts_path},
            {"templates_dir", templates_dir},
            {"rubric_path", rubric_path},
            {"output_dir", output_dir},
            {"backend", backend},
            {"backend_url", backend_url},
            {"mode", mode},
            {"cassette_path", cassette_path},
            {"generator_model", generator_model},
            {"followup_model", followup_model},
            {"judge_models", judge_models},
            {"embedder_model", embedder_model},
            {"chunk_size", chunk_size},
            {"overlap", overlap},
            {"retrieval_k", retrieval_k},
            {"followup_enabled", followup_enabled},
            {"seed", seed},
            {"max_tokens", max_tokens},
            {"themes_n", themes_n},
            {"reverse_questions_n", reverse_questions_n},
            {"consistency_threshold", consistency_threshold},
            {"validation_path", validation_path},
            {"ratings_path", ratings_path}};
}

void RunConfig::apply_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    auto set_str = [&](const char* key, std::string& out) {
        if (j.contains(key)) out = j.at(key).get<std::string>();
    };
    set_str("corpus_manifest", corpus_manifest);
    set_str("prompts_path", prompts_path);
    set_str("templates_dir", templates_dir);
    set_str("rubric_path", rubric_path);
    set_str("output_dir", output_dir);
    set_str("backend", backend);
    set_str("backend_url", backend_url);
    set_str("mode", mode);
    set_str("cassette_path", cassette_path);
    set_str("generator_model", generator_model);
    set_str("followup_model", followup_model);
    set_str("embedder_model", embedder_model);
    set_str("validation_path", validation_path);
    set_str("ratings_path", ratings_path);
    if (j.contains("judge_models")) judge_models = j.at("judge_models").get<std::vector<std::string>>();
    if (j.contains("chunk_size")) chunk_size = j.at("chunk_size").get<std::size_t>();
    if (j.contains("overlap")) overlap = j.at("overlap").get<std::size_t>();
    if (j.contains("retrieval_k")) retrieval_k = j.at("retrieval_k").get<std::size_t>();
    if (j.contains("followup_enabled")) followup_enabled = j.at("followup_enabled").get<bool>();
    if (j.contains("seed")) seed = j.at("seed").get<long>();
    if (j.contains("max_tokens")) max_tokens = j.at("max_tokens").get<long>();
    if (j.contains("themes_n")) themes_n = j.at("themes_n").get<std::size_t>();
    if (j.contains("reverse_questions_n"))
        reverse_questions_n = j.at("reverse_questions_n").get<std::size_t>();
    if (j.contains("consistency_threshold"))
        consistency_threshold = j.at("consistency_threshold").get<double>();
}

void RunConfig::apply_env() {
    auto env_str = [](const char* name, std::string& out) {
        if (const char* v = std::getenv(name)) out = v;
    };
    env_str("CPSG_CORPUS_MANIFEST", corpus_manifest);
    env_str("CPSG_PROMPTS_PATH", prompts_path);
    env_str("CPSG_TEMPLATES_DIR", templates_dir);
    env_str("CPSG_OUTPUT_DIR", output_dir);
    env_str("CPSG_BACKEND", backend);
    env_str("CPSG_BACKEND_URL", backend_url);
    env_str("CPSG_MODE", mode);
    env_str("CPSG_CASSETTE_PATH", cassette_path);
    env_str("CPSG_GENERATOR_MODEL", generator_model);
    env_str("CPSG_FOLLOWUP_MODEL", followup_model);
    env_str("CPSG_EMBEDDER_MODEL", embedder_model);
    if (const char* v = std::getenv("CPSG_RETRIEVAL_K")) retrieval_k = std::stoul(v);
    if (const char* v = std::getenv("CPSG_CHUNK_SIZE")) chunk_size = std::stoul(v);
    if (const char* v = std::getenv("CPSG_OVERLAP")) overlap = std::stoul(v);
    if (const char* v = std::getenv("CPSG_SEED")) seed = std::stol(v);
}

std::string RunConfig::config_hash() const {
    // hash the experiment configuration, not deployment details: identical
    // runs into different output directories share a hash
    json j = to_json();
    j.erase("output_dir");
    j.erase("cassette_path");
    return sha256_hex(canonical_json(j));
}

void RunConfig::validate() const {
    if (mode != "live" && mode != "record" && mode != "replay") {
        throw ConfigError("mode must be live, record, or replay: " + mode);
    }
    if (backend != "http" && backend != "scripted") {
        throw ConfigError("backend must be http or scripted: " + backend);
    }
    if ((mode == "replay" || mode == "record") && cassette_path.empty()) {
        throw ConfigError("mode " + mode + " requires cassette_path");
    }
    if (chunk_size == 0) throw ConfigError("chunk_size must be positive");
    if (overlap >= chunk_size) throw ConfigError("overlap must be smaller than chunk_size");
    if (retrieval_k == 0) throw ConfigError("retrieval_k must be positive");
    if (judge_models.empty()) throw ConfigError("at least one judge model required");
}

RunConfig load_config(const std::string& config_file_path) {
    RunConfig config;
    if (!config_file_path.empty()) {
        std::ifstream in(config_file_path);
        if (!in) throw ConfigError("cannot open config file: " + config_file_path);
        json j = json::parse(in, nullptr, false);
        if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + config_file_path);
        config.apply_json(j);
    }
    config.apply_env();
    return config;
}

}  // namespace cpsg
