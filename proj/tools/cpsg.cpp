#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cpsg/config.hpp"
#include "cpsg/errors.hpp"
#include "cpsg/pipeline.hpp"
#include "cpsg/ratings.hpp"

namespace {

// Exit codes: 0 ok, 1 unexpected, 2 config, 3 IO, 4 backend, 5 validation.
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitBackend = 4;
constexpr int kExitValidation = 5;

struct FlagOverrides {
    std::optional<std::string> manifest, prompts, templates_dir, rubric, output_dir;
    std::optional<std::string> backend, backend_url, mode, cassette;
    std::optional<std::string> generator_model, followup_model, embedder_model;
    std::optional<std::vector<std::string>> judges;
    std::optional<std::size_t> chunk_size, overlap, retrieval_k, themes_n, reverse_questions_n;
    std::optional<bool> followups;
    std::optional<long> seed, max_tokens;
    std::optional<double> consistency_threshold;
    std::optional<std::string> ratings, validation;
};

void apply_overrides(cpsg::RunConfig& config, const FlagOverrides& f) {
    auto set = [](auto& target, const auto& src) {
        if (src) target = *src;
    };
    set(config.corpus_manifest, f.manifest);
    set(config.prompts_path, f.prompts);
    set(config.templates_dir, f.templates_dir);
    set(config.rubric_path, f.rubric);
    set(config.output_dir, f.output_dir);
    set(config.backend, f.backend);
    set(config.backend_url, f.backend_url);
    set(config.mode, f.mode);
    set(config.cassette_path, f.cassette);
    set(config.generator_model, f.generator_model);
    set(config.followup_model, f.followup_model);
    set(config.embedder_model, f.embedder_model);
    set(config.judge_models, f.judges);
    set(config.chunk_size, f.chunk_size);
    set(config.overlap, f.overlap);
    set(config.retrieval_k, f.retrieval_k);
    set(config.themes_n, f.themes_n);
    set(config.reverse_questions_n, f.reverse_questions_n);
    set(config.followup_enabled, f.followups);
    set(config.seed, f.seed);
    set(config.max_tokens, f.max_tokens);
    set(config.consistency_threshold, f.consistency_threshold);
    set(config.ratings_path, f.ratings);
    set(config.validation_path, f.validation);
}

int run_annotate(const cpsg::RunConfig& config, const std::string& validator_id, bool redo) {
    cpsg::pipeline::Paths paths(config);
    cpsg::AnnotateOptions options;
    options.validator_id = validator_id;
    options.redo = redo;
    if (!config.rubric_path.empty() && std::filesystem::exists(config.rubric_path)) {
        std::ifstream rubric(config.rubric_path);
        options.rubric_text.assign((std::istreambuf_iterator<char>(rubric)),
                                   std::istreambuf_iterator<char>());
    }
    auto ledger = paths.eval_input(config);
    std::filesystem::path validation = config.validation_path.empty()
                                           ? paths.out_dir / "validation.jsonl"
                                           : std::filesystem::path(config.validation_path);
    std::filesystem::path ratings = config.ratings_path.empty()
                                        ? paths.out_dir / "ratings.jsonl"
                                        : std::filesystem::path(config.ratings_path);
    std::size_t n = cpsg::annotate(ledger, validation, ratings, std::cin, std::cout, options);
    std::cout << "\nannotated " << n << " responses\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Climate policy scenario generation and evaluation pipeline"};
    app.require_subcommand(1);

    std::string config_file;
    app.add_option("--config", config_file, "JSON config file");

    FlagOverrides flags;
    app.add_option("--manifest", flags.manifest, "Corpus manifest (JSONL)");
    app.add_option("--prompts", flags.prompts, "Prompt corpus (JSONL)");
    app.add_option("--templates-dir", flags.templates_dir, "Judge template directory");
    app.add_option("--rubric", flags.rubric, "Rubric text shown during annotation");
    app.add_option("--output-dir", flags.output_dir, "Artifact output directory");
    app.add_option("--backend", flags.backend, "Backend adapter: http or scripted");
    app.add_option("--backend-url", flags.backend_url, "Model server base URL");
    app.add_option("--mode", flags.mode, "live, record, or replay");
    app.add_option("--cassette", flags.cassette, "Cassette path for record/replay");
    app.add_option("--generator-model", flags.generator_model, "Scenario generator model name");
    app.add_option("--followup-model", flags.followup_model, "Follow-up generator model name");
    app.add_option("--embedder-model", flags.embedder_model, "Embedding model name");
    app.add_option("--judges", flags.judges, "Judge model names")->delimiter(',');
    app.add_option("--chunk-size", flags.chunk_size, "Chunk size in characters");
    app.add_option("--overlap", flags.overlap, "Chunk overlap in characters");
    app.add_option("--retrieval-k", flags.retrieval_k, "Chunks retrieved per prompt");
    app.add_option("--themes-n", flags.themes_n, "Number of themes to elicit");
    app.add_option("--reverse-questions-n", flags.reverse_questions_n,
                   "Reverse questions per answer-relevancy judgment");
    app.add_option("--followup-enabled", flags.followups, "Run follow-up rounds (true/false)");
    app.add_option("--seed", flags.seed, "Generation seed");
    app.add_option("--max-tokens", flags.max_tokens, "Generation token budget");
    app.add_option("--consistency-threshold", flags.consistency_threshold,
                   "cv threshold for the consistency flag");
    app.add_option("--ratings", flags.ratings, "Human rubric ratings file (JSONL)");
    app.add_option("--validation", flags.validation, "Human validation records file (JSONL)");

    std::string validator_id = "human";
    bool redo = false;

    auto* cmd_ingest = app.add_subcommand("ingest", "Load corpus and write chunks");
    auto* cmd_index = app.add_subcommand("index", "Embed chunks and write the vector index");
    auto* cmd_themes = app.add_subcommand("themes", "Elicit energy-transition themes");
    auto* cmd_generate = app.add_subcommand("generate", "Generate scenarios for every prompt");
    auto* cmd_followup = app.add_subcommand("followup", "Run follow-up rounds over responses");
    auto* cmd_annotate = app.add_subcommand("annotate", "Interactive human validation and rating");
    cmd_annotate->add_option("--validator-id", validator_id, "Identifier recorded on new records");
    cmd_annotate->add_flag("--redo", redo, "Re-rate responses that already have records");
    auto* cmd_evaluate = app.add_subcommand("evaluate", "Score responses with the judge models");
    auto* cmd_stats = app.add_subcommand("stats", "Aggregate scores into summary statistics");
    auto* cmd_report = app.add_subcommand("report", "Render the plain-text report");
    auto* cmd_run_all = app.add_subcommand("run-all", "Run the full pipeline end to end");

    // allow global flags to appear after the subcommand name
    for (auto* sub : app.get_subcommands(nullptr)) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        cpsg::RunConfig config = cpsg::load_config(config_file);
        apply_overrides(config, flags);
        config.validate();

        if (cmd_ingest->parsed()) {
            cpsg::pipeline::ingest(config);
        } else if (cmd_index->parsed()) {
            auto gateway = cpsg::pipeline::make_gateway(config);
            cpsg::pipeline::build_index(config, *gateway);
        } else if (cmd_themes->parsed()) {
            auto gateway = cpsg::pipeline::make_gateway(config);
            cpsg::pipeline::elicit_themes(config, *gateway);
        } else if (cmd_generate->parsed()) {
            auto gateway = cpsg::pipeline::make_gateway(config);
            cpsg::pipeline::generate(config, *gateway);
        } else if (cmd_followup->parsed()) {
            auto gateway = cpsg::pipeline::make_gateway(config);
            cpsg::pipeline::followup(config, *gateway);
        } else if (cmd_annotate->parsed()) {
            return run_annotate(config, validator_id, redo);
        } else if (cmd_evaluate->parsed()) {
            auto gateway = cpsg::pipeline::make_gateway(config);
            cpsg::pipeline::evaluate(config, *gateway);
        } else if (cmd_stats->parsed()) {
            cpsg::pipeline::stats(config);
        } else if (cmd_report->parsed()) {
            cpsg::pipeline::report(config);
        } else if (cmd_run_all->parsed()) {
            auto gateway = cpsg::pipeline::make_gateway(config);
            cpsg::pipeline::run_all(config, *gateway);
        }
        return 0;
    } catch (const cpsg::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const cpsg::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const cpsg::BackendError& e) {
        std::cerr << "backend error: " << e.what() << '\n';
        return kExitBackend;
    } catch (const cpsg::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const cpsg::ParseError& e) {
        std::cerr << "judge output parse error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
