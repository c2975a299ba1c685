#include "cpsg/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "cpsg/chunker.hpp"
#include "cpsg/corpus.hpp"
#include "cpsg/evaluation.hpp"
#include "cpsg/hashing.hpp"
#include "cpsg/jsonl.hpp"
#include "cpsg/ratings.hpp"
#include "cpsg/scenario.hpp"
#include "cpsg/scripted_backend.hpp"
#include "cpsg/stats.hpp"

namespace cpsg::pipeline {

using nlohmann::json;

Paths::Paths(const RunConfig& config) : out_dir(config.output_dir) {
    chunks = out_dir / "chunks.jsonl";
    index = out_dir / "index.jsonl";
    themes = out_dir / "themes.jsonl";
    responses = out_dir / "responses.jsonl";
    responses_followups = out_dir / "responses_followups.jsonl";
    scores = out_dir / "scores.jsonl";
    stats = out_dir / "stats.json";
    report_txt = out_dir / "report.txt";
}

std::filesystem::path Paths::eval_input(const RunConfig& config) const {
    return config.followup_enabled && std::filesystem::exists(responses_followups)
               ? responses_followups
               : responses;
}

namespace {

json provenance_meta(const RunConfig& config) {
    json meta = {{"config_sha256", config.config_hash()}};
    json templates = json::object();
    std::filesystem::path dir = config.templates_dir;
    if (std::filesystem::exists(dir)) {
        try {
            templates = JudgeTemplates::load(dir).hashes();
        } catch (const IoError&) {
            // partial template dirs get whatever hashes are loadable below
        }
        auto theme_path = dir / "theme_elicitation.txt";
        if (std::filesystem::exists(theme_path)) {
            std::ifstream in(theme_path, std::ios::binary);
            std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            templates["theme_elicitation"] = sha256_hex(text);
        }
    }
    meta["template_sha256"] = templates;
    return meta;
}

std::string load_theme_template(const RunConfig& config) {
    std::filesystem::path path = std::filesystem::path(config.templates_dir) / "theme_elicitation.txt";
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open theme template: " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

ModelRef model_ref(const RunConfig& config, const std::string& name, ModelRole role) {
    return {config.backend_url, name, role};
}

GeneratorConfig generator_config(const RunConfig& config) {
    GeneratorConfig gc;
    gc.generator = model_ref(config, config.generator_model, ModelRole::generator);
    gc.followup_generator = model_ref(config, config.followup_model, ModelRole::followup_generator);
    gc.embedder = model_ref(config, config.embedder_model, ModelRole::embedder);
    gc.retrieval_k = config.retrieval_k;
    gc.theme_template = load_theme_template(config);
    return gc;
}

void require_artifact(const std::filesystem::path& path, const std::string& producer) {
    if (!std::filesystem::exists(path)) {
        throw ConfigError(path.string() + " not found; run `" + producer + "` first");
    }
}

}  // namespace

std::unique_ptr<ModelGateway> make_gateway(const RunConfig& config) {
    config.validate();
    std::unique_ptr<Transport> transport = config.backend == "scripted"
                                               ? make_scripted_transport()
                                               : make_http_transport();
    auto gateway = std::make_unique<ModelGateway>(std::move(transport));
    if (config.mode == "record") {
        gateway->record_session(config.cassette_path);
    } else if (config.mode == "replay") {
        gateway->replay_session(config.cassette_path);
    }
    return gateway;
}

void ingest(const RunConfig& config) {
    if (config.corpus_manifest.empty()) throw ConfigError("corpus_manifest is not set");
    Paths paths(config);
    std::filesystem::create_directories(paths.out_dir);

    auto docs = load_corpus(config.corpus_manifest);

    ChunkingConfig chunking;
    chunking.chunk_size = config.chunk_size;
    chunking.overlap = config.overlap;

    std::vector<Chunk> all_chunks;
    for (const auto& doc : docs) {
        auto chunks = recursive_split(doc.body_text, chunking, doc.doc_id);
        all_chunks.insert(all_chunks.end(), std::make_move_iterator(chunks.begin()),
                          std::make_move_iterator(chunks.end()));
    }
    // Duplicate filtering operates at chunk level, corpus-wide.
    all_chunks = dedupe(all_chunks);

    jsonl::Writer out(paths.chunks, provenance_meta(config));
    for (const auto& chunk : all_chunks) {
        out.write({{"chunk_id", chunk.chunk_id},
                   {"doc_id", chunk.doc_id},
                   {"seq_index", chunk.seq_index},
                   {"text", chunk.text},
                   {"char_span", {chunk.span_start, chunk.span_end}}});
    }
}

void build_index(const RunConfig& config, ModelGateway& gateway) {
    Paths paths(config);
    require_artifact(paths.chunks, "ingest");

    ModelRef embedder = model_ref(config, config.embedder_model, ModelRole::embedder);
    EmbeddingIndex index;
    for (const auto& rec : jsonl::read_records(paths.chunks)) {
        IndexEntry entry;
        entry.chunk_id = rec.at("chunk_id").get<std::string>();
        entry.text = rec.at("text").get<std::string>();
        entry.vector = gateway.embed_text(embedder, entry.text);
        index.upsert(std::move(entry));
    }
    index.save(paths.index);
}

void elicit_themes(const RunConfig& config, ModelGateway& gateway) {
    Paths paths(config);
    require_artifact(paths.index, "index");

    auto index = EmbeddingIndex::load(paths.index);
    ScenarioGenerator generator(gateway, index, generator_config(config));
    auto themes = generator.elicit_themes(config.themes_n);

    jsonl::Writer out(paths.themes, provenance_meta(config));
    for (const auto& theme : themes) out.write({{"theme", theme}});
}

void generate(const RunConfig& config, ModelGateway& gateway) {
    Paths paths(config);
    require_artifact(paths.index, "index");

    auto index = EmbeddingIndex::load(paths.index);
    ScenarioGenerator generator(gateway, index, generator_config(config));
    auto prompts = load_prompts(config.prompts_path);

    // Results are committed in prompt_id order regardless of any future
    // parallel execution of the generation calls.
    std::sort(prompts.begin(), prompts.end(),
              [](const PromptSpec& a, const PromptSpec& b) { return a.prompt_id < b.prompt_id; });

    jsonl::Writer out(paths.responses, provenance_meta(config));
    for (const auto& prompt : prompts) {
        ScenarioResponse resp = generator.generate_scenario(prompt, config.retrieval_k);
        out.write(resp.to_json());
    }
}

void followup(const RunConfig& config, ModelGateway& gateway) {
    Paths paths(config);
    require_artifact(paths.responses, "generate");

    auto index = EmbeddingIndex::load(paths.index);
    ScenarioGenerator generator(gateway, index, generator_config(config));

    std::map<int, std::vector<std::string>> followups_by_prompt;
    for (const auto& prompt : load_prompts(config.prompts_path)) {
        followups_by_prompt[prompt.prompt_id] = prompt.followups;
    }

    jsonl::Writer out(paths.responses_followups, provenance_meta(config));
    for (const auto& rec : jsonl::read_records(paths.responses)) {
        ScenarioResponse resp = ScenarioResponse::from_json(rec);
        auto it = followups_by_prompt.find(resp.prompt_id);
        const auto& followups =
            it == followups_by_prompt.end() ? std::vector<std::string>{} : it->second;
        FollowupOutcome outcome = generator.run_followups(std::move(resp), followups);
        if (outcome.failed_index) {
            out.write(outcome.response.to_json());
            out.flush();
            throw BackendError(BackendError::Kind::other,
                               "follow-up " + std::to_string(*outcome.failed_index) + " failed for " +
                                   outcome.response.response_id + ": " + outcome.error);
        }
        out.write(outcome.response.to_json());
    }
}

void evaluate(const RunConfig& config, ModelGateway& gateway) {
    Paths paths(config);
    require_artifact(paths.responses, "generate");
    require_artifact(paths.index, "index");

    auto index = EmbeddingIndex::load(paths.index);
    auto templates = JudgeTemplates::load(config.templates_dir);
    EvaluationEngine engine(gateway, templates, config.reverse_questions_n);

    ModelRef embedder = model_ref(config, config.embedder_model, ModelRole::embedder);

    std::map<int, std::string> prompt_texts;
    for (const auto& prompt : load_prompts(config.prompts_path)) {
        prompt_texts[prompt.prompt_id] = prompt.text;
    }

    jsonl::Writer out(paths.scores, provenance_meta(config));
    // Emission ordered by (response_id, metric), evaluators within.
    for (const auto& rec : jsonl::read_records(paths.eval_input(config))) {
        ScenarioResponse resp = ScenarioResponse::from_json(rec);
        auto prompt_it = prompt_texts.find(resp.prompt_id);
        if (prompt_it == prompt_texts.end()) {
            throw ValidationError("response " + resp.response_id + " references unknown prompt_id " +
                                  std::to_string(resp.prompt_id));
        }

        std::vector<std::string> contexts;
        for (const auto& chunk_id : resp.retrieved_chunk_ids) {
            const IndexEntry* entry = index.find(chunk_id);
            if (!entry) throw ValidationError("retrieved chunk not in index: " + chunk_id);
            contexts.push_back(entry->text);
        }

        for (Metric metric : kAllMetrics) {
            for (const auto& judge_name : config.judge_models) {
                ModelRef judge = model_ref(config, judge_name, ModelRole::judge);
                double value = 0.0;
                switch (metric) {
                    case Metric::faithfulness:
                        value = engine.faithfulness(resp.cleaned_text, contexts, judge);
                        break;
                    case Metric::answer_relevancy:
                        value = engine.answer_relevancy(prompt_it->second, resp.cleaned_text, judge,
                                                        embedder, config.reverse_questions_n);
                        break;
                    case Metric::context_utilization:
                        value = engine.context_utilization(prompt_it->second, resp.cleaned_text,
                                                           contexts, judge);
                        break;
                }
                out.write({{"response_id", resp.response_id},
                           {"evaluator_id", judge_name},
                           {"metric", to_string(metric)},
                           {"value", value}});
            }
        }
    }
}

void stats(const RunConfig& config) {
    Paths paths(config);
    require_artifact(paths.scores, "evaluate");

    ScoreMatrix matrix;
    for (const auto& rec : jsonl::read_records(paths.scores)) {
        matrix.add({rec.at("response_id").get<std::string>(),
                    rec.at("evaluator_id").get<std::string>(),
                    metric_from_string(rec.at("metric").get<std::string>()),
                    rec.at("value").get<double>()});
    }

    if (!config.ratings_path.empty()) {
        for (const auto& score : ratings_to_scores(load_ratings(config.ratings_path))) {
            matrix.add(score);
        }
    }

    std::optional<ValidationSummary> validation;
    if (!config.validation_path.empty()) {
        auto records = load_validation(config.validation_path);
        std::map<std::string, bool> by_response;
        for (const auto& r : records) {
            auto [it, inserted] = by_response.emplace(r.response_id, r.valid);
            if (!inserted) it->second = it->second && r.valid;
        }
        ValidationSummary vs;
        vs.total = by_response.size();
        for (const auto& [_, ok] : by_response) {
            if (ok) ++vs.valid;
        }
        validation = vs;
    }

    auto summary = summary_table(matrix, config.consistency_threshold);
    std::vector<std::string> warnings;
    auto correlations = correlation_table(matrix, &warnings);

    json j = render_report_json(summary, correlations, validation);
    j["_meta"] = provenance_meta(config);
    j["warnings"] = warnings;

    std::ofstream out(paths.stats);
    if (!out) throw IoError("cannot write " + paths.stats.string());
    out << j.dump(2) << '\n';
}

void report(const RunConfig& config) {
    Paths paths(config);
    require_artifact(paths.stats, "stats");

    std::ifstream in(paths.stats);
    json j = json::parse(in);

    std::vector<SummaryRow> summary;
    for (const auto& row : j.at("summary")) {
        SummaryRow s;
        s.evaluator_id = row.at("evaluator_id").get<std::string>();
        s.metric = metric_from_string(row.at("metric").get<std::string>());
        s.mean = row.at("mean").get<double>();
        s.sd = row.at("sd").get<double>();
        s.cv = row.at("cv").get<double>();
        s.consistent = row.at("consistent").get<bool>();
        summary.push_back(std::move(s));
    }
    std::vector<CorrelationRow> correlations;
    for (const auto& row : j.at("correlations")) {
        correlations.push_back({{row.at("evaluator_a").get<std::string>(),
                                 row.at("evaluator_b").get<std::string>()},
                                metric_from_string(row.at("metric").get<std::string>()),
                                row.at("rho").get<double>()});
    }
    std::optional<ValidationSummary> validation;
    if (j.contains("validation")) {
        validation = ValidationSummary{j["validation"].at("valid").get<std::size_t>(),
                                       j["validation"].at("total").get<std::size_t>()};
    }

    std::ofstream out(paths.report_txt);
    if (!out) throw IoError("cannot write " + paths.report_txt.string());
    out << "config_sha256: " << config.config_hash() << "\n\n";
    out << render_report_text(summary, correlations, validation);
}

void run_all(const RunConfig& config, ModelGateway& gateway) {
    ingest(config);
    build_index(config, gateway);
    elicit_themes(config, gateway);
    generate(config, gateway);
    if (config.followup_enabled) followup(config, gateway);
    evaluate(config, gateway);
    stats(config);
    report(config);
}

}  // namespace cpsg::pipeline
