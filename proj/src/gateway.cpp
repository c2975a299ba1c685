#include "cpsg/gateway.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <thread>

#include <httplib.h>

#include "cpsg/hashing.hpp"
#include "cpsg/jsonl.hpp"

namespace cpsg {

using nlohmann::json;

std::string now_iso8601() {
    auto now = std::chrono::system_clock::now();
    auto t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace {

std::string assemble_prompt(const GenerationRequest& req) {
    std::string prompt;
    for (const auto& block : req.context_blocks) {
        prompt += block;
        prompt += "\n\n";
    }
    prompt += req.prompt;
    return prompt;
}

// Adapter for the local-inference-server REST convention:
// POST /api/generate and POST /api/embeddings.
class HttpTransport : public Transport {
public:
    explicit HttpTransport(int timeout_seconds) : timeout_seconds_(timeout_seconds) {}

    GenerationResponse generate(const ModelRef& model, const GenerationRequest& req) override {
        json body = {
            {"model", model.model_name},
            {"system", req.system},
            {"prompt", assemble_prompt(req)},
            {"stream", false},
            {"options",
             {{"temperature", req.temperature}, {"seed", req.seed}, {"num_predict", req.max_tokens}}},
        };
        auto start = std::chrono::steady_clock::now();
        json reply = post(model.backend_url, "/api/generate", body);
        auto elapsed = std::chrono::steady_clock::now() - start;

        if (!reply.contains("response") || !reply["response"].is_string()) {
            throw BackendError(BackendError::Kind::malformed_payload,
                               "generate: response field missing or not a string");
        }
        GenerationResponse out;
        out.text = reply["response"].get<std::string>();
        out.prompt_tokens = reply.value("prompt_eval_count", 0L);
        out.completion_tokens = reply.value("eval_count", 0L);
        out.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
        return out;
    }

    EmbeddingVector embed(const ModelRef& model, const std::string& text) override {
        json body = {{"model", model.model_name}, {"prompt", text}};
        json reply = post(model.backend_url, "/api/embeddings", body);
        if (!reply.contains("embedding") || !reply["embedding"].is_array()) {
            throw BackendError(BackendError::Kind::malformed_payload,
                               "embeddings: embedding field missing or not an array");
        }
        EmbeddingVector vec;
        vec.values = reply["embedding"].get<std::vector<double>>();
        vec.validate();
        return vec;
    }

private:
    json post(const std::string& base_url, const std::string& path, const json& body) {
        httplib::Client client(base_url);
        client.set_connection_timeout(timeout_seconds_, 0);
        client.set_read_timeout(timeout_seconds_, 0);
        auto res = client.Post(path, body.dump(), "application/json");
        if (!res) {
            auto kind = res.error() == httplib::Error::ConnectionTimeout ||
                                res.error() == httplib::Error::Read
                            ? BackendError::Kind::timeout
                            : BackendError::Kind::other;
            throw BackendError(kind, "backend unreachable: " + base_url + path + " (" +
                                         httplib::to_string(res.error()) + ")");
        }
        if (res->status != 200) {
            throw BackendError(BackendError::Kind::http_status,
                               "backend returned status " + std::to_string(res->status) + " for " + path);
        }
        json reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded()) {
            throw BackendError(BackendError::Kind::malformed_payload, "backend returned invalid JSON");
        }
        return reply;
    }

    int timeout_seconds_;
};

const char* role_name(ModelRole role) {
    switch (role) {
        case ModelRole::generator: return "generator";
        case ModelRole::followup_generator: return "followup_generator";
        case ModelRole::judge: return "judge";
        case ModelRole::embedder: return "embedder";
    }
    return "?";
}

}  // namespace

std::unique_ptr<Transport> make_http_transport(int timeout_seconds) {
    return std::make_unique<HttpTransport>(timeout_seconds);
}

json canonical_generation_request(const ModelRef& model, const GenerationRequest& req) {
    return {{"kind", "generate"},
            {"model", model.model_name},
            {"system", req.system},
            {"prompt", req.prompt},
            {"context", req.context_blocks},
            {"temperature", req.temperature},
            {"seed", req.seed},
            {"max_tokens", req.max_tokens}};
}

json canonical_embedding_request(const ModelRef& model, const std::string& text) {
    return {{"kind", "embed"}, {"model", model.model_name}, {"text", text}};
}

ModelGateway::ModelGateway(std::unique_ptr<Transport> transport, RetryPolicy retry)
    : transport_(std::move(transport)), retry_(retry) {}

void ModelGateway::record_session(const std::filesystem::path& cassette_path) {
    // Touch the file now so an unwritable path fails fast, and so replaying a
    // run that made zero calls still finds a cassette.
    std::ofstream out(cassette_path, std::ios::app);
    if (!out) throw IoError("cannot open cassette for writing: " + cassette_path.string());
    mode_ = GatewayMode::record;
    cassette_path_ = cassette_path;
}

void ModelGateway::replay_session(const std::filesystem::path& cassette_path) {
    cassette_.clear();
    for (const auto& rec : jsonl::read_records(cassette_path)) {
        cassette_[rec.at("request_hash").get<std::string>()] = rec.at("response");
    }
    mode_ = GatewayMode::replay;
    cassette_path_ = cassette_path;
}

json ModelGateway::with_retries(const std::function<json()>& call) {
    int delay = retry_.backoff_ms;
    for (int attempt = 1;; ++attempt) {
        try {
            return call();
        } catch (const BackendError&) {
            if (attempt >= retry_.max_attempts) throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
            delay = std::min(delay * 2, retry_.backoff_cap_ms);
        }
    }
}

json ModelGateway::dispatch(const json& canonical_request, const std::function<json()>& live_call) {
    const std::string request_hash = hash_json(canonical_request);

    if (mode_ == GatewayMode::replay) {
        auto it = cassette_.find(request_hash);
        if (it == cassette_.end()) {
            throw BackendError(BackendError::Kind::replay_miss,
                               "replay miss: no cassette record for request_hash " + request_hash);
        }
        return it->second;
    }

    json response = with_retries([&] {
        ++transport_calls_;
        return live_call();
    });

    if (mode_ == GatewayMode::record) {
        std::ofstream out(cassette_path_, std::ios::app);
        if (!out) throw IoError("cannot append to cassette: " + cassette_path_.string());
        out << json{{"request_hash", request_hash},
                    {"kind", canonical_request.at("kind")},
                    {"response", response},
                    {"recorded_at", now_iso8601()}}
                   .dump()
            << '\n';
    }
    return response;
}

GenerationResponse ModelGateway::generate(const ModelRef& model, const GenerationRequest& req) {
    if (model.role == ModelRole::embedder) {
        throw ValidationError(std::string("generate called with role ") + role_name(model.role));
    }
    if (req.prompt.empty()) throw ValidationError("generate: empty prompt");
    if (req.temperature < 0) throw ValidationError("generate: negative temperature");

    json canonical = canonical_generation_request(model, req);
    json response = dispatch(canonical, [&] {
        GenerationResponse r = transport_->generate(model, req);
        return json{{"text", r.text},
                    {"prompt_tokens", r.prompt_tokens},
                    {"completion_tokens", r.completion_tokens},
                    {"latency_ms", r.latency_ms}};
    });

    GenerationResponse out;
    out.text = response.at("text").get<std::string>();
    out.prompt_tokens = response.value("prompt_tokens", 0L);
    out.completion_tokens = response.value("completion_tokens", 0L);
    out.latency_ms = response.value("latency_ms", 0L);
    return out;
}

EmbeddingVector ModelGateway::embed_text(const ModelRef& model, const std::string& text) {
    if (model.role != ModelRole::embedder) {
        throw ValidationError(std::string("embed_text called with role ") + role_name(model.role));
    }
    if (text.empty()) throw ValidationError("embed_text: empty text");

    json canonical = canonical_embedding_request(model, text);
    const std::string memo_key = hash_json(canonical);
    if (auto it = embed_memo_.find(memo_key); it != embed_memo_.end()) return it->second;

    json response = dispatch(canonical, [&] {
        EmbeddingVector v = transport_->embed(model, text);
        return json{{"embedding", v.values}};
    });

    EmbeddingVector vec;
    vec.values = response.at("embedding").get<std::vector<double>>();
    vec.validate();
    if (embed_dim_ == 0) {
        embed_dim_ = vec.dim();
    } else if (vec.dim() != embed_dim_) {
        throw BackendError(BackendError::Kind::dimension_drift,
                           "embedding dimension changed mid-run: " + std::to_string(embed_dim_) +
                               " -> " + std::to_string(vec.dim()));
    }
    embed_memo_.emplace(memo_key, vec);
    return vec;
}

}  // namespace cpsg
