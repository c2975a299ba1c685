#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpsg/embedding_index.hpp"
#include "cpsg/errors.hpp"

namespace cpsg {

enum class ModelRole { generator, followup_generator, judge, embedder };

struct ModelRef {
    std::string backend_url;
    std::string model_name;
    ModelRole role = ModelRole::generator;
};

struct GenerationRequest {
    std::string system;
    std::string prompt;
    std::vector<std::string> context_blocks;
    double temperature = 0.0;
    long seed = 0;
    long max_tokens = 2048;
};

struct GenerationResponse {
    std::string text;
    long prompt_tokens = 0;
    long completion_tokens = 0;
    long latency_ms = 0;
};

// One backend adapter. Implementations: HttpTransport (local inference server
// REST convention), ScriptedTransport (deterministic offline stand-in).
class Transport {
public:
    virtual ~Transport() = default;
    virtual GenerationResponse generate(const ModelRef& model, const GenerationRequest& req) = 0;
    virtual EmbeddingVector embed(const ModelRef& model, const std::string& text) = 0;
};

std::unique_ptr<Transport> make_http_transport(int timeout_seconds = 120);

struct RetryPolicy {
    int max_attempts = 3;
    int backoff_ms = 100;   // doubled per attempt
    int backoff_cap_ms = 1000;
};

enum class GatewayMode { live, record, replay };

// Content hash of the canonicalized request; invariant under field reordering.
nlohmann::json canonical_generation_request(const ModelRef& model, const GenerationRequest& req);
nlohmann::json canonical_embedding_request(const ModelRef& model, const std::string& text);

// Uniform access to generation, judging and embedding models. Record mode
// appends TranscriptRecords to a cassette; replay mode answers purely from the
// cassette and performs no transport calls at all.
class ModelGateway {
public:
    explicit ModelGateway(std::unique_ptr<Transport> transport, RetryPolicy retry = {});

    void record_session(const std::filesystem::path& cassette_path);
    void replay_session(const std::filesystem::path& cassette_path);

    GenerationResponse generate(const ModelRef& model, const GenerationRequest& req);
    EmbeddingVector embed_text(const ModelRef& model, const std::string& text);

    GatewayMode mode() const { return mode_; }
    // Number of calls that reached the transport (instrumentation for the
    // replay-purity property).
    std::size_t transport_calls() const { return transport_calls_; }

private:
    nlohmann::json dispatch(const nlohmann::json& canonical_request,
                            const std::function<nlohmann::json()>& live_call);
    nlohmann::json with_retries(const std::function<nlohmann::json()>& call);

    std::unique_ptr<Transport> transport_;
    RetryPolicy retry_;
    GatewayMode mode_ = GatewayMode::live;
    std::filesystem::path cassette_path_;
    std::unordered_map<std::string, nlohmann::json> cassette_;
    std::unordered_map<std::string, EmbeddingVector> embed_memo_;
    std::size_t embed_dim_ = 0;
    std::size_t transport_calls_ = 0;
};

std::string now_iso8601();

}  // namespace cpsg
