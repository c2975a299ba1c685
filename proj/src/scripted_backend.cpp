#include "cpsg/scripted_backend.hpp"

#include <array>
#include <sstream>

#include "cpsg/hashing.hpp"

namespace cpsg {

namespace {

constexpr std::array<const char*, 8> kScenarioTitles = {
    "African Renaissance",  "Climate-Resilient Economy", "Energy Poverty Trap",
    "Green Corridor",       "Distributed Power",         "Continental Grid Compact",
    "Just Transition Fund", "Carbon Market Union",
};

constexpr std::array<const char*, 8> kPolicyLevers = {
    "feed-in tariffs",          "carbon pricing",        "sovereign green bonds",
    "mini-grid concessions",    "technology transfer",   "capacity-building programs",
    "regional power pools",     "results-based finance",
};

constexpr std::array<const char*, 6> kActors = {
    "the African Union",       "national energy ministries", "regional development banks",
    "community cooperatives",  "independent power producers", "multilateral climate funds",
};

bool contains(const std::string& haystack, const char* needle) {
    return haystack.find(needle) != std::string::npos;
}

class ScriptedTransport : public Transport {
public:
    explicit ScriptedTransport(std::size_t dim) : dim_(dim) {}

    GenerationResponse generate(const ModelRef& model, const GenerationRequest& req) override {
        const std::string& p = req.prompt;
        std::string text;
        if (contains(p, "one theme per line")) {
            text =
                "renewable energy adoption\n"
                "technology transfer\n"
                "climate finance mobilization\n"
                "energy efficiency standards\n"
                "grid integration and storage";
        } else if (contains(p, "one statement per line")) {
            text = statements_for(model.model_name, p);
        } else if (contains(p, "one question per line")) {
            text = questions_for(model.model_name, p);
        } else if (contains(p, "single word, yes or no")) {
            text = verdict_for(model.model_name, p);
        } else {
            text = scenario_for(model.model_name, p);
        }
        GenerationResponse out;
        out.text = text;
        out.prompt_tokens = static_cast<long>(req.prompt.size() / 4);
        out.completion_tokens = static_cast<long>(text.size() / 4);
        out.latency_ms = 0;
        return out;
    }

    EmbeddingVector embed(const ModelRef& model, const std::string& text) override {
        EmbeddingVector vec;
        vec.values.reserve(dim_);
        for (std::size_t i = 0; i < dim_; ++i) {
            std::uint64_t h = fnv1a(model.model_name + "\x1f" + text + "\x1f" + std::to_string(i));
            // Map to [-1, 1]; never exactly zero in every coordinate.
            double v = static_cast<double>((h >> 16) & 0xFFFF) / 65535.0 * 2.0 - 1.0;
            vec.values.push_back(v == 0.0 ? 1e-3 : v);
        }
        return vec;
    }

private:
    static std::string pick(const char* const* pool, std::size_t pool_size, std::uint64_t h,
                            unsigned slot) {
        return pool[(h >> (slot * 7)) % pool_size];
    }

    static std::string statements_for(const std::string& model_name, const std::string& prompt) {
        std::uint64_t h = fnv1a(model_name + "|stmt|" + prompt);
        std::size_t n = 2 + h % 3;  // 2..4 claims
        std::ostringstream out;
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t hi = fnv1a(std::to_string(h) + "#" + std::to_string(i));
            out << "The scenario relies on " << pick(kPolicyLevers.data(), kPolicyLevers.size(), hi, 1)
                << " coordinated by " << pick(kActors.data(), kActors.size(), hi, 3) << ".";
            if (i + 1 < n) out << '\n';
        }
        return out.str();
    }

    static std::string questions_for(const std::string& model_name, const std::string& prompt) {
        std::uint64_t h = fnv1a(model_name + "|q|" + prompt);
        std::ostringstream out;
        for (std::size_t i = 0; i < 4; ++i) {
            std::uint64_t hi = fnv1a(std::to_string(h) + "?" + std::to_string(i));
            out << "How could " << pick(kPolicyLevers.data(), kPolicyLevers.size(), hi, 2)
                << " advance the energy transition in Sub-Saharan Africa?";
            if (i + 1 < 4) out << '\n';
        }
        return out.str();
    }

    static std::string verdict_for(const std::string& model_name, const std::string& prompt) {
        std::uint64_t h = fnv1a(model_name + "|v|" + prompt);
        return h % 10 < 7 ? "yes" : "no";
    }

    static std::string scenario_for(const std::string& model_name, const std::string& prompt) {
        std::uint64_t h = fnv1a(model_name + "|gen|" + prompt);
        std::ostringstream out;
        out << "Here are three potential future climate policy scenarios:\n\n";
        for (int s = 1; s <= 3; ++s) {
            std::uint64_t hs = fnv1a(std::to_string(h) + "/s" + std::to_string(s));
            out << "**Scenario " << s << ": \""
                << pick(kScenarioTitles.data(), kScenarioTitles.size(), hs, 0) << "\"**\n";
            int bullets = 2 + static_cast<int>(hs % 3);
            for (int b = 0; b < bullets; ++b) {
                std::uint64_t hb = fnv1a(std::to_string(hs) + "-b" + std::to_string(b));
                out << "- By 2030, " << pick(kActors.data(), kActors.size(), hb, 2) << " scale up "
                    << pick(kPolicyLevers.data(), kPolicyLevers.size(), hb, 4)
                    << " to broaden access to clean energy.\n";
            }
            out << '\n';
        }
        out << "Note: These scenarios are illustrative projections.";
        return out.str();
    }

    std::size_t dim_;
};

}  // namespace

std::unique_ptr<Transport> make_scripted_transport(std::size_t embedding_dim) {
    return std::make_unique<ScriptedTransport>(embedding_dim);
}

}  // namespace cpsg
