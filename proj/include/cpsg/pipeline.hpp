#pragma once

#include <filesystem>
#include <memory>

#include "cpsg/config.hpp"
#include "cpsg/gateway.hpp"

namespace cpsg::pipeline {

// Derived artifact locations inside output_dir.
struct Paths {
    explicit Paths(const RunConfig& config);

    std::filesystem::path out_dir;
    std::filesystem::path chunks;
    std::filesystem::path index;
    std::filesystem::path themes;
    std::filesystem::path responses;
    std::filesystem::path responses_followups;
    std::filesystem::path scores;
    std::filesystem::path stats;
    std::filesystem::path report_txt;

    // The ledger the evaluation stage should read.
    std::filesystem::path eval_input(const RunConfig& config) const;
};

std::unique_ptr<ModelGateway> make_gateway(const RunConfig& config);

void ingest(const RunConfig& config);
void build_index(const RunConfig& config, ModelGateway& gateway);
void elicit_themes(const RunConfig& config, ModelGateway& gateway);
void generate(const RunConfig& config, ModelGateway& gateway);
void followup(const RunConfig& config, ModelGateway& gateway);
void evaluate(const RunConfig& config, ModelGateway& gateway);
void stats(const RunConfig& config);
void report(const RunConfig& config);
void run_all(const RunConfig& config, ModelGateway& gateway);

}  // namespace cpsg::pipeline
