#include "cpsg/ratings.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "cpsg/jsonl.hpp"
#include "cpsg/scenario.hpp"

namespace cpsg {

double normalize_rating(int rating) {
    if (rating < 1 || rating > 5) {
        throw ValidationError("rating out of range 1..5: " + std::to_string(rating));
    }
    return static_cast<double>(rating) / 5.0;
}

double validation_rate(const std::vector<ValidationRecord>& records) {
    if (records.empty()) throw ValidationError("validation_rate: no records");
    std::map<std::string, bool> by_response;
    for (const auto& rec : records) {
        auto [it, inserted] = by_response.emplace(rec.response_id, rec.valid);
        if (!inserted) it->second = it->second && rec.valid;
    }
    std::size_t valid = 0;
    for (const auto& [_, ok] : by_response) {
        if (ok) ++valid;
    }
    return static_cast<double>(valid) / static_cast<double>(by_response.size());
}

std::string format_percent(double fraction) {
    long pct = static_cast<long>(std::floor(fraction * 100.0 + 0.5));
    return std::to_string(pct) + "%";
}

std::vector<MetricScore> ratings_to_scores(const std::vector<RubricRating>& ratings) {
    std::vector<MetricScore> scores;
    scores.reserve(ratings.size());
    for (const auto& r : ratings) {
        scores.push_back({r.response_id, "human", r.metric, normalize_rating(r.rating)});
    }
    return scores;
}

std::vector<ValidationRecord> load_validation(const std::filesystem::path& path) {
    std::vector<ValidationRecord> records;
    for (const auto& rec : jsonl::read_records(path)) {
        records.push_back({rec.at("response_id").get<std::string>(),
                           rec.value("validator_id", "human"), rec.at("valid").get<bool>(),
                           rec.value("notes", "")});
    }
    return records;
}

std::vector<RubricRating> load_ratings(const std::filesystem::path& path) {
    std::vector<RubricRating> ratings;
    for (const auto& rec : jsonl::read_records(path)) {
        RubricRating r;
        r.response_id = rec.at("response_id").get<std::string>();
        r.metric = metric_from_string(rec.at("metric").get<std::string>());
        r.rating = rec.at("rating").get<int>();
        normalize_rating(r.rating);  // range check on load
        ratings.push_back(std::move(r));
    }
    return ratings;
}

namespace {

// Returns false on EOF / blank line (treated as "stop the session").
bool read_line(std::istream& in, std::ostream& out, const std::string& prompt, std::string& line) {
    out << prompt << std::flush;
    if (!std::getline(in, line)) return false;
    return true;
}

}  // namespace

std::size_t annotate(const std::filesystem::path& run_ledger,
                     const std::filesystem::path& validation_path,
                     const std::filesystem::path& ratings_path, std::istream& in, std::ostream& out,
                     const AnnotateOptions& options) {
    auto ledger = jsonl::read_records(run_ledger);

    std::set<std::string> already;
    if (std::filesystem::exists(validation_path)) {
        for (const auto& rec : load_validation(validation_path)) {
            if (rec.validator_id == options.validator_id) already.insert(rec.response_id);
        }
    }

    std::ofstream val_out(validation_path, std::ios::app);
    std::ofstream rat_out(ratings_path, std::ios::app);
    if (!val_out || !rat_out) throw IoError("cannot open annotation files for append");

    std::size_t annotated = 0;
    for (const auto& rec : ledger) {
        ScenarioResponse resp = ScenarioResponse::from_json(rec);
        if (!options.redo && already.contains(resp.response_id)) continue;

        out << "\n=== response " << resp.response_id << " (prompt " << resp.prompt_id << ") ===\n"
            << resp.cleaned_text << "\n\n";

        std::string line;
        bool valid = false;
        while (true) {
            if (!read_line(in, out, "valid? [y/n] ", line)) return annotated;
            if (line == "y" || line == "Y") { valid = true; break; }
            if (line == "n" || line == "N") { valid = false; break; }
            out << "please answer y or n\n";
        }
        std::string notes;
        if (!read_line(in, out, "notes: ", notes)) return annotated;

        std::vector<RubricRating> ratings;
        if (!options.rubric_text.empty()) out << options.rubric_text << '\n';
        for (Metric metric : kAllMetrics) {
            int rating = 0;
            while (true) {
                if (!read_line(in, out, to_string(metric) + " rating [1-5]: ", line)) return annotated;
                try {
                    rating = std::stoi(line);
                    normalize_rating(rating);
                    break;
                } catch (...) {
                    out << "rating must be an integer in 1..5\n";
                }
            }
            ratings.push_back({resp.response_id, metric, rating});
        }

        // Commit the whole response at once, validation record last.
        for (const auto& r : ratings) {
            rat_out << nlohmann::json{{"response_id", r.response_id},
                                      {"metric", to_string(r.metric)},
                                      {"rating", r.rating}}
                           .dump()
                    << '\n';
        }
        val_out << nlohmann::json{{"response_id", resp.response_id},
                                  {"validator_id", options.validator_id},
                                  {"valid", valid},
                                  {"notes", notes}}
                       .dump()
                << '\n';
        rat_out.flush();
        val_out.flush();
        ++annotated;
    }
    return annotated;
}

}  // namespace cpsg
