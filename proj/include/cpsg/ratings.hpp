#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cpsg/evaluation.hpp"

namespace cpsg {

struct ValidationRecord {
    std::string response_id;
    std::string validator_id;
    bool valid = false;
    std::string notes;
};

struct RubricRating {
    std::string response_id;
    Metric metric = Metric::faithfulness;
    int rating = 0;  // 1 (Very Poor) .. 5 (Excellent)
};

// Maps a 1..5 rubric rating onto the [0,1] metric scale as rating/5.
double normalize_rating(int rating);

// Fraction of responses deemed valid. With multiple validators a response
// counts valid only if every validator marked it valid.
double validation_rate(const std::vector<ValidationRecord>& records);

// Whole-percent rendering with round-half-up, e.g. 30/34 -> "88%".
std::string format_percent(double fraction);

std::vector<MetricScore> ratings_to_scores(const std::vector<RubricRating>& ratings);

std::vector<ValidationRecord> load_validation(const std::filesystem::path& path);
std::vector<RubricRating> load_ratings(const std::filesystem::path& path);

struct AnnotateOptions {
    std::string validator_id = "human";
    bool redo = false;  // re-rate responses that already have records
    std::string rubric_text;  // rendered before each rating prompt
};

// Interactive annotation pass over a run ledger. Appends one ValidationRecord
// and three RubricRatings per response; already-annotated responses are
// skipped unless redo is set. Out-of-range ratings are re-prompted. Records
// are flushed per response, so an interrupted session leaves consistent
// partial files. Returns the number of newly annotated responses.
std::size_t annotate(const std::filesystem::path& run_ledger,
                     const std::filesystem::path& validation_path,
                     const std::filesystem::path& ratings_path, std::istream& in, std::ostream& out,
                     const AnnotateOptions& options);

}  // namespace cpsg
