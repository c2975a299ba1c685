#include <doctest.h>

#include <fstream>
#include <sstream>

#include "cpsg/ratings.hpp"
#include "cpsg/scenario.hpp"
#include "helpers.hpp"

using namespace cpsg;
using cpsg::testutil::TempDir;

namespace {

ValidationRecord val(const std::string& id, bool ok, const std::string& who = "human") {
    return {id, who, ok, ""};
}

void write_ledger(const std::filesystem::path& path, int n_responses) {
    std::ofstream out(path);
    for (int i = 1; i <= n_responses; ++i) {
        ScenarioResponse r;
        char id[8];
        std::snprintf(id, sizeof(id), "p%02d", i);
        r.response_id = id;
        r.prompt_id = i;
        r.raw_text = r.cleaned_text = "**Scenario 1: body " + std::to_string(i) + "**";
        out << r.to_json().dump() << '\n';
    }
}

}  // namespace

TEST_CASE("normalize_rating maps 1..5 onto [0,1] monotonically") {
    CHECK(normalize_rating(5) == 1.0);
    CHECK(normalize_rating(4) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(normalize_rating(1) == doctest::Approx(0.2).epsilon(1e-12));
    for (int r = 2; r <= 5; ++r) CHECK(normalize_rating(r) > normalize_rating(r - 1));
    CHECK_THROWS_AS(normalize_rating(0), ValidationError);
    CHECK_THROWS_AS(normalize_rating(6), ValidationError);
    CHECK_THROWS_AS(normalize_rating(-3), ValidationError);
}

TEST_CASE("validation_rate counts responses, not records") {
    std::vector<ValidationRecord> records;
    for (int i = 0; i < 30; ++i) records.push_back(val("r" + std::to_string(i), true));
    for (int i = 30; i < 34; ++i) records.push_back(val("r" + std::to_string(i), false));
    CHECK(validation_rate(records) == doctest::Approx(30.0 / 34.0).epsilon(1e-12));
    CHECK(format_percent(validation_rate(records)) == "88%");

    CHECK_THROWS_AS(validation_rate({}), ValidationError);
    CHECK(validation_rate({val("a", false)}) == 0.0);
}

TEST_CASE("a response is valid only if every validator agrees") {
    std::vector<ValidationRecord> records = {
        val("a", true, "v1"),  val("a", true, "v2"),
        val("b", true, "v1"),  val("b", false, "v2"),
        val("c", false, "v1"), val("c", false, "v2"),
    };
    CHECK(validation_rate(records) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("format_percent rounds half up") {
    CHECK(format_percent(7.0 / 8.0) == "88%");  // 87.5 rounds up
    CHECK(format_percent(0.884) == "88%");
    CHECK(format_percent(0.885) == "89%");  // exactly representable? close enough: 88.5 -> 89
    CHECK(format_percent(0.0) == "0%");
    CHECK(format_percent(1.0) == "100%");
}

TEST_CASE("ratings_to_scores normalizes under the human evaluator id") {
    std::vector<RubricRating> ratings = {
        {"p01", Metric::faithfulness, 5},
        {"p01", Metric::answer_relevancy, 4},
        {"p02", Metric::context_utilization, 3},
    };
    auto scores = ratings_to_scores(ratings);
    REQUIRE(scores.size() == 3);
    for (const auto& s : scores) CHECK(s.evaluator_id == "human");
    CHECK(scores[0].value == 1.0);
    CHECK(scores[1].value == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(scores[2].value == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("validation and ratings files round-trip through load") {
    TempDir dir;
    {
        std::ofstream out(dir.path / "validation.jsonl");
        out << R"({"response_id":"p01","validator_id":"v1","valid":true,"notes":"ok"})" << '\n'
            << R"({"response_id":"p02","valid":false})" << '\n';
    }
    auto records = load_validation(dir.path / "validation.jsonl");
    REQUIRE(records.size() == 2);
    CHECK(records[0].validator_id == "v1");
    CHECK(records[1].validator_id == "human");  // default
    CHECK(!records[1].valid);

    {
        std::ofstream out(dir.path / "ratings.jsonl");
        out << R"({"response_id":"p01","metric":"faithfulness","rating":5})" << '\n';
    }
    auto ratings = load_ratings(dir.path / "ratings.jsonl");
    REQUIRE(ratings.size() == 1);
    CHECK(ratings[0].metric == Metric::faithfulness);
    CHECK(ratings[0].rating == 5);

    {
        std::ofstream out(dir.path / "bad.jsonl");
        out << R"({"response_id":"p01","metric":"faithfulness","rating":9})" << '\n';
    }
    CHECK_THROWS_AS(load_ratings(dir.path / "bad.jsonl"), ValidationError);
}

TEST_CASE("annotate walks the ledger and re-prompts out-of-range ratings") {
    TempDir dir;
    auto ledger = dir.path / "responses.jsonl";
    auto val_path = dir.path / "validation.jsonl";
    auto rat_path = dir.path / "ratings.jsonl";
    write_ledger(ledger, 2);

    // response 1: valid=y, notes, ratings 5/4/3 (with one bad "6" re-prompted)
    // response 2: valid=n, notes, ratings 2/2/2
    std::istringstream in(
        "y\nlooks plausible\n6\n5\n4\n3\n"
        "n\ntoo vague\n2\n2\n2\n");
    std::ostringstream out;
    AnnotateOptions options;
    options.rubric_text = "5 Excellent ... 1 Very Poor";

    std::size_t n = annotate(ledger, val_path, rat_path, in, out, options);
    CHECK(n == 2);
    CHECK(out.str().find("1..5") != std::string::npos);  // re-prompt happened
    CHECK(out.str().find("5 Excellent") != std::string::npos);

    auto records = load_validation(val_path);
    REQUIRE(records.size() == 2);
    CHECK(records[0].valid);
    CHECK(records[0].notes == "looks plausible");
    CHECK(!records[1].valid);

    auto ratings = load_ratings(rat_path);
    REQUIRE(ratings.size() == 6);
    CHECK(ratings[0].rating == 5);  // the "6" was rejected
    CHECK(ratings[2].rating == 3);
    CHECK(ratings[3].response_id == "p02");
}

TEST_CASE("annotate resumes after interruption without duplicating work") {
    TempDir dir;
    auto ledger = dir.path / "responses.jsonl";
    auto val_path = dir.path / "validation.jsonl";
    auto rat_path = dir.path / "ratings.jsonl";
    write_ledger(ledger, 3);

    // first session: only response 1 fully rated, then EOF mid-second response
    std::istringstream in1("y\n\n5\n5\n5\ny\n");
    std::ostringstream out1;
    CHECK(annotate(ledger, val_path, rat_path, in1, out1, {}) == 1);
    CHECK(load_validation(val_path).size() == 1);

    // second session picks up at response 2
    std::istringstream in2("y\n\n4\n4\n4\nn\nbad\n1\n1\n1\n");
    std::ostringstream out2;
    CHECK(annotate(ledger, val_path, rat_path, in2, out2, {}) == 2);
    CHECK(out2.str().find("p01") == std::string::npos);  // not shown again

    auto records = load_validation(val_path);
    REQUIRE(records.size() == 3);
    CHECK(records[1].response_id == "p02");
    CHECK(load_ratings(rat_path).size() == 9);

    // a third session over a fully annotated ledger does nothing
    std::istringstream in3("");
    std::ostringstream out3;
    CHECK(annotate(ledger, val_path, rat_path, in3, out3, {}) == 0);
    CHECK(load_validation(val_path).size() == 3);
}

TEST_CASE("annotate on an empty session leaves no records") {
    TempDir dir;
    auto ledger = dir.path / "responses.jsonl";
    write_ledger(ledger, 1);
    std::istringstream in("");
    std::ostringstream out;
    CHECK(annotate(ledger, dir.path / "v.jsonl", dir.path / "r.jsonl", in, out, {}) == 0);
    bool no_records = !std::filesystem::exists(dir.path / "v.jsonl") ||
                      load_validation(dir.path / "v.jsonl").empty();
    CHECK(no_records);
}
