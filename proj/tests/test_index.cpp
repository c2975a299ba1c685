#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cpsg/embedding_index.hpp"
#include "cpsg/errors.hpp"
#include "helpers.hpp"

using namespace cpsg;

namespace {

EmbeddingVector vec(std::initializer_list<double> values) { return {std::vector<double>(values)}; }

EmbeddingVector random_vec(std::mt19937& rng, std::size_t dim) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    EmbeddingVector v;
    v.values.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i) v.values.push_back(dist(rng));
    return v;
}

// Independent scalar-loop scan used as the retrieval oracle.
std::vector<RetrievalResult> brute_force_top_k(const std::vector<IndexEntry>& entries,
                                               const EmbeddingVector& query, std::size_t k) {
    std::vector<RetrievalResult> all;
    for (const auto& e : entries) {
        double dot = 0, na = 0, nb = 0;
        for (std::size_t i = 0; i < query.dim(); ++i) {
            dot += query.values[i] * e.vector.values[i];
            na += query.values[i] * query.values[i];
            nb += e.vector.values[i] * e.vector.values[i];
        }
        all.push_back({e.chunk_id, dot / (std::sqrt(na) * std::sqrt(nb)), e.text});
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.chunk_id < b.chunk_id;
    });
    if (all.size() > k) all.resize(k);
    return all;
}

}  // namespace

TEST_CASE("cosine basics") {
    CHECK(cosine(vec({3, 4}), vec({3, 4})) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cosine(vec({1, 0}), vec({0, 1})) == doctest::Approx(0.0).epsilon(1e-12));
    // hand-computed 1/sqrt(2), checked against the scalar loop oracle
    double expected = 1.0 / std::sqrt(2.0);
    CHECK(cosine(vec({1, 0}), vec({1, 1})) == doctest::Approx(expected).epsilon(1e-12));
    std::vector<IndexEntry> one = {{"a", vec({1, 1}), ""}};
    CHECK(brute_force_top_k(one, vec({1, 0}), 1)[0].score ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("cosine rejects mismatched dims and zero vectors") {
    CHECK_THROWS_AS(cosine(vec({1, 0}), vec({1, 0, 0})), ValidationError);
    CHECK_THROWS_AS(cosine(vec({0, 0}), vec({1, 0})), ValidationError);
}

TEST_CASE("cosine is symmetric and bounded on random vectors") {
    std::mt19937 rng(7);
    for (int i = 0; i < 200; ++i) {
        auto a = random_vec(rng, 16);
        auto b = random_vec(rng, 16);
        double ab = cosine(a, b);
        CHECK(ab == doctest::Approx(cosine(b, a)).epsilon(1e-12));
        CHECK(ab <= 1.0 + 1e-9);
        CHECK(ab >= -1.0 - 1e-9);
    }
}

TEST_CASE("upsert fixes dimension and replaces by chunk_id") {
    EmbeddingIndex index;
    index.upsert({"a", vec({1, 0}), "alpha"});
    CHECK_THROWS_AS(index.upsert({"b", vec({1, 0, 0}), ""}), ValidationError);
    index.upsert({"a", vec({0, 1}), "alpha2"});
    CHECK(index.size() == 1);
    auto hits = index.query_top_k(vec({0, 1}), 1);
    CHECK(hits[0].chunk_id == "a");
    CHECK(hits[0].text == "alpha2");
    CHECK(hits[0].score == doctest::Approx(1.0));
}

TEST_CASE("an inserted entry retrieves itself at rank 1") {
    EmbeddingIndex index;
    std::mt19937 rng(11);
    for (int i = 0; i < 20; ++i) {
        index.upsert({"c" + std::to_string(i), random_vec(rng, 8), ""});
    }
    const IndexEntry* probe = index.find("c7");
    REQUIRE(probe != nullptr);
    auto hits = index.query_top_k(probe->vector, 1);
    CHECK(hits[0].chunk_id == "c7");
    CHECK(hits[0].score == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ties are broken by chunk_id ascending") {
    EmbeddingIndex index;
    index.upsert({"zz", vec({1, 1}), ""});
    index.upsert({"aa", vec({1, 1}), ""});
    index.upsert({"mm", vec({-1, 0}), ""});
    auto hits = index.query_top_k(vec({1, 1}), 3);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].chunk_id == "aa");
    CHECK(hits[1].chunk_id == "zz");
    CHECK(hits[2].chunk_id == "mm");
}

TEST_CASE("k larger than the index returns everything sorted") {
    EmbeddingIndex index;
    index.upsert({"a", vec({1, 0}), ""});
    index.upsert({"b", vec({0, 1}), ""});
    auto hits = index.query_top_k(vec({1, 0.1}), 10);
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].chunk_id == "a");
    CHECK(hits[0].score >= hits[1].score);
}

TEST_CASE("empty index and zero query are errors") {
    EmbeddingIndex index;
    CHECK_THROWS_AS(index.query_top_k(vec({1, 0}), 1), ValidationError);
    index.upsert({"a", vec({1, 0}), ""});
    CHECK_THROWS_AS(index.query_top_k(vec({0, 0}), 1), ValidationError);
    CHECK_THROWS_AS(index.upsert({"z", vec({0, 0}), ""}), ValidationError);
}

TEST_CASE("oracle equivalence: 500 random 32-dim entries for k in {1,5,10}") {
    std::mt19937 rng(20260823);
    EmbeddingIndex index;
    std::vector<IndexEntry> entries;
    for (int i = 0; i < 500; ++i) {
        char id[8];
        std::snprintf(id, sizeof(id), "c%04d", i);
        IndexEntry e{id, random_vec(rng, 32), "t" + std::to_string(i)};
        entries.push_back(e);
        index.upsert(e);
    }
    // planted ties: duplicate vectors under fresh ids
    for (int i = 0; i < 10; ++i) {
        IndexEntry e = entries[i * 3];
        e.chunk_id = "a_tie" + std::to_string(i);
        entries.push_back(e);
        index.upsert(e);
    }

    for (std::size_t k : {1UL, 5UL, 10UL}) {
        for (int q = 0; q < 25; ++q) {
            auto query = q % 5 == 0 ? entries[static_cast<std::size_t>(q) * 7].vector
                                    : random_vec(rng, 32);
            auto got = index.query_top_k(query, k);
            auto expected = brute_force_top_k(entries, query, k);
            REQUIRE(got.size() == expected.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i].chunk_id == expected[i].chunk_id);
                CHECK(got[i].score == expected[i].score);  // exact equality
                if (i > 0) CHECK(got[i].score <= got[i - 1].score);
            }
        }
    }
}

TEST_CASE("save/load round trip preserves every query result exactly") {
    testutil::TempDir dir;
    std::mt19937 rng(3);
    EmbeddingIndex index;
    for (int i = 0; i < 50; ++i) {
        index.upsert({"c" + std::to_string(i), random_vec(rng, 12), "text " + std::to_string(i)});
    }
    auto path = dir.path / "index.jsonl";
    index.save(path);
    auto loaded = EmbeddingIndex::load(path);
    REQUIRE(loaded.size() == index.size());
    for (int q = 0; q < 20; ++q) {
        auto query = random_vec(rng, 12);
        auto a = index.query_top_k(query, 5);
        auto b = loaded.query_top_k(query, 5);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].chunk_id == b[i].chunk_id);
            CHECK(a[i].score == b[i].score);
            CHECK(a[i].text == b[i].text);
        }
    }
}
