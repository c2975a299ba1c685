#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cpsg/corpus.hpp"
#include "cpsg/errors.hpp"
#include "helpers.hpp"

using namespace cpsg;
using cpsg::testutil::TempDir;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

}  // namespace

TEST_CASE("empty manifest loads an empty corpus") {
    TempDir dir;
    write_file(dir.path / "manifest.jsonl", "");
    CHECK(load_corpus(dir.path / "manifest.jsonl").empty());
}

TEST_CASE("documents come back in manifest order with resolved paths") {
    TempDir dir;
    write_file(dir.path / "a.txt", "first document body");
    write_file(dir.path / "b.txt", "second document body");
    write_file(dir.path / "manifest.jsonl",
               R"({"doc_id":"b","meeting_group":"kyoto_protocol","title":"B","path":"b.txt","verified":true})"
               "\n"
               R"({"doc_id":"a","meeting_group":"convention","title":"A","path":"a.txt","verified":false})"
               "\n");
    auto docs = load_corpus(dir.path / "manifest.jsonl");
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].doc_id == "b");
    CHECK(docs[0].meeting_group == MeetingGroup::kyoto_protocol);
    CHECK(docs[0].verified);
    CHECK(docs[1].doc_id == "a");
    CHECK(docs[1].body_text == "first document body");
}

TEST_CASE("missing file aborts naming the entry") {
    TempDir dir;
    write_file(dir.path / "manifest.jsonl",
               R"({"doc_id":"gone","meeting_group":"convention","title":"","path":"gone.txt"})"
               "\n");
    CHECK_THROWS_WITH_AS(load_corpus(dir.path / "manifest.jsonl"),
                         doctest::Contains("gone"), IoError);
}

TEST_CASE("empty body aborts") {
    TempDir dir;
    write_file(dir.path / "empty.txt", "   \n ");
    write_file(dir.path / "manifest.jsonl",
               R"({"doc_id":"e","meeting_group":"convention","title":"","path":"empty.txt"})"
               "\n");
    CHECK_THROWS_WITH_AS(load_corpus(dir.path / "manifest.jsonl"),
                         doctest::Contains("empty body"), ValidationError);
}

TEST_CASE("duplicate doc_id aborts") {
    TempDir dir;
    write_file(dir.path / "a.txt", "body");
    std::string entry =
        R"({"doc_id":"dup","meeting_group":"convention","title":"","path":"a.txt"})";
    write_file(dir.path / "manifest.jsonl", entry + "\n" + entry + "\n");
    CHECK_THROWS_WITH_AS(load_corpus(dir.path / "manifest.jsonl"),
                         doctest::Contains("dup"), ValidationError);
}

TEST_CASE("unknown meeting group is rejected") {
    TempDir dir;
    write_file(dir.path / "a.txt", "body");
    write_file(dir.path / "manifest.jsonl",
               R"({"doc_id":"a","meeting_group":"cop99","title":"","path":"a.txt"})"
               "\n");
    CHECK_THROWS_AS(load_corpus(dir.path / "manifest.jsonl"), ValidationError);
}

TEST_CASE("a synthetic 94-entry manifest loads 94 documents across 3 groups") {
    TempDir dir;
    const char* groups[] = {"convention", "kyoto_protocol", "paris_agreement"};
    std::ofstream manifest(dir.path / "manifest.jsonl");
    for (int i = 0; i < 94; ++i) {
        std::string name = "doc" + std::to_string(i);
        write_file(dir.path / (name + ".txt"), "body of " + name);
        manifest << R"({"doc_id":")" << name << R"(","meeting_group":")" << groups[i % 3]
                 << R"(","title":"t","path":")" << name << R"(.txt"})"
                 << "\n";
    }
    manifest.close();
    auto docs = load_corpus(dir.path / "manifest.jsonl");
    REQUIRE(docs.size() == 94);
    int counts[3] = {0, 0, 0};
    for (const auto& d : docs) counts[static_cast<int>(d.meeting_group)]++;
    CHECK(counts[0] > 0);
    CHECK(counts[1] > 0);
    CHECK(counts[2] > 0);
}
