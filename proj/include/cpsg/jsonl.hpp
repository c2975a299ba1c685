#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpsg/errors.hpp"

namespace cpsg::jsonl {

using nlohmann::json;

// All artifact files are line-delimited JSON records. An optional first line
// of the form {"_meta": {...}} carries provenance (config hash, template
// hashes) and is skipped by readers.

inline json read_meta(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (std::getline(in, line) && !line.empty()) {
        json j = json::parse(line, nullptr, false);
        if (j.is_object() && j.contains("_meta")) return j["_meta"];
    }
    return json::object();
}

inline std::vector<json> read_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<json> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": malformed JSON record");
        }
        if (j.is_object() && j.contains("_meta")) continue;
        records.push_back(std::move(j));
    }
    return records;
}

class Writer {
public:
    explicit Writer(const std::filesystem::path& path, const json& meta = json(), bool append = false)
        : path_(path), out_(path, append ? std::ios::app : std::ios::trunc) {
        if (!out_) throw IoError("cannot write " + path.string());
        if (!append && !meta.is_null()) {
            out_ << json{{"_meta", meta}}.dump() << '\n';
        }
    }

    void write(const json& record) {
        out_ << record.dump() << '\n';
        if (!out_) throw IoError("write failed: " + path_.string());
    }

    void flush() { out_.flush(); }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

}  // namespace cpsg::jsonl
