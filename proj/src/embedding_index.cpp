#include "cpsg/embedding_index.hpp"

#include <algorithm>
#include <cmath>

#include "cpsg/errors.hpp"
#include "cpsg/jsonl.hpp"

namespace cpsg {

bool EmbeddingVector::all_zero() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

void EmbeddingVector::validate() const {
    if (values.empty()) throw ValidationError("embedding vector is empty");
    for (double v : values) {
        if (!std::isfinite(v)) throw ValidationError("embedding vector contains non-finite value");
    }
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw ValidationError("cosine: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                              std::to_string(b.dim()) + ")");
    }
    double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        dot += a.values[i] * b.values[i];
        norm_a += a.values[i] * a.values[i];
        norm_b += b.values[i] * b.values[i];
    }
    if (norm_a == 0.0 || norm_b == 0.0) throw ValidationError("cosine: zero vector");
    return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

void EmbeddingIndex::upsert(IndexEntry entry) {
    entry.vector.validate();
    if (entry.vector.all_zero()) throw ValidationError("upsert: zero vector for " + entry.chunk_id);
    if (dim_ == 0) {
        dim_ = entry.vector.dim();
    } else if (entry.vector.dim() != dim_) {
        throw ValidationError("upsert: dimension " + std::to_string(entry.vector.dim()) +
                              " does not match index dimension " + std::to_string(dim_));
    }
    auto it = by_id_.find(entry.chunk_id);
    if (it != by_id_.end()) {
        entries_[it->second] = std::move(entry);
    } else {
        by_id_.emplace(entry.chunk_id, entries_.size());
        entries_.push_back(std::move(entry));
    }
}

const IndexEntry* EmbeddingIndex::find(const std::string& chunk_id) const {
    auto it = by_id_.find(chunk_id);
    return it == by_id_.end() ? nullptr : &entries_[it->second];
}

std::vector<RetrievalResult> EmbeddingIndex::query_top_k(const EmbeddingVector& query,
                                                         std::size_t k) const {
    if (entries_.empty()) throw ValidationError("query on empty index");
    if (k == 0) throw ValidationError("k must be positive");
    query.validate();
    if (query.all_zero()) throw ValidationError("query: zero vector");

    std::vector<RetrievalResult> results;
    results.reserve(entries_.size());
    for (const auto& entry : entries_) {
        results.push_back({entry.chunk_id, cosine(query, entry.vector), entry.text});
    }
    std::sort(results.begin(), results.end(), [](const RetrievalResult& a, const RetrievalResult& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.chunk_id < b.chunk_id;
    });
    if (results.size() > k) results.resize(k);
    return results;
}

void EmbeddingIndex::save(const std::filesystem::path& path) const {
    jsonl::Writer out(path);
    for (const auto& entry : entries_) {
        out.write({{"chunk_id", entry.chunk_id},
                   {"dim", entry.vector.dim()},
                   {"values", entry.vector.values},
                   {"text", entry.text}});
    }
}

EmbeddingIndex EmbeddingIndex::load(const std::filesystem::path& path) {
    EmbeddingIndex index;
    for (const auto& rec : jsonl::read_records(path)) {
        IndexEntry entry;
        entry.chunk_id = rec.at("chunk_id").get<std::string>();
        entry.vector.values = rec.at("values").get<std::vector<double>>();
        if (rec.at("dim").get<std::size_t>() != entry.vector.dim()) {
            throw IoError("index file: dim field disagrees with vector length for " + entry.chunk_id);
        }
        entry.text = rec.value("text", "");
        index.upsert(std::move(entry));
    }
    return index;
}

}  // namespace cpsg
