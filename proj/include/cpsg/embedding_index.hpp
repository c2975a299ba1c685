#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace cpsg {

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
    bool all_zero() const;
    void validate() const;  // finite values, non-empty
};

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

struct IndexEntry {
    std::string chunk_id;
    EmbeddingVector vector;
    std::string text;
};

struct RetrievalResult {
    std::string chunk_id;
    double score = 0.0;
    std::string text;
};

// Exact brute-force cosine index. Deterministic: results sorted by score
// descending, ties broken by chunk_id ascending.
class EmbeddingIndex {
public:
    // Re-upserting an existing chunk_id replaces its vector and text. The
    // first insert fixes the index dimension.
    void upsert(IndexEntry entry);

    std::vector<RetrievalResult> query_top_k(const EmbeddingVector& query, std::size_t k) const;

    std::size_t size() const { return entries_.size(); }
    std::size_t dim() const { return dim_; }
    const IndexEntry* find(const std::string& chunk_id) const;

    void save(const std::filesystem::path& path) const;
    static EmbeddingIndex load(const std::filesystem::path& path);

private:
    std::vector<IndexEntry> entries_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::size_t dim_ = 0;
};

}  // namespace cpsg
