#include "cpsg/chunker.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

#include "cpsg/errors.hpp"

namespace cpsg {

void ChunkingConfig::validate() const {
    if (chunk_size == 0) throw ValidationError("chunk_size must be positive");
    if (overlap >= chunk_size) throw ValidationError("overlap must be smaller than chunk_size");
    if (separators.empty() || !separators.back().empty()) {
        throw ValidationError("separators must end with the empty string fallback");
    }
}

std::vector<std::size_t> utf8_offsets(const std::string& text) {
    std::vector<std::size_t> offsets;
    offsets.reserve(text.size() + 1);
    for (std::size_t i = 0; i < text.size(); ++i) {
        if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) offsets.push_back(i);
    }
    offsets.push_back(text.size());
    return offsets;
}

namespace {

// A fragment is a half-open code point span; fragments tile the text with
// each separator occurrence attached to the piece it terminates.
using Span = std::pair<std::size_t, std::size_t>;

std::size_t code_point_index(const std::vector<std::size_t>& offsets, std::size_t byte_pos) {
    auto it = std::lower_bound(offsets.begin(), offsets.end(), byte_pos);
    return static_cast<std::size_t>(it - offsets.begin());
}

void collect_fragments(const std::string& text, const std::vector<std::size_t>& offsets,
                       std::size_t begin, std::size_t end, const ChunkingConfig& config,
                       std::size_t level, std::vector<Span>& out) {
    const std::size_t length = end - begin;
    if (length == 0) return;
    if (length <= config.chunk_size || level >= config.separators.size()) {
        out.emplace_back(begin, end);
        return;
    }

    const std::string& sep = config.separators[level];
    if (sep.empty()) {
        // Character-level fallback: one fragment per code point.
        for (std::size_t i = begin; i < end; ++i) out.emplace_back(i, i + 1);
        return;
    }

    const std::size_t sep_cp_len = utf8_offsets(sep).size() - 1;
    std::size_t piece_begin = begin;
    bool found = false;
    std::size_t byte_pos = offsets[begin];
    const std::size_t byte_end = offsets[end];
    while (true) {
        std::size_t hit = text.find(sep, byte_pos);
        if (hit == std::string::npos || hit + sep.size() > byte_end) break;
        found = true;
        std::size_t piece_end = code_point_index(offsets, hit) + sep_cp_len;
        if (piece_end - piece_begin <= config.chunk_size) {
            out.emplace_back(piece_begin, piece_end);
        } else {
            collect_fragments(text, offsets, piece_begin, piece_end, config, level + 1, out);
        }
        piece_begin = piece_end;
        byte_pos = hit + sep.size();
    }
    if (!found) {
        collect_fragments(text, offsets, begin, end, config, level + 1, out);
        return;
    }
    if (piece_begin < end) {
        if (end - piece_begin <= config.chunk_size) {
            out.emplace_back(piece_begin, end);
        } else {
            collect_fragments(text, offsets, piece_begin, end, config, level + 1, out);
        }
    }
}

}  // namespace

std::vector<Chunk> recursive_split(const std::string& text, const ChunkingConfig& config,
                                   const std::string& doc_id) {
    config.validate();
    if (text.empty()) return {};

    const auto offsets = utf8_offsets(text);
    const std::size_t total_cps = offsets.size() - 1;

    std::vector<Span> fragments;
    collect_fragments(text, offsets, 0, total_cps, config, 0, fragments);

    std::vector<Chunk> chunks;
    auto emit = [&](std::size_t start, std::size_t end) {
        Chunk chunk;
        chunk.doc_id = doc_id;
        chunk.seq_index = chunks.size();
        chunk.chunk_id = doc_id + ":" + std::to_string(chunk.seq_index);
        chunk.span_start = start;
        chunk.span_end = end;
        chunk.text = text.substr(offsets[start], offsets[end] - offsets[start]);
        chunks.push_back(std::move(chunk));
    };

    std::deque<Span> window;
    std::size_t window_len = 0;  // spans are contiguous, so this is back.end - front.begin
    for (const Span& frag : fragments) {
        const std::size_t frag_len = frag.second - frag.first;
        if (window_len + frag_len > config.chunk_size && !window.empty()) {
            emit(window.front().first, window.back().second);
            // Keep the smallest fragment suffix still covering the overlap
            // budget; keep dropping past that if the next fragment would not fit.
            while (!window.empty()) {
                const std::size_t front_len = window.front().second - window.front().first;
                const bool droppable_for_overlap = window_len - front_len >= config.overlap;
                const bool must_drop_for_size = window_len + frag_len > config.chunk_size;
                if (!droppable_for_overlap && !must_drop_for_size) break;
                window_len -= front_len;
                window.pop_front();
            }
        }
        window.push_back(frag);
        window_len += frag_len;
    }
    if (!window.empty()) {
        // Suppress a trailing chunk that is a pure suffix of the previous one.
        if (chunks.empty() || window.back().second > chunks.back().span_end) {
            emit(window.front().first, window.back().second);
        }
    }
    return chunks;
}

std::vector<Chunk> dedupe(const std::vector<Chunk>& chunks) {
    std::vector<Chunk> out;
    out.reserve(chunks.size());
    std::unordered_set<std::string> seen;
    for (const auto& chunk : chunks) {
        if (seen.insert(chunk.text).second) out.push_back(chunk);
    }
    return out;
}

}  // namespace cpsg
