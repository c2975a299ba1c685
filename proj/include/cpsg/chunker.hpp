#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cpsg {

struct ChunkingConfig {
    std::size_t chunk_size = 1000;  // in Unicode code points
    std::size_t overlap = 100;
    // Coarse to fine; the trailing empty string is the character-level fallback.
    std::vector<std::string> separators = {"\n\n", "\n", " ", ""};

    void validate() const;
};

struct Chunk {
    std::string chunk_id;
    std::string doc_id;
    std::size_t seq_index = 0;
    std::string text;
    // Half-open [start, end) code point offsets into the source body_text.
    std::size_t span_start = 0;
    std::size_t span_end = 0;
};

// Hierarchical greedy splitter. Tries the coarsest separator first; fragments
// longer than chunk_size recurse to finer separators; adjacent chunks share at
// least `overlap` trailing/leading characters whenever a fragment boundary
// permits (more when fragments are coarser than the overlap budget). Lengths
// and spans are counted in Unicode code points. Pure function: identical
// inputs give identical outputs.
std::vector<Chunk> recursive_split(const std::string& text, const ChunkingConfig& config,
                                   const std::string& doc_id = "");

// Removes exact-text duplicates, keeping the first occurrence; order preserved.
std::vector<Chunk> dedupe(const std::vector<Chunk>& chunks);

// Byte offset of each code point, plus a trailing sentinel equal to text size.
std::vector<std::size_t> utf8_offsets(const std::string& text);

}  // namespace cpsg
