#pragma once

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "cpsg/chunker.hpp"

namespace cpsg::testutil {

struct TempDir {
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("cpsg_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path path;
    static inline int counter = 0;
};

// Random plausible prose: words, spaces, line and paragraph breaks, a little
// multibyte UTF-8.
inline std::string random_text(std::mt19937& rng, std::size_t max_len, bool with_unicode = true) {
    static const char* const words[] = {"energy", "policy", "grid",   "solar",  "wind",
                                        "carbon", "africa", "access", "target", "finance"};
    std::uniform_int_distribution<int> word_pick(0, 9);
    std::uniform_int_distribution<int> sep_pick(0, 19);
    std::uniform_int_distribution<std::size_t> len_pick(0, max_len);

    const std::size_t target = len_pick(rng);
    std::string text;
    while (text.size() < target) {
        if (with_unicode && sep_pick(rng) == 19) text += "\xC3\xA9";  // e-acute
        text += words[word_pick(rng)];
        switch (sep_pick(rng) % 5) {
            case 0: text += "\n\n"; break;
            case 1: text += "\n"; break;
            default: text += " "; break;
        }
    }
    return text;
}

// Straightforward sliding-window reference: fixed stride chunk_size - overlap,
// in code points. Matches recursive_split exactly when no separator matches
// (character-level fallback only).
inline std::vector<std::pair<std::size_t, std::size_t>> sliding_window_spans(std::size_t length,
                                                                             std::size_t chunk_size,
                                                                             std::size_t overlap) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    if (length == 0) return spans;
    if (length <= chunk_size) {
        spans.emplace_back(0, length);
        return spans;
    }
    const std::size_t stride = chunk_size - overlap;
    std::size_t start = 0;
    while (true) {
        std::size_t end = std::min(start + chunk_size, length);
        spans.emplace_back(start, end);
        if (end == length) break;
        start += stride;
        if (start + chunk_size >= length) {
            // final window: clamp so the last chunk ends exactly at length
            spans.emplace_back(start, length);
            break;
        }
    }
    return spans;
}

}  // namespace cpsg::testutil
