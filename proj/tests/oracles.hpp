#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

// Independent oracles for the test suites. These stay deliberately naive so
// they share no code path with the implementations they check.
namespace oracle {

// Exhaustive recursion over every edit script; exponential, fine for short
// sequences.
inline std::size_t edit_distance_exhaustive(const std::vector<std::string>& a,
                                            const std::vector<std::string>& b,
                                            std::size_t i = 0, std::size_t j = 0) {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    std::size_t best =
        edit_distance_exhaustive(a, b, i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
    best = std::min(best, edit_distance_exhaustive(a, b, i + 1, j) + 1);
    best = std::min(best, edit_distance_exhaustive(a, b, i, j + 1) + 1);
    return best;
}

inline std::vector<std::string> random_tokens(std::mt19937_64& rng, std::size_t max_len,
                                              int alphabet) {
    std::size_t len = rng() % (max_len + 1);
    std::vector<std::string> out;
    out.reserve(len);
    for (std::size_t i = 0; i < len; ++i)
        out.push_back(std::string(1, static_cast<char>('a' + rng() % alphabet)));
    return out;
}

inline std::string random_word(std::mt19937_64& rng, std::size_t min_len = 1,
                               std::size_t max_len = 8) {
    std::size_t len = min_len + rng() % (max_len - min_len + 1);
    std::string w;
    for (std::size_t i = 0; i < len; ++i)
        w.push_back(static_cast<char>('a' + rng() % 26));
    return w;
}

inline std::string random_phrase(std::mt19937_64& rng, std::size_t min_words,
                                 std::size_t max_words) {
    std::size_t n = min_words + rng() % (max_words - min_words + 1);
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) out += ' ';
        out += random_word(rng);
    }
    return out;
}

}  // namespace oracle
