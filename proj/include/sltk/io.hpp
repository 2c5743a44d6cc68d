#pragma once

#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "sltk/diar.hpp"
#include "sltk/metrics.hpp"
#include "sltk/reward.hpp"
#include "sltk/rl.hpp"

namespace sltk::io {

struct JsonLine {
    std::size_t line_no = 0;
    nlohmann::json value;
};

std::vector<JsonLine> read_jsonl(std::istream& in, std::string_view source);
std::vector<JsonLine> read_jsonl_file(const std::string& path);

// Record parsers; all are strict about keys and types and mention the
// offending field on failure.
metrics::UtterancePair parse_utterance_pair(const nlohmann::json& j);
reward::RolloutGroup parse_rollout_group(const nlohmann::json& j);

struct LogProbRecord {
    std::string id;
    rl::SectionedLogProbs probs;
};
LogProbRecord parse_logprob_record(const nlohmann::json& j);

struct CotPair {
    std::string utt_id;
    text::Lang lang = text::Lang::en;
    std::string reference;
    std::string hypothesis1;
    std::optional<std::string> conversation_id;
};
CotPair parse_cot_pair(const nlohmann::json& j);

diar::VadSegment parse_vad_segment(const nlohmann::json& j);
diar::EmbeddingRecord parse_embedding_record(const nlohmann::json& j);
metrics::TimedSegment parse_timed_segment(const nlohmann::json& j);

/// Index-preserving parallel map over a vector; results are identical for
/// any worker count. The first failure (by index) is rethrown.
template <typename In, typename F>
auto parallel_map(const std::vector<In>& items, int workers, F&& fn)
    -> std::vector<decltype(fn(items.front()))> {
    using Out = decltype(fn(items.front()));
    std::vector<Out> out(items.size());
    if (items.empty()) return out;
    const std::size_t n = items.size();
    const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    if (n_workers == 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(items[i]);
        return out;
    }
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) {
        threads.emplace_back([&, w] {
            for (std::size_t i = static_cast<std::size_t>(w); i < n;
                 i += static_cast<std::size_t>(n_workers)) {
                try {
                    out[i] = fn(items[i]);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace sltk::io
