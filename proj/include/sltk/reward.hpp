#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sltk/grammar.hpp"
#include "sltk/text.hpp"

namespace sltk::reward {

enum class RF { rf1, rf2, rf3, rf4, rf5 };

inline constexpr std::array<RF, 5> kAllRFs = {RF::rf1, RF::rf2, RF::rf3, RF::rf4, RF::rf5};

std::string_view rf_name(RF rf);  // "RF1" ... "RF5"
std::optional<RF> try_parse_rf(std::string_view name);

struct RewardConfig {
    std::set<RF> enabled{RF::rf1, RF::rf2, RF::rf3, RF::rf4, RF::rf5};
    std::map<RF, double> weights{
        {RF::rf1, 0.5}, {RF::rf2, 0.8}, {RF::rf3, 0.5}, {RF::rf4, 0.5}, {RF::rf5, 0.5},
    };
    double similarity_threshold = 0.5;  // RF5 guard on char-level similarity(h1, h2)
    bool strict_improvement = true;
    bool reward_zero_tie = false;       // also reward rate(h1) == rate(h2) == 0
    int group_size = 4;
    text::NormalizationPolicy policy;

    double weight(RF rf) const;
    void validate() const;  // throws std::invalid_argument
};

struct RolloutGroup {
    std::string group_id;
    std::string reference;
    text::Lang lang = text::Lang::en;
    std::vector<std::string> completions;
    double sampling_temperature = 0.5;
};

struct RewardBreakdown {
    std::map<RF, double> per_rf;
    double total = 0.0;
    bool guard_tripped = false;
};

/// Binary structural check: no diagnostics, think and transcribe both present.
double rf1_format(const grammar::StructuredCompletion& c);

/// max(0, 1 - error_rate(ref, hypothesis2)); 0 when the transcription is absent.
double rf2_accuracy(const grammar::StructuredCompletion& c, std::string_view ref,
                    text::Lang lang, const text::NormalizationPolicy& policy);

/// Jaccard similarity between claimed and actual error-kind sets.
double rf3_error_types(const grammar::StructuredCompletion& c, std::string_view ref,
                       text::Lang lang, const text::NormalizationPolicy& policy);

/// Multiset F1 between claimed and actual (kind, ref_token, hyp_token) triples.
double rf4_error_details(const grammar::StructuredCompletion& c, std::string_view ref,
                         text::Lang lang, const text::NormalizationPolicy& policy);

struct Rf5Score {
    double score = 0.0;
    bool guard_tripped = false;  // improvement held but similarity(h1, h2) < threshold
};

Rf5Score rf5_improvement(const grammar::StructuredCompletion& c, std::string_view ref,
                         text::Lang lang, const RewardConfig& cfg);

RewardBreakdown score_completion(std::string_view completion, std::string_view ref,
                                 text::Lang lang, const RewardConfig& cfg);

std::vector<RewardBreakdown> score_group(const RolloutGroup& group, const RewardConfig& cfg);

}  // namespace sltk::reward
