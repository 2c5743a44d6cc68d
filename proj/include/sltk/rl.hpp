#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace sltk::rl {

enum class SectionLabel { prompt, think, transcribe, other_completion };

std::string_view section_name(SectionLabel label);
std::optional<SectionLabel> try_parse_section(std::string_view name);

struct TokenLogProb {
    double log_prob = 0.0;  // must be <= 0
    SectionLabel label = SectionLabel::prompt;
};

struct SectionedLogProbs {
    std::vector<TokenLogProb> entries;
};

/// Mean negative log-probability over completion tokens; prompt tokens are
/// excluded entirely. Throws when no completion token exists.
double causal_loss(const SectionedLogProbs& t);

/// Weighted mean of -log p with w=1 on transcribe and other completion
/// tokens, w=plw on think tokens, w=0 on prompt tokens. Throws when plw is
/// outside [0,1] or the total weight is zero.
double plw_loss(const SectionedLogProbs& t, double plw);

struct PLWSchedule {
    double start = 1.0;
    double end = 0.1;
    long decay_steps = 300;
    enum class Shape { linear } shape = Shape::linear;

    void validate() const;  // start >= end >= 0, decay_steps >= 1
};

/// Linear decay from start to end over [0, decay_steps], clamped afterwards.
/// Endpoint values are returned exactly.
double plw_at(long step, const PLWSchedule& schedule);

/// Completion-to-prompt length ratio R_g. Throws when there are no prompt tokens.
double completion_prompt_ratio(const SectionedLogProbs& t);

/// Mean-centered advantages: a_i = r_i - mean(r). No standard-deviation or
/// length normalization. Throws on an empty list.
std::vector<double> group_advantages(std::span<const double> rewards);

}  // namespace sltk::rl
