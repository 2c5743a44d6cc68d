#include "sltk/rl.hpp"

#include <stdexcept>

namespace sltk::rl {

std::string_view section_name(SectionLabel label) {
    switch (label) {
        case SectionLabel::prompt: return "prompt";
        case SectionLabel::think: return "think";
        case SectionLabel::transcribe: return "transcribe";
        case SectionLabel::other_completion: return "other_completion";
    }
    return "prompt";
}

std::optional<SectionLabel> try_parse_section(std::string_view name) {
    if (name == "prompt") return SectionLabel::prompt;
    if (name == "think") return SectionLabel::think;
    if (name == "transcribe") return SectionLabel::transcribe;
    if (name == "other_completion") return SectionLabel::other_completion;
    return std::nullopt;
}

double causal_loss(const SectionedLogProbs& t) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const TokenLogProb& e : t.entries) {
        if (e.label == SectionLabel::prompt) continue;
        sum += e.log_prob;
        ++count;
    }
    if (count == 0) throw std::invalid_argument("causal_loss: no completion tokens");
    return -sum / static_cast<double>(count);
}

double plw_loss(const SectionedLogProbs& t, double plw) {
    if (plw < 0.0 || plw > 1.0)
        throw std::invalid_argument("plw_loss: plw must be in [0, 1]");
    double weighted = 0.0, total_weight = 0.0;
    for (const TokenLogProb& e : t.entries) {
        double w = 0.0;
        switch (e.label) {
            case SectionLabel::prompt: w = 0.0; break;
            case SectionLabel::think: w = plw; break;
            case SectionLabel::transcribe:
            case SectionLabel::other_completion: w = 1.0; break;
        }
        weighted += w * -e.log_prob;
        total_weight += w;
    }
    if (total_weight == 0.0) throw std::invalid_argument("plw_loss: total weight is zero");
    return weighted / total_weight;
}

void PLWSchedule::validate() const {
    if (!(start >= end && end >= 0.0))
        throw std::invalid_argument("PLWSchedule: need start >= end >= 0");
    if (decay_steps < 1) throw std::invalid_argument("PLWSchedule: decay_steps must be >= 1");
}

double plw_at(long step, const PLWSchedule& schedule) {
    schedule.validate();
    if (step <= 0) return schedule.start;
    if (step >= schedule.decay_steps) return schedule.end;
    double frac = static_cast<double>(step) / static_cast<double>(schedule.decay_steps);
    return schedule.start + (schedule.end - schedule.start) * frac;
}

double completion_prompt_ratio(const SectionedLogProbs& t) {
    std::size_t prompt = 0, completion = 0;
    for (const TokenLogProb& e : t.entries)
        (e.label == SectionLabel::prompt ? prompt : completion) += 1;
    if (prompt == 0)
        throw std::invalid_argument("completion_prompt_ratio: no prompt tokens");
    return static_cast<double>(completion) / static_cast<double>(prompt);
}

std::vector<double> group_advantages(std::span<const double> rewards) {
    if (rewards.empty()) throw std::invalid_argument("group_advantages: empty reward list");
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= static_cast<double>(rewards.size());
    std::vector<double> out;
    out.reserve(rewards.size());
    for (double r : rewards) out.push_back(r - mean);
    return out;
}

}  // namespace sltk::rl
