#include "sltk/reward.hpp"

#include <algorithm>
#include <stdexcept>

namespace sltk::reward {

namespace {

double rate_against(std::string_view ref, std::string_view hyp, text::Lang lang,
                    const text::NormalizationPolicy& policy) {
    auto r = text::normalize(ref, lang, policy);
    auto h = text::normalize(hyp, lang, policy);
    return text::error_rate(text::align(r, h));
}

std::set<text::OpKind> actual_kinds(const text::Alignment& a) {
    std::set<text::OpKind> kinds;
    for (const auto& op : a.ops)
        if (op.kind != text::OpKind::match) kinds.insert(op.kind);
    return kinds;
}

using ClaimKey = std::tuple<text::OpKind, std::string, std::string>;

ClaimKey claim_key(text::OpKind kind, const std::optional<std::string>& ref_token,
                   const std::optional<std::string>& hyp_token) {
    return {kind, ref_token.value_or(""), hyp_token.value_or("")};
}

bool has_special_tokens(std::string_view completion) {
    for (const std::string& surface : grammar::special_token_surfaces())
        if (completion.find(surface) != std::string_view::npos) return true;
    return false;
}

std::string trimmed(std::string_view sv) {
    std::size_t b = sv.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    std::size_t e = sv.find_last_not_of(" \t\r\n");
    return std::string(sv.substr(b, e - b + 1));
}

}  // namespace

std::string_view rf_name(RF rf) {
    switch (rf) {
        case RF::rf1: return "RF1";
        case RF::rf2: return "RF2";
        case RF::rf3: return "RF3";
        case RF::rf4: return "RF4";
        case RF::rf5: return "RF5";
    }
    return "RF1";
}

std::optional<RF> try_parse_rf(std::string_view name) {
    for (RF rf : kAllRFs)
        if (name == rf_name(rf)) return rf;
    return std::nullopt;
}

double RewardConfig::weight(RF rf) const {
    auto it = weights.find(rf);
    return it == weights.end() ? 0.0 : it->second;
}

void RewardConfig::validate() const {
    for (const auto& [rf, w] : weights)
        if (w < 0.0)
            throw std::invalid_argument("reward weight for " + std::string(rf_name(rf)) +
                                        " must be >= 0");
    if (similarity_threshold < 0.0 || similarity_threshold > 1.0)
        throw std::invalid_argument("similarity_threshold must be in [0, 1]");
    if (group_size < 1) throw std::invalid_argument("group_size must be >= 1");
}

double rf1_format(const grammar::StructuredCompletion& c) {
    return (c.well_formed() && c.think && c.transcription) ? 1.0 : 0.0;
}

double rf2_accuracy(const grammar::StructuredCompletion& c, std::string_view ref,
                    text::Lang lang, const text::NormalizationPolicy& policy) {
    if (!c.transcription) return 0.0;
    return std::max(0.0, 1.0 - rate_against(ref, *c.transcription, lang, policy));
}

double rf3_error_types(const grammar::StructuredCompletion& c, std::string_view ref,
                       text::Lang lang, const text::NormalizationPolicy& policy) {
    if (!c.think || !c.think->hypothesis1) return 0.0;
    auto r = text::normalize(ref, lang, policy);
    auto h1 = text::normalize(*c.think->hypothesis1, lang, policy);
    std::set<text::OpKind> actual = actual_kinds(text::align(r, h1));
    std::set<text::OpKind> claimed;
    for (const auto& claim : c.think->claims) claimed.insert(claim.kind);
    if (actual.empty() && claimed.empty()) return 1.0;
    std::size_t inter = 0;
    for (text::OpKind k : claimed) inter += actual.count(k);
    std::size_t uni = actual.size() + claimed.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double rf4_error_details(const grammar::StructuredCompletion& c, std::string_view ref,
                         text::Lang lang, const text::NormalizationPolicy& policy) {
    if (!c.think || !c.think->hypothesis1) return 0.0;
    auto r = text::normalize(ref, lang, policy);
    auto h1 = text::normalize(*c.think->hypothesis1, lang, policy);
    auto details = text::error_details(text::align(r, h1));
    std::multiset<ClaimKey> actual;
    for (const auto& item : details.items)
        actual.insert(claim_key(item.kind, item.ref_token, item.hyp_token));
    const auto& claims = c.think->claims;
    if (actual.empty() && claims.empty()) return 1.0;
    if (actual.empty() || claims.empty()) return 0.0;
    std::size_t matched = 0;
    for (const auto& claim : claims) {
        auto it = actual.find(claim_key(claim.kind, claim.ref_token, claim.hyp_token));
        if (it != actual.end()) {
            actual.erase(it);
            ++matched;
        }
    }
    return 2.0 * static_cast<double>(matched) /
           static_cast<double>(claims.size() + details.items.size());
}

Rf5Score rf5_improvement(const grammar::StructuredCompletion& c, std::string_view ref,
                         text::Lang lang, const RewardConfig& cfg) {
    Rf5Score out;
    if (!c.think || !c.think->hypothesis1 || !c.transcription) return out;
    const std::string& h1 = *c.think->hypothesis1;
    const std::string& h2 = *c.transcription;
    double rate1 = rate_against(ref, h1, lang, cfg.policy);
    double rate2 = rate_against(ref, h2, lang, cfg.policy);
    bool improved = cfg.strict_improvement ? rate2 < rate1 : rate2 <= rate1;
    if (cfg.reward_zero_tie && rate1 == 0.0 && rate2 == 0.0) improved = true;
    if (!improved) return out;
    // Anti-hacking guard: hypothesis1 must stay close to hypothesis2.
    auto a = text::normalize_as(h1, lang, text::Unit::character, cfg.policy);
    auto b = text::normalize_as(h2, lang, text::Unit::character, cfg.policy);
    if (text::similarity(a, b) < cfg.similarity_threshold) {
        out.guard_tripped = true;
        return out;
    }
    out.score = 1.0;
    return out;
}

RewardBreakdown score_completion(std::string_view completion, std::string_view ref,
                                 text::Lang lang, const RewardConfig& cfg) {
    cfg.validate();
    grammar::StructuredCompletion c = grammar::parse_completion(completion);
    // A bare transcription with no tags at all still gets accuracy credit:
    // RF1 keeps the format pressure while RF2 keeps the accuracy signal alive.
    if (!c.transcription && !has_special_tokens(completion)) {
        std::string plain = trimmed(completion);
        if (!plain.empty()) c.transcription = std::move(plain);
    }
    RewardBreakdown out;
    for (RF rf : cfg.enabled) {
        double score = 0.0;
        switch (rf) {
            case RF::rf1: score = rf1_format(c); break;
            case RF::rf2: score = rf2_accuracy(c, ref, lang, cfg.policy); break;
            case RF::rf3: score = rf3_error_types(c, ref, lang, cfg.policy); break;
            case RF::rf4: score = rf4_error_details(c, ref, lang, cfg.policy); break;
            case RF::rf5: {
                Rf5Score rf5 = rf5_improvement(c, ref, lang, cfg);
                score = rf5.score;
                out.guard_tripped = rf5.guard_tripped;
                break;
            }
        }
        out.per_rf[rf] = score;
        out.total += cfg.weight(rf) * score;
    }
    return out;
}

std::vector<RewardBreakdown> score_group(const RolloutGroup& group, const RewardConfig& cfg) {
    if (group.completions.empty())
        throw std::invalid_argument("score_group: completions must be non-empty");
    std::vector<RewardBreakdown> out;
    out.reserve(group.completions.size());
    for (const std::string& completion : group.completions)
        out.push_back(score_completion(completion, group.reference, group.lang, cfg));
    return out;
}

}  // namespace sltk::reward
