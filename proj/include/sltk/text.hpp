#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sltk::text {

/// The 11 language codes the toolkit accepts; anything else is rejected.
enum class Lang { en, fr, de, it, pt, es, jp, ko, ru, th, vi };

inline constexpr std::array<Lang, 11> kAllLangs = {
    Lang::en, Lang::fr, Lang::de, Lang::it, Lang::pt, Lang::es,
    Lang::jp, Lang::ko, Lang::ru, Lang::th, Lang::vi,
};

std::optional<Lang> try_parse_lang(std::string_view code);
Lang parse_lang(std::string_view code);  // throws std::invalid_argument on unknown codes
std::string_view lang_code(Lang lang);

enum class Unit { word, character };
std::string_view unit_name(Unit unit);

struct NormalizationPolicy {
    std::set<Lang> char_unit_langs{Lang::jp, Lang::th, Lang::ko};
    bool strip_punct = true;
    bool lowercase = true;

    Unit unit_for(Lang lang) const {
        return char_unit_langs.count(lang) ? Unit::character : Unit::word;
    }
};

struct NormalizedText {
    std::vector<std::string> tokens;
    Unit unit = Unit::word;
    Lang lang = Lang::en;

    bool empty() const { return tokens.empty(); }
    std::size_t size() const { return tokens.size(); }
};

NormalizedText normalize(std::string_view raw, Lang lang, const NormalizationPolicy& policy = {});

/// Same pipeline with the token unit forced, ignoring the policy's language set.
NormalizedText normalize_as(std::string_view raw, Lang lang, Unit unit,
                            const NormalizationPolicy& policy = {});

enum class OpKind { match, substitution, insertion, deletion };
std::string_view op_kind_name(OpKind kind);
std::optional<OpKind> try_parse_op_kind(std::string_view name);

struct AlignmentOp {
    OpKind kind = OpKind::match;
    std::optional<std::string> ref_token;
    std::optional<std::string> hyp_token;
    std::optional<std::size_t> ref_index;
    std::optional<std::size_t> hyp_index;
};

struct Alignment {
    std::vector<AlignmentOp> ops;
    std::size_t n_match = 0;
    std::size_t n_sub = 0;
    std::size_t n_ins = 0;
    std::size_t n_del = 0;
    std::size_t n_ref = 0;

    std::size_t n_hyp() const { return n_match + n_sub + n_ins; }
    std::size_t distance() const { return n_sub + n_ins + n_del; }
};

/// Minimum-cost edit script with unit costs (match 0, sub/ins/del 1).
/// Backtrace ties resolve as match > substitution > deletion > insertion.
Alignment align_tokens(std::span<const std::string> ref, std::span<const std::string> hyp);
Alignment align(const NormalizedText& ref, const NormalizedText& hyp);  // units must agree

std::size_t edit_distance(std::span<const std::string> a, std::span<const std::string> b);

/// (sub + ins + del) / n_ref. Empty reference: 0 when the hypothesis is also
/// empty, otherwise the degenerate convention n_ins / 1.
double error_rate(const Alignment& a);
bool degenerate_reference(const Alignment& a);

struct ErrorItem {
    OpKind kind = OpKind::substitution;
    std::optional<std::string> ref_token;
    std::optional<std::string> hyp_token;
    std::size_t position = 0;  // op index within the alignment
};

struct ErrorDetails {
    std::vector<ErrorItem> items;
    bool empty() const { return items.empty(); }
};

ErrorDetails error_details(const Alignment& a);

/// 1 - distance/max(|a|,|b|); 1.0 when both sides are empty.
double similarity(const NormalizedText& a, const NormalizedText& b);

}  // namespace sltk::text
