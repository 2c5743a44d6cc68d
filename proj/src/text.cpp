#include "sltk/text.hpp"

#include <algorithm>
#include <stdexcept>

#include "sltk/unicode.hpp"

namespace sltk::text {

namespace {

constexpr std::array<std::string_view, 11> kLangCodes = {
    "en", "fr", "de", "it", "pt", "es", "jp", "ko", "ru", "th", "vi",
};

// Apostrophes join the surrounding characters ("don't" -> "dont"); all other
// punctuation separates tokens.
bool is_apostrophe(char32_t cp) {
    return cp == U'\'' || cp == 0x2019 || cp == 0x02BC;
}

std::u32string apply_charmap(std::string_view raw, const NormalizationPolicy& policy) {
    std::u32string cps = uni::decode_utf8(raw);
    std::u32string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) {
        if (policy.strip_punct && is_apostrophe(cp)) continue;
        if (policy.strip_punct && uni::is_punct(cp)) {
            out.push_back(U' ');
            continue;
        }
        out.push_back(policy.lowercase ? uni::to_lower(cp) : cp);
    }
    return out;
}

}  // namespace

std::optional<Lang> try_parse_lang(std::string_view code) {
    for (std::size_t i = 0; i < kLangCodes.size(); ++i)
        if (code == kLangCodes[i]) return kAllLangs[i];
    return std::nullopt;
}

Lang parse_lang(std::string_view code) {
    if (auto lang = try_parse_lang(code)) return *lang;
    throw std::invalid_argument("unknown language code: '" + std::string(code) + "'");
}

std::string_view lang_code(Lang lang) {
    return kLangCodes[static_cast<std::size_t>(lang)];
}

std::string_view unit_name(Unit unit) {
    return unit == Unit::word ? "word" : "character";
}

std::string_view op_kind_name(OpKind kind) {
    switch (kind) {
        case OpKind::match: return "match";
        case OpKind::substitution: return "substitution";
        case OpKind::insertion: return "insertion";
        case OpKind::deletion: return "deletion";
    }
    return "match";
}

std::optional<OpKind> try_parse_op_kind(std::string_view name) {
    if (name == "match") return OpKind::match;
    if (name == "substitution") return OpKind::substitution;
    if (name == "insertion") return OpKind::insertion;
    if (name == "deletion") return OpKind::deletion;
    return std::nullopt;
}

NormalizedText normalize_as(std::string_view raw, Lang lang, Unit unit,
                            const NormalizationPolicy& policy) {
    NormalizedText out;
    out.unit = unit;
    out.lang = lang;
    std::u32string mapped = apply_charmap(raw, policy);
    if (unit == Unit::word) {
        std::string token;
        auto flush = [&] {
            if (!token.empty()) out.tokens.push_back(std::move(token)), token.clear();
        };
        for (char32_t cp : mapped) {
            if (uni::is_space(cp)) {
                flush();
            } else {
                uni::append_utf8(token, cp);
            }
        }
        flush();
    } else {
        std::u32string kept;
        kept.reserve(mapped.size());
        for (char32_t cp : mapped)
            if (!uni::is_space(cp)) kept.push_back(cp);
        out.tokens = uni::graphemes(uni::encode_utf8(kept));
    }
    return out;
}

NormalizedText normalize(std::string_view raw, Lang lang, const NormalizationPolicy& policy) {
    return normalize_as(raw, lang, policy.unit_for(lang), policy);
}

Alignment align_tokens(std::span<const std::string> ref, std::span<const std::string> hyp) {
    const std::size_t n = ref.size();
    const std::size_t m = hyp.size();
    // d is (n+1) x (m+1), row-major.
    std::vector<std::size_t> d((n + 1) * (m + 1));
    auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 1) + j]; };
    for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
    for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            std::size_t diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
            std::size_t del = at(i - 1, j) + 1;
            std::size_t ins = at(i, j - 1) + 1;
            at(i, j) = std::min({diag, del, ins});
        }
    }

    Alignment a;
    a.n_ref = n;
    std::size_t i = n, j = m;
    std::vector<AlignmentOp> rev;
    rev.reserve(n + m);
    while (i > 0 || j > 0) {
        AlignmentOp op;
        if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && at(i, j) == at(i - 1, j - 1)) {
            op.kind = OpKind::match;
        } else if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + 1) {
            op.kind = OpKind::substitution;
        } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
            op.kind = OpKind::deletion;
        } else {
            op.kind = OpKind::insertion;
        }
        switch (op.kind) {
            case OpKind::match:
            case OpKind::substitution:
                op.ref_token = ref[i - 1];
                op.hyp_token = hyp[j - 1];
                op.ref_index = i - 1;
                op.hyp_index = j - 1;
                --i, --j;
                break;
            case OpKind::deletion:
                op.ref_token = ref[i - 1];
                op.ref_index = i - 1;
                --i;
                break;
            case OpKind::insertion:
                op.hyp_token = hyp[j - 1];
                op.hyp_index = j - 1;
                --j;
                break;
        }
        rev.push_back(std::move(op));
    }
    a.ops.assign(rev.rbegin(), rev.rend());
    for (const AlignmentOp& op : a.ops) {
        switch (op.kind) {
            case OpKind::match: ++a.n_match; break;
            case OpKind::substitution: ++a.n_sub; break;
            case OpKind::insertion: ++a.n_ins; break;
            case OpKind::deletion: ++a.n_del; break;
        }
    }
    return a;
}

Alignment align(const NormalizedText& ref, const NormalizedText& hyp) {
    if (ref.unit != hyp.unit)
        throw std::invalid_argument("align: unit mismatch (ref is " +
                                    std::string(unit_name(ref.unit)) + ", hyp is " +
                                    std::string(unit_name(hyp.unit)) + ")");
    return align_tokens(ref.tokens, hyp.tokens);
}

std::size_t edit_distance(std::span<const std::string> a, std::span<const std::string> b) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            std::size_t diag = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({diag, prev[j] + 1, cur[j - 1] + 1});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

double error_rate(const Alignment& a) {
    if (a.n_ref == 0) return a.n_hyp() == 0 ? 0.0 : static_cast<double>(a.n_ins);
    return static_cast<double>(a.distance()) / static_cast<double>(a.n_ref);
}

bool degenerate_reference(const Alignment& a) {
    return a.n_ref == 0 && a.n_hyp() > 0;
}

ErrorDetails error_details(const Alignment& a) {
    ErrorDetails out;
    for (std::size_t i = 0; i < a.ops.size(); ++i) {
        const AlignmentOp& op = a.ops[i];
        if (op.kind == OpKind::match) continue;
        out.items.push_back(ErrorItem{op.kind, op.ref_token, op.hyp_token, i});
    }
    return out;
}

double similarity(const NormalizedText& a, const NormalizedText& b) {
    if (a.unit != b.unit)
        throw std::invalid_argument("similarity: unit mismatch");
    std::size_t longest = std::max(a.size(), b.size());
    if (longest == 0) return 1.0;
    std::size_t dist = edit_distance(a.tokens, b.tokens);
    return 1.0 - static_cast<double>(dist) / static_cast<double>(longest);
}

}  // namespace sltk::text
