#include "sltk/grammar.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sltk/unicode.hpp"

namespace sltk::grammar {

namespace {

constexpr std::string_view kFramePrefix = "The speech sounds like: ";
constexpr std::string_view kErrorSep = ", but it might have some ";
constexpr std::string_view kErrorSuffix = ", let me correct it.";
constexpr std::string_view kNoErrorSuffix = ", and it seems correct.";

constexpr std::string_view kArrow = "→";  // →
constexpr std::string_view kEmpty = "∅";  // ∅

bool all_space(std::string_view sv) {
    for (char32_t cp : uni::decode_utf8(sv))
        if (!uni::is_space(cp)) return false;
    return true;
}

std::string trim(std::string_view sv) {
    std::u32string cps = uni::decode_utf8(sv);
    std::size_t b = 0, e = cps.size();
    while (b < e && uni::is_space(cps[b])) ++b;
    while (e > b && uni::is_space(cps[e - 1])) --e;
    return uni::encode_utf8(std::u32string_view(cps).substr(b, e - b));
}

std::optional<std::string> extract_hypothesis1(std::string_view raw) {
    if (!raw.starts_with(kFramePrefix)) return std::nullopt;
    std::string_view rest = raw.substr(kFramePrefix.size());
    if (rest.ends_with(kErrorSuffix)) {
        std::string_view body = rest.substr(0, rest.size() - kErrorSuffix.size());
        // Take the last separator: detail tokens carry no whitespace, so the
        // separator can only recur inside hypothesis1 itself.
        std::size_t pos = body.rfind(kErrorSep);
        if (pos != std::string_view::npos) return std::string(body.substr(0, pos));
    }
    if (rest.ends_with(kNoErrorSuffix))
        return std::string(rest.substr(0, rest.size() - kNoErrorSuffix.size()));
    return std::nullopt;
}

enum class PieceKind {
    text, lang, speech_open, speech_close,
    think_open, think_close, trans_open, trans_close,
};

struct Piece {
    PieceKind kind = PieceKind::text;
    std::string_view sv;
    std::optional<text::Lang> lang;
};

std::vector<Piece> scan_pieces(std::string_view s) {
    std::vector<Piece> out;
    std::size_t i = 0, text_start = 0;
    auto flush_text = [&](std::size_t end) {
        if (end > text_start)
            out.push_back({PieceKind::text, s.substr(text_start, end - text_start), {}});
    };
    while (i < s.size()) {
        if (s[i] != '<') {
            ++i;
            continue;
        }
        std::string_view rest = s.substr(i);
        PieceKind kind = PieceKind::text;
        std::size_t len = 0;
        std::optional<text::Lang> lang;
        if (rest.starts_with(kThinkOpen)) kind = PieceKind::think_open, len = kThinkOpen.size();
        else if (rest.starts_with(kThinkClose)) kind = PieceKind::think_close, len = kThinkClose.size();
        else if (rest.starts_with(kTranscribeOpen)) kind = PieceKind::trans_open, len = kTranscribeOpen.size();
        else if (rest.starts_with(kTranscribeClose)) kind = PieceKind::trans_close, len = kTranscribeClose.size();
        else if (rest.starts_with(kSpeechOpen)) kind = PieceKind::speech_open, len = kSpeechOpen.size();
        else if (rest.starts_with(kSpeechClose)) kind = PieceKind::speech_close, len = kSpeechClose.size();
        else {
            for (text::Lang l : text::kAllLangs) {
                std::string tok = lang_token(l);
                if (rest.starts_with(tok)) {
                    kind = PieceKind::lang;
                    len = tok.size();
                    lang = l;
                    break;
                }
            }
        }
        if (len > 0) {
            flush_text(i);
            out.push_back({kind, s.substr(i, len), lang});
            i += len;
            text_start = i;
        } else {
            ++i;
        }
    }
    flush_text(s.size());
    return out;
}

ThinkSection make_think(std::string_view raw) {
    ThinkSection t;
    t.raw_text = trim(raw);
    t.hypothesis1 = extract_hypothesis1(t.raw_text);
    t.claims = extract_error_claims(t.raw_text);
    return t;
}

void reject_tag_collision(std::string_view content, std::string_view what) {
    for (const std::string& surface : special_token_surfaces()) {
        if (content.find(surface) != std::string_view::npos)
            throw std::invalid_argument("render_cot: " + std::string(what) +
                                        " contains special token '" + surface + "'");
    }
}

}  // namespace

std::string lang_token(text::Lang lang) {
    std::string token = "<LANG_";
    for (char c : text::lang_code(lang)) token += static_cast<char>(c - 'a' + 'A');
    token += '>';
    return token;
}

std::optional<text::Lang> lang_from_token(std::string_view surface) {
    for (text::Lang l : text::kAllLangs)
        if (surface == lang_token(l)) return l;
    return std::nullopt;
}

const std::vector<std::string>& special_token_surfaces() {
    static const std::vector<std::string> surfaces = [] {
        std::vector<std::string> v;
        for (text::Lang l : text::kAllLangs) v.push_back(lang_token(l));
        for (std::string_view sv : {kSpeechOpen, kSpeechClose, kTranscribeOpen,
                                    kTranscribeClose, kThinkOpen, kThinkClose})
            v.emplace_back(sv);
        return v;
    }();
    return surfaces;
}

std::string render_prompt(const PromptSpec& spec) {
    if (spec.context_transcripts.size() > 2)
        throw std::invalid_argument("render_prompt: at most 2 context transcripts");
    std::string speech = spec.wrap_speech
        ? std::string(kSpeechOpen) + spec.speech_placeholder + std::string(kSpeechClose)
        : spec.speech_placeholder;
    std::string out = "USER: " + speech;
    for (const std::string& ctx : spec.context_transcripts) out += " " + ctx;
    if (!spec.instruction.empty()) out += " " + spec.instruction;
    out += " ASSISTANT:";
    return out;
}

StructuredCompletion parse_completion(std::string_view completion) {
    StructuredCompletion out;
    auto& diags = out.diagnostics;
    enum class Where { outside, in_think, in_trans };
    Where where = Where::outside;
    bool seen_think = false, seen_trans = false;
    bool think_capture = false, trans_capture = false;
    bool at_start = true;
    std::string think_raw, trans_raw;

    auto in_span_content = [&](const Piece& p, std::string_view diag) {
        if (where == Where::in_think) {
            if (think_capture) think_raw += p.sv;
            if (!diag.empty()) diags.emplace_back("tag-inside-think");
        } else {
            if (trans_capture) trans_raw += p.sv;
            if (!diag.empty()) diags.emplace_back("tag-inside-transcribe");
        }
    };

    for (const Piece& p : scan_pieces(completion)) {
        switch (p.kind) {
            case PieceKind::text:
                if (where != Where::outside) {
                    in_span_content(p, "");
                } else if (!all_space(p.sv)) {
                    diags.emplace_back("stray-text");
                    at_start = false;
                }
                break;
            case PieceKind::lang:
                if (where != Where::outside) {
                    in_span_content(p, "tag");
                } else {
                    if (out.lang) {
                        diags.emplace_back("duplicate-lang-token");
                    } else {
                        out.lang = p.lang;
                        if (!at_start) diags.emplace_back("misplaced-lang-token");
                    }
                    at_start = false;
                }
                break;
            case PieceKind::speech_open:
            case PieceKind::speech_close:
                if (where != Where::outside) {
                    in_span_content(p, "tag");
                } else {
                    diags.emplace_back("speech-tag-in-completion");
                    at_start = false;
                }
                break;
            case PieceKind::think_open:
                if (where == Where::in_think) {
                    if (think_capture) think_raw += p.sv;
                    diags.emplace_back("nested-think");
                } else if (where == Where::in_trans) {
                    in_span_content(p, "tag");
                } else {
                    if (seen_think) diags.emplace_back("duplicate-think");
                    if (seen_trans) diags.emplace_back("think-after-transcribe");
                    think_capture = !seen_think;
                    think_raw.clear();
                    where = Where::in_think;
                    at_start = false;
                }
                break;
            case PieceKind::think_close:
                if (where == Where::in_think) {
                    if (think_capture) {
                        out.think = make_think(think_raw);
                        seen_think = true;
                        think_capture = false;
                    }
                    where = Where::outside;
                } else if (where == Where::in_trans) {
                    in_span_content(p, "tag");
                } else {
                    diags.emplace_back("unbalanced-think");
                    at_start = false;
                }
                break;
            case PieceKind::trans_open:
                if (where == Where::in_trans) {
                    if (trans_capture) trans_raw += p.sv;
                    diags.emplace_back("nested-transcribe");
                } else if (where == Where::in_think) {
                    in_span_content(p, "tag");
                } else {
                    if (seen_trans) diags.emplace_back("duplicate-transcribe");
                    trans_capture = !seen_trans;
                    trans_raw.clear();
                    where = Where::in_trans;
                    at_start = false;
                }
                break;
            case PieceKind::trans_close:
                if (where == Where::in_trans) {
                    if (trans_capture) {
                        out.transcription = trim(trans_raw);
                        seen_trans = true;
                        trans_capture = false;
                    }
                    where = Where::outside;
                } else if (where == Where::in_think) {
                    in_span_content(p, "tag");
                } else {
                    diags.emplace_back("unbalanced-transcribe");
                    at_start = false;
                }
                break;
        }
    }
    if (where == Where::in_think) diags.emplace_back("unbalanced-think");
    if (where == Where::in_trans) diags.emplace_back("unbalanced-transcribe");
    if (!seen_trans && where != Where::in_trans) diags.emplace_back("missing-transcribe");
    return out;
}

std::string render_claim(const ErrorClaim& claim) {
    auto side = [](const std::optional<std::string>& tok) {
        return tok ? "'" + *tok + "'" : std::string(kEmpty);
    };
    std::string out(text::op_kind_name(claim.kind));
    out += "(";
    out += side(claim.ref_token);
    out += kArrow;
    out += side(claim.hyp_token);
    out += ")";
    return out;
}

std::string render_cot(std::string_view hypothesis1, const text::ErrorDetails& details,
                       std::string_view reference, text::Lang lang) {
    reject_tag_collision(hypothesis1, "hypothesis1");
    reject_tag_collision(reference, "reference");
    std::string think;
    think += kFramePrefix;
    think += hypothesis1;
    if (details.empty()) {
        think += kNoErrorSuffix;
    } else {
        think += kErrorSep;
        for (std::size_t i = 0; i < details.items.size(); ++i) {
            const text::ErrorItem& item = details.items[i];
            if (item.ref_token) reject_tag_collision(*item.ref_token, "detail token");
            if (item.hyp_token) reject_tag_collision(*item.hyp_token, "detail token");
            if (i > 0) think += ", ";
            think += render_claim(ErrorClaim{item.kind, item.ref_token, item.hyp_token});
        }
        think += kErrorSuffix;
    }
    std::string out = lang_token(lang);
    out += " ";
    out += kThinkOpen;
    out += " ";
    out += think;
    out += " ";
    out += kThinkClose;
    out += " ";
    out += kTranscribeOpen;
    out += " ";
    out += reference;
    out += " ";
    out += kTranscribeClose;
    return out;
}

std::vector<ErrorClaim> extract_error_claims(std::string_view think_text) {
    std::vector<ErrorClaim> claims;
    struct KindName { std::string_view name; text::OpKind kind; };
    static constexpr KindName kKinds[] = {
        {"substitution", text::OpKind::substitution},
        {"deletion", text::OpKind::deletion},
        {"insertion", text::OpKind::insertion},
    };
    std::size_t i = 0;
    while (i < think_text.size()) {
        bool advanced = false;
        for (const KindName& k : kKinds) {
            if (think_text.compare(i, k.name.size(), k.name) != 0) continue;
            std::size_t p = i + k.name.size();
            auto parse_side = [&](std::optional<std::string>& tok) -> bool {
                if (think_text.compare(p, kEmpty.size(), kEmpty) == 0) {
                    p += kEmpty.size();
                    tok = std::nullopt;
                    return true;
                }
                if (p < think_text.size() && think_text[p] == '\'') {
                    std::size_t close = think_text.find('\'', p + 1);
                    if (close == std::string_view::npos) return false;
                    tok = std::string(think_text.substr(p + 1, close - p - 1));
                    p = close + 1;
                    return true;
                }
                return false;
            };
            ErrorClaim claim;
            claim.kind = k.kind;
            if (p >= think_text.size() || think_text[p] != '(') continue;
            ++p;
            if (!parse_side(claim.ref_token)) continue;
            if (think_text.compare(p, kArrow.size(), kArrow) != 0) continue;
            p += kArrow.size();
            if (!parse_side(claim.hyp_token)) continue;
            if (p >= think_text.size() || think_text[p] != ')') continue;
            ++p;
            bool canonical =
                (k.kind == text::OpKind::substitution && claim.ref_token && claim.hyp_token) ||
                (k.kind == text::OpKind::deletion && claim.ref_token && !claim.hyp_token) ||
                (k.kind == text::OpKind::insertion && !claim.ref_token && claim.hyp_token);
            if (!canonical) continue;
            claims.push_back(std::move(claim));
            i = p;
            advanced = true;
            break;
        }
        if (!advanced) ++i;
    }
    return claims;
}

InstructionTable load_instruction_table(std::istream& in) {
    InstructionTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error("instruction table line " + std::to_string(line_no) +
                                     ": missing tab separator");
        text::Lang lang = text::parse_lang(line.substr(0, tab));
        if (!table.emplace(lang, line.substr(tab + 1)).second)
            throw std::runtime_error("instruction table line " + std::to_string(line_no) +
                                     ": duplicate language");
    }
    return table;
}

InstructionTable load_instruction_table_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open instruction table: " + path);
    return load_instruction_table(in);
}

std::string instruction_for(text::Lang lang, const InstructionTable& table) {
    auto it = table.find(lang);
    if (it != table.end()) return it->second;
    it = table.find(text::Lang::en);
    if (it != table.end()) return it->second;
    return std::string(kDefaultInstruction);
}

}  // namespace sltk::grammar
