#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sltk/text.hpp"

namespace sltk::grammar {

inline constexpr std::string_view kSpeechOpen = "<speech>";
inline constexpr std::string_view kSpeechClose = "</speech>";
inline constexpr std::string_view kThinkOpen = "<think>";
inline constexpr std::string_view kThinkClose = "</think>";
inline constexpr std::string_view kTranscribeOpen = "<transcribe>";
inline constexpr std::string_view kTranscribeClose = "</transcribe>";

inline constexpr std::string_view kDefaultInstruction = "Transcribe the speech above";

std::string lang_token(text::Lang lang);  // "<LANG_EN>" ... "<LANG_VI>"
std::optional<text::Lang> lang_from_token(std::string_view surface);
const std::vector<std::string>& special_token_surfaces();

struct PromptSpec {
    std::string instruction{kDefaultInstruction};
    text::Lang instruction_lang = text::Lang::en;
    std::vector<std::string> context_transcripts;  // at most 2, oldest first
    bool wrap_speech = true;
    std::string speech_placeholder = "…";  // marks where speech embeddings go
};

std::string render_prompt(const PromptSpec& spec);

struct ErrorClaim {
    text::OpKind kind = text::OpKind::substitution;
    std::optional<std::string> ref_token;
    std::optional<std::string> hyp_token;

    bool operator==(const ErrorClaim&) const = default;
};

struct ThinkSection {
    std::string raw_text;
    std::optional<std::string> hypothesis1;
    std::vector<ErrorClaim> claims;
};

struct StructuredCompletion {
    std::optional<text::Lang> lang;
    std::optional<ThinkSection> think;
    std::optional<std::string> transcription;       // hypothesis2
    std::vector<std::string> diagnostics;

    bool well_formed() const { return diagnostics.empty(); }
};

/// Total: never throws; malformed input comes back with empty fields and
/// one diagnostic per violation.
StructuredCompletion parse_completion(std::string_view completion);

/// Canonical claim syntax, e.g. substitution('cat'->'bat') rendered as
/// kind('ref'→'hyp') with ∅ for the absent side.
std::string render_claim(const ErrorClaim& claim);

/// CoT training target. Throws std::invalid_argument when hypothesis1, the
/// reference, or a detail token contains a special-token surface.
std::string render_cot(std::string_view hypothesis1, const text::ErrorDetails& details,
                       std::string_view reference, text::Lang lang);

std::vector<ErrorClaim> extract_error_claims(std::string_view think_text);

/// Per-language instruction strings, one `lang<TAB>instruction` per line.
using InstructionTable = std::map<text::Lang, std::string>;
InstructionTable load_instruction_table(std::istream& in);
InstructionTable load_instruction_table_file(const std::string& path);
std::string instruction_for(text::Lang lang, const InstructionTable& table);

}  // namespace sltk::grammar
