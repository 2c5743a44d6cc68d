#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "sltk/grammar.hpp"
#include "sltk/text.hpp"

using namespace sltk;

namespace {

// Independent grammar conformance check for the fuzz test: optional lang
// token, optional balanced think span, required balanced transcribe span,
// nothing else but whitespace, and no tags inside span content.
bool conforms(const std::string& s) {
    std::size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\n')) ++pos;
    };
    auto eat = [&](std::string_view lit) {
        if (s.compare(pos, lit.size(), lit) == 0) {
            pos += lit.size();
            return true;
        }
        return false;
    };
    auto span_content_ok = [&](std::string_view close) -> bool {
        std::size_t end = s.find(close, pos);
        if (end == std::string::npos) return false;
        std::string_view content(s.data() + pos, end - pos);
        for (const std::string& tok : grammar::special_token_surfaces())
            if (content.find(tok) != std::string_view::npos) return false;
        pos = end + close.size();
        return true;
    };
    skip_ws();
    for (text::Lang l : text::kAllLangs)
        if (eat(grammar::lang_token(l))) break;
    skip_ws();
    if (eat(grammar::kThinkOpen)) {
        if (!span_content_ok(grammar::kThinkClose)) return false;
        skip_ws();
    }
    if (!eat(grammar::kTranscribeOpen)) return false;
    if (!span_content_ok(grammar::kTranscribeClose)) return false;
    skip_ws();
    return pos == s.size();
}

}  // namespace

TEST_CASE("special token surfaces") {
    CHECK(grammar::lang_token(text::Lang::en) == "<LANG_EN>");
    CHECK(grammar::lang_token(text::Lang::vi) == "<LANG_VI>");
    CHECK(grammar::lang_from_token("<LANG_KO>") == text::Lang::ko);
    CHECK(!grammar::lang_from_token("<LANG_XX>"));
    auto surfaces = grammar::special_token_surfaces();
    CHECK(surfaces.size() == 17);  // 11 language tokens + 6 tags
    std::set<std::string> unique(surfaces.begin(), surfaces.end());
    CHECK(unique.size() == surfaces.size());
}

TEST_CASE("render_prompt basic template") {
    grammar::PromptSpec spec;
    spec.instruction = "Transcribe the speech above";
    CHECK(grammar::render_prompt(spec) ==
          "USER: <speech>…</speech> Transcribe the speech above ASSISTANT:");
}

TEST_CASE("render_prompt with context") {
    grammar::PromptSpec spec;
    spec.instruction = "Transcribe the speech above";
    spec.context_transcripts = {"first utterance", "second utterance"};
    std::string prompt = grammar::render_prompt(spec);
    std::size_t p1 = prompt.find("first utterance");
    std::size_t p2 = prompt.find("second utterance");
    std::size_t pi = prompt.find("Transcribe the speech above");
    REQUIRE(p1 != std::string::npos);
    REQUIRE(p2 != std::string::npos);
    REQUIRE(pi != std::string::npos);
    CHECK(p1 < p2);   // oldest first
    CHECK(p2 < pi);   // context precedes the instruction
    CHECK(prompt.starts_with("USER: <speech>"));
    CHECK(prompt.ends_with(" ASSISTANT:"));

    spec.context_transcripts = {"a", "b", "c"};
    CHECK_THROWS_AS(grammar::render_prompt(spec), std::invalid_argument);
}

TEST_CASE("render_prompt empty instruction and unwrapped speech") {
    grammar::PromptSpec spec;
    spec.instruction = "";
    CHECK(grammar::render_prompt(spec) == "USER: <speech>…</speech> ASSISTANT:");
    spec.wrap_speech = false;
    CHECK(grammar::render_prompt(spec) == "USER: … ASSISTANT:");
}

TEST_CASE("parse_completion well-formed without think") {
    auto c = grammar::parse_completion("<LANG_EN> <transcribe> hello world </transcribe>");
    CHECK(c.lang == text::Lang::en);
    CHECK(c.transcription == "hello world");
    CHECK(!c.think);
    CHECK(c.diagnostics.empty());
    CHECK(c.well_formed());
}

TEST_CASE("parse_completion unbalanced transcribe") {
    auto c = grammar::parse_completion("<LANG_EN> <transcribe> hello");
    CHECK(!c.transcription);
    REQUIRE(!c.diagnostics.empty());
    CHECK(std::count(c.diagnostics.begin(), c.diagnostics.end(), "unbalanced-transcribe") == 1);
}

TEST_CASE("parse_completion diagnostics") {
    CHECK(!grammar::parse_completion("").well_formed());
    CHECK(!grammar::parse_completion("hello world").well_formed());

    auto stray = grammar::parse_completion("x <transcribe> a </transcribe>");
    CHECK(std::count(stray.diagnostics.begin(), stray.diagnostics.end(), "stray-text") == 1);
    CHECK(stray.transcription == "a");

    auto dup = grammar::parse_completion(
        "<transcribe> a </transcribe> <transcribe> b </transcribe>");
    CHECK(dup.transcription == "a");
    CHECK(std::count(dup.diagnostics.begin(), dup.diagnostics.end(), "duplicate-transcribe") == 1);

    auto misordered = grammar::parse_completion(
        "<transcribe> a </transcribe> <think> b </think>");
    CHECK(std::count(misordered.diagnostics.begin(), misordered.diagnostics.end(),
                     "think-after-transcribe") == 1);

    auto misplaced_lang = grammar::parse_completion(
        "<think> a </think> <LANG_EN> <transcribe> b </transcribe>");
    CHECK(std::count(misplaced_lang.diagnostics.begin(), misplaced_lang.diagnostics.end(),
                     "misplaced-lang-token") == 1);

    auto speech = grammar::parse_completion("<speech> a </speech> <transcribe> b </transcribe>");
    CHECK(std::count(speech.diagnostics.begin(), speech.diagnostics.end(),
                     "speech-tag-in-completion") == 2);

    // An unknown language token is not a special token, so it is stray text.
    auto unknown = grammar::parse_completion("<LANG_XX> <transcribe> a </transcribe>");
    CHECK(!unknown.lang);
    CHECK(!unknown.well_formed());
}

TEST_CASE("parse_completion is total on fuzz and flags shuffled tags") {
    std::mt19937_64 rng(2024);
    const auto& surfaces = grammar::special_token_surfaces();
    for (int trial = 0; trial < 500; ++trial) {
        std::string s;
        std::size_t parts = rng() % 8;
        for (std::size_t i = 0; i < parts; ++i) {
            switch (rng() % 4) {
                case 0: s += surfaces[rng() % surfaces.size()]; break;
                case 1: s += oracle::random_word(rng); break;
                case 2: s += ' '; break;
                case 3: s += "<"; break;
            }
            s += ' ';
        }
        auto c = grammar::parse_completion(s);  // must not throw
        CHECK(c.well_formed() == conforms(s));
    }
}

TEST_CASE("render_cot with error details") {
    auto ref = text::normalize("the cat sat", text::Lang::en);
    auto hyp = text::normalize("the cat", text::Lang::en);
    auto details = text::error_details(text::align(ref, hyp));
    std::string cot = grammar::render_cot("the cat", details, "the cat sat", text::Lang::en);
    CHECK(cot ==
          "<LANG_EN> <think> The speech sounds like: the cat, but it might have some "
          "deletion('sat'→∅), let me correct it. </think> "
          "<transcribe> the cat sat </transcribe>");

    auto parsed = grammar::parse_completion(cot);
    CHECK(parsed.well_formed());
    CHECK(parsed.lang == text::Lang::en);
    CHECK(parsed.transcription == "the cat sat");
    REQUIRE(parsed.think);
    CHECK(parsed.think->hypothesis1 == "the cat");
    REQUIRE(parsed.think->claims.size() == 1);
    CHECK(parsed.think->claims[0].kind == text::OpKind::deletion);
    CHECK(parsed.think->claims[0].ref_token == "sat");
    CHECK(!parsed.think->claims[0].hyp_token);
}

TEST_CASE("render_cot no-error variant") {
    std::string cot =
        grammar::render_cot("the cat", text::ErrorDetails{}, "the cat", text::Lang::en);
    CHECK(cot.find("and it seems correct.") != std::string::npos);
    CHECK(cot.find("but it might have some") == std::string::npos);
    auto parsed = grammar::parse_completion(cot);
    CHECK(parsed.well_formed());
    CHECK(parsed.transcription == "the cat");
    REQUIRE(parsed.think);
    CHECK(parsed.think->hypothesis1 == "the cat");
    CHECK(parsed.think->claims.empty());
}

TEST_CASE("render_cot rejects special tokens in content") {
    CHECK_THROWS_AS(
        grammar::render_cot("bad <think> text", {}, "ref", text::Lang::en),
        std::invalid_argument);
    CHECK_THROWS_AS(
        grammar::render_cot("ok", {}, "bad </transcribe>", text::Lang::en),
        std::invalid_argument);
    text::ErrorDetails details;
    details.items.push_back(
        text::ErrorItem{text::OpKind::deletion, "<speech>", std::nullopt, 0});
    CHECK_THROWS_AS(grammar::render_cot("ok", details, "ref", text::Lang::en),
                    std::invalid_argument);
}

TEST_CASE("extract_error_claims") {
    auto claims = grammar::extract_error_claims("substitution('cat'→'bat')");
    REQUIRE(claims.size() == 1);
    CHECK(claims[0].kind == text::OpKind::substitution);
    CHECK(claims[0].ref_token == "cat");
    CHECK(claims[0].hyp_token == "bat");

    CHECK(grammar::extract_error_claims("no claims here, only prose").empty());

    auto two = grammar::extract_error_claims(
        "first deletion('a'→∅) then insertion(∅→'b') happened");
    REQUIRE(two.size() == 2);
    CHECK(two[0].kind == text::OpKind::deletion);
    CHECK(two[1].kind == text::OpKind::insertion);
    CHECK(two[1].hyp_token == "b");

    // Non-canonical carrier combinations are not claims.
    CHECK(grammar::extract_error_claims("substitution('a'→∅)").empty());
    CHECK(grammar::extract_error_claims("deletion('a'→'b')").empty());
    CHECK(grammar::extract_error_claims("insertion('a'→'b')").empty());
}

TEST_CASE("cot round-trip recovers hypothesis1, claims, reference") {
    std::mt19937_64 rng(777);
    text::NormalizationPolicy policy;
    for (int trial = 0; trial < 300; ++trial) {
        std::string ref_raw = oracle::random_phrase(rng, 1, 6);
        std::string hyp_raw = oracle::random_phrase(rng, 1, 6);
        text::Lang lang = text::kAllLangs[rng() % text::kAllLangs.size()];
        auto ref = text::normalize(ref_raw, lang, policy);
        auto hyp = text::normalize(hyp_raw, lang, policy);
        auto details = text::error_details(text::align(ref, hyp));

        std::string cot = grammar::render_cot(hyp_raw, details, ref_raw, lang);
        auto parsed = grammar::parse_completion(cot);
        CHECK(parsed.well_formed());
        CHECK(parsed.lang == lang);
        CHECK(parsed.transcription == ref_raw);
        REQUIRE(parsed.think);
        CHECK(parsed.think->hypothesis1 == hyp_raw);
        REQUIRE(parsed.think->claims.size() == details.items.size());
        for (std::size_t i = 0; i < details.items.size(); ++i) {
            CHECK(parsed.think->claims[i].kind == details.items[i].kind);
            CHECK(parsed.think->claims[i].ref_token == details.items[i].ref_token);
            CHECK(parsed.think->claims[i].hyp_token == details.items[i].hyp_token);
        }
    }
}

TEST_CASE("round-trip with adversarial hypothesis1") {
    // hypothesis1 containing the separator phrase itself still round-trips.
    std::string hyp = "x, but it might have some y";
    auto ref = text::normalize("x z", text::Lang::en);
    auto h = text::normalize(hyp, text::Lang::en);
    auto details = text::error_details(text::align(ref, h));
    REQUIRE(!details.items.empty());
    auto parsed = grammar::parse_completion(
        grammar::render_cot(hyp, details, "x z", text::Lang::en));
    REQUIRE(parsed.think);
    CHECK(parsed.think->hypothesis1 == hyp);

    std::string hyp2 = "it ends like this, and it seems correct";
    auto parsed2 = grammar::parse_completion(
        grammar::render_cot(hyp2, {}, "whatever", text::Lang::en));
    REQUIRE(parsed2.think);
    CHECK(parsed2.think->hypothesis1 == hyp2);
}

TEST_CASE("instruction table") {
    std::istringstream in("en\tTranscribe the speech above\nfr\tTranscris le discours ci-dessus\n");
    auto table = grammar::load_instruction_table(in);
    CHECK(table.size() == 2);
    CHECK(grammar::instruction_for(text::Lang::fr, table) ==
          "Transcris le discours ci-dessus");
    // English fallback when a translation is absent.
    CHECK(grammar::instruction_for(text::Lang::de, table) == "Transcribe the speech above");
    CHECK(grammar::instruction_for(text::Lang::de, {}) == grammar::kDefaultInstruction);

    std::istringstream bad("en no tab here\n");
    CHECK_THROWS(grammar::load_instruction_table(bad));
    std::istringstream dup("en\ta\nen\tb\n");
    CHECK_THROWS(grammar::load_instruction_table(dup));
    std::istringstream unknown("zz\ta\n");
    CHECK_THROWS(grammar::load_instruction_table(unknown));
}
