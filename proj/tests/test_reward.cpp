#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "sltk/reward.hpp"

using namespace sltk;
using reward::RF;

namespace {

std::string cot_for(const std::string& hyp1, const std::string& ref,
                    text::Lang lang = text::Lang::en) {
    auto r = text::normalize(ref, lang);
    auto h = text::normalize(hyp1, lang);
    auto details = text::error_details(text::align(r, h));
    return grammar::render_cot(hyp1, details, ref, lang);
}

reward::RewardConfig cfg_with(std::initializer_list<RF> enabled) {
    reward::RewardConfig cfg;
    cfg.enabled = {enabled.begin(), enabled.end()};
    return cfg;
}

}  // namespace

TEST_CASE("default configuration matches the training recipe") {
    reward::RewardConfig cfg;
    CHECK(cfg.weights.at(RF::rf2) == 0.8);
    CHECK(cfg.weights.at(RF::rf1) == 0.5);
    CHECK(cfg.weights.at(RF::rf3) == 0.5);
    CHECK(cfg.weights.at(RF::rf4) == 0.5);
    CHECK(cfg.weights.at(RF::rf5) == 0.5);
    CHECK(cfg.group_size == 4);
    CHECK(cfg.similarity_threshold == 0.5);
    CHECK(cfg.strict_improvement);
    CHECK(!cfg.reward_zero_tie);
    CHECK(reward::RolloutGroup{}.sampling_temperature == 0.5);
    CHECK(cfg.enabled.size() == 5);
}

TEST_CASE("rf1 format") {
    auto good = grammar::parse_completion(cot_for("the cat", "the cat sat"));
    CHECK(reward::rf1_format(good) == 1.0);

    auto missing_close = grammar::parse_completion("<LANG_EN> <think> x </think> <transcribe> y");
    CHECK(reward::rf1_format(missing_close) == 0.0);

    // Well-formed but no think span: both spans are required.
    auto no_think = grammar::parse_completion("<LANG_EN> <transcribe> y </transcribe>");
    CHECK(no_think.well_formed());
    CHECK(reward::rf1_format(no_think) == 0.0);
}

TEST_CASE("rf2 accuracy") {
    text::NormalizationPolicy policy;
    auto exact = grammar::parse_completion("<LANG_EN> <transcribe> a b c d </transcribe>");
    CHECK(reward::rf2_accuracy(exact, "a b c d", text::Lang::en, policy) == 1.0);

    auto one_sub = grammar::parse_completion("<LANG_EN> <transcribe> a b c x </transcribe>");
    CHECK(reward::rf2_accuracy(one_sub, "a b c d", text::Lang::en, policy) ==
          doctest::Approx(0.75).epsilon(1e-12));

    auto absent = grammar::parse_completion("<LANG_EN> <transcribe> a b");
    CHECK(reward::rf2_accuracy(absent, "a b", text::Lang::en, policy) == 0.0);

    // Clamped at zero when the hypothesis is much longer than the reference.
    auto noisy = grammar::parse_completion("<transcribe> x x x x x </transcribe>");
    CHECK(reward::rf2_accuracy(noisy, "a", text::Lang::en, policy) == 0.0);
}

TEST_CASE("rf3 error types") {
    text::NormalizationPolicy policy;
    auto sub_claim = grammar::parse_completion(cot_for("the bat", "the cat"));
    CHECK(reward::rf3_error_types(sub_claim, "the cat", text::Lang::en, policy) == 1.0);

    auto perfect = grammar::parse_completion(cot_for("the cat", "the cat"));
    CHECK(reward::rf3_error_types(perfect, "the cat", text::Lang::en, policy) == 1.0);

    // Claimed {insertion}, actual {substitution, deletion}: Jaccard 0/3.
    std::string cot =
        "<LANG_EN> <think> The speech sounds like: the bat, but it might have some "
        "insertion(∅→'x'), let me correct it. </think> "
        "<transcribe> the cat sat </transcribe>";
    auto wrong = grammar::parse_completion(cot);
    REQUIRE(wrong.think);
    REQUIRE(wrong.think->hypothesis1 == "the bat");
    CHECK(reward::rf3_error_types(wrong, "the cat sat", text::Lang::en, policy) == 0.0);

    auto no_think = grammar::parse_completion("<transcribe> x </transcribe>");
    CHECK(reward::rf3_error_types(no_think, "x", text::Lang::en, policy) == 0.0);
}

TEST_CASE("rf4 error details") {
    text::NormalizationPolicy policy;
    auto exact_claim = grammar::parse_completion(cot_for("the bat", "the cat"));
    CHECK(reward::rf4_error_details(exact_claim, "the cat", text::Lang::en, policy) == 1.0);

    // No claims against two actual errors.
    std::string no_claims =
        "<LANG_EN> <think> The speech sounds like: a b, and it seems correct. </think> "
        "<transcribe> x y </transcribe>";
    auto parsed = grammar::parse_completion(no_claims);
    CHECK(reward::rf4_error_details(parsed, "x y", text::Lang::en, policy) == 0.0);

    // 1 of 2 claims correct with 2 actual errors: precision 0.5, recall 0.5.
    std::string half =
        "<LANG_EN> <think> The speech sounds like: a b, but it might have some "
        "substitution('x'→'a'), substitution('zz'→'qq'), let me correct it. "
        "</think> <transcribe> x y </transcribe>";
    auto h = grammar::parse_completion(half);
    REQUIRE(h.think);
    REQUIRE(h.think->claims.size() == 2);
    CHECK(reward::rf4_error_details(h, "x y", text::Lang::en, policy) ==
          doctest::Approx(0.5).epsilon(1e-12));

    auto vacuous = grammar::parse_completion(cot_for("same", "same"));
    CHECK(reward::rf4_error_details(vacuous, "same", text::Lang::en, policy) == 1.0);
}

TEST_CASE("rf5 improvement") {
    reward::RewardConfig cfg;

    // hyp1 has rate 0.5 on a 2-token ref, hyp2 is exact; similar hypotheses.
    auto improved = grammar::parse_completion(cot_for("the bat", "the cat"));
    auto r = reward::rf5_improvement(improved, "the cat", text::Lang::en, cfg);
    CHECK(r.score == 1.0);
    CHECK(!r.guard_tripped);

    // Tie is not an improvement under the strict default.
    auto tie = grammar::parse_completion(cot_for("the cat", "the cat"));
    CHECK(reward::rf5_improvement(tie, "the cat", text::Lang::en, cfg).score == 0.0);

    // The zero-tie flag rewards an already perfect first pass.
    reward::RewardConfig zero_tie = cfg;
    zero_tie.reward_zero_tie = true;
    CHECK(reward::rf5_improvement(tie, "the cat", text::Lang::en, zero_tie).score == 1.0);

    // Collapsed hypothesis1: rate improves but similarity is below threshold.
    std::string collapsed =
        "<LANG_EN> <think> The speech sounds like: z, and it seems correct. </think> "
        "<transcribe> the quick brown fox jumps </transcribe>";
    auto g = grammar::parse_completion(collapsed);
    auto guard = reward::rf5_improvement(g, "the quick brown fox jumps", text::Lang::en, cfg);
    CHECK(guard.score == 0.0);
    CHECK(guard.guard_tripped);

    auto no_think = grammar::parse_completion("<transcribe> the cat </transcribe>");
    auto missing = reward::rf5_improvement(no_think, "the cat", text::Lang::en, cfg);
    CHECK(missing.score == 0.0);
    CHECK(!missing.guard_tripped);
}

TEST_CASE("rf5 guard holds for any dissimilar pair") {
    std::mt19937_64 rng(31337);
    reward::RewardConfig cfg;
    for (int trial = 0; trial < 200; ++trial) {
        // hyp2 == ref (rate 0), hyp1 garbled so rates always improve.
        std::string ref = oracle::random_phrase(rng, 3, 8);
        std::string hyp1(1, static_cast<char>('0' + rng() % 10));
        std::string cot = cot_for(hyp1, ref);
        auto c = grammar::parse_completion(cot);
        auto h1c = text::normalize_as(hyp1, text::Lang::en, text::Unit::character);
        auto h2c = text::normalize_as(ref, text::Lang::en, text::Unit::character);
        if (text::similarity(h1c, h2c) >= cfg.similarity_threshold) continue;
        auto r = reward::rf5_improvement(c, ref, text::Lang::en, cfg);
        CHECK(r.score == 0.0);
    }
}

TEST_CASE("score_completion weighted totals") {
    // RF1 + RF2 + RF5 on a perfect CoT completion with strict improvement:
    // total = 0.5 + 0.8 + 0.5.
    auto cfg = cfg_with({RF::rf1, RF::rf2, RF::rf5});
    std::string completion = cot_for("the bat", "the cat");
    auto b = reward::score_completion(completion, "the cat", text::Lang::en, cfg);
    CHECK(b.per_rf.at(RF::rf1) == 1.0);
    CHECK(b.per_rf.at(RF::rf2) == 1.0);
    CHECK(b.per_rf.at(RF::rf5) == 1.0);
    CHECK(b.total == doctest::Approx(1.8).epsilon(1e-12));

    auto empty = reward::score_completion("", "the cat", text::Lang::en, cfg);
    for (const auto& [rf, score] : empty.per_rf) CHECK(score == 0.0);
    CHECK(empty.total == 0.0);
}

TEST_CASE("score_completion bare transcription keeps accuracy signal") {
    auto cfg = cfg_with({RF::rf1, RF::rf2});
    auto b = reward::score_completion("the cat", "the cat", text::Lang::en, cfg);
    CHECK(b.per_rf.at(RF::rf1) == 0.0);
    CHECK(b.per_rf.at(RF::rf2) == 1.0);
    CHECK(b.total == doctest::Approx(0.8).epsilon(1e-12));

    // Garbled tags do not get the bare-text fallback.
    auto garbled = reward::score_completion("<transcribe> the cat", "the cat",
                                            text::Lang::en, cfg);
    CHECK(garbled.per_rf.at(RF::rf2) == 0.0);
}

TEST_CASE("score bounds on fuzzed completions") {
    std::mt19937_64 rng(4242);
    reward::RewardConfig cfg;
    const auto& surfaces = grammar::special_token_surfaces();
    for (int trial = 0; trial < 300; ++trial) {
        std::string s;
        std::size_t parts = rng() % 10;
        for (std::size_t i = 0; i < parts; ++i) {
            if (rng() % 3 == 0) s += surfaces[rng() % surfaces.size()];
            else s += oracle::random_word(rng);
            s += ' ';
        }
        auto b = reward::score_completion(s, "the cat sat", text::Lang::en, cfg);
        for (const auto& [rf, score] : b.per_rf) {
            CHECK(score >= 0.0);
            CHECK(score <= 1.0);
        }
        double total = 0.0;
        for (const auto& [rf, score] : b.per_rf) total += cfg.weight(rf) * score;
        CHECK(b.total == doctest::Approx(total).epsilon(1e-12));
    }
}

TEST_CASE("rf2 is monotone in edit distance") {
    text::NormalizationPolicy policy;
    std::string ref = "a b c d e f g h";
    std::vector<std::string> hyps = {
        "a b c d e f g h", "a b c d e f g x", "a b c d e f x y",
        "a b c d x x x x", "x x x x x x x x",
    };
    double prev = 1.1;
    for (const auto& hyp : hyps) {
        auto c = grammar::parse_completion("<transcribe> " + hyp + " </transcribe>");
        double score = reward::rf2_accuracy(c, ref, text::Lang::en, policy);
        CHECK(score <= prev);
        prev = score;
    }
}

TEST_CASE("score_group composes element-wise") {
    reward::RolloutGroup group;
    group.group_id = "g1";
    group.reference = "the cat sat";
    group.lang = text::Lang::en;
    group.completions = {
        cot_for("the cat", "the cat sat"),
        cot_for("the cat sat", "the cat sat"),
        "",
        cot_for("the cat", "the cat sat"),
    };
    reward::RewardConfig cfg;
    auto breakdowns = reward::score_group(group, cfg);
    REQUIRE(breakdowns.size() == 4);
    for (std::size_t i = 0; i < group.completions.size(); ++i) {
        auto individual = reward::score_completion(group.completions[i], group.reference,
                                                   group.lang, cfg);
        CHECK(breakdowns[i].total == individual.total);
        CHECK(breakdowns[i].per_rf == individual.per_rf);
    }
    CHECK(breakdowns[0].total == breakdowns[3].total);
    CHECK(breakdowns[2].total == 0.0);

    reward::RolloutGroup empty;
    empty.completions = {};
    CHECK_THROWS_AS(reward::score_group(empty, cfg), std::invalid_argument);
}

TEST_CASE("determinism of breakdowns") {
    reward::RewardConfig cfg;
    std::string completion = cot_for("the bat", "the cat sat");
    auto a = reward::score_completion(completion, "the cat sat", text::Lang::en, cfg);
    auto b = reward::score_completion(completion, "the cat sat", text::Lang::en, cfg);
    CHECK(a.per_rf == b.per_rf);
    CHECK(a.total == b.total);
    CHECK(a.guard_tripped == b.guard_tripped);
}

TEST_CASE("config validation") {
    reward::RewardConfig cfg;
    cfg.weights[RF::rf1] = -0.1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.similarity_threshold = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.group_size = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
