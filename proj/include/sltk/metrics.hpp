#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sltk/text.hpp"

namespace sltk::metrics {

struct UtterancePair {
    std::string utt_id;
    text::Lang lang = text::Lang::en;
    std::string reference;
    std::string hypothesis;
};

struct LangStats {
    double rate = 0.0;
    std::size_t n_ref = 0;
    std::size_t n_err = 0;
    std::size_t n_sub = 0;
    std::size_t n_ins = 0;
    std::size_t n_del = 0;
    std::size_t n_utts = 0;
    std::size_t n_degenerate = 0;  // empty reference with non-empty hypothesis
};

struct CorpusScore {
    std::map<text::Lang, LangStats> per_lang;
    double micro = 0.0;  // sum(err) / sum(ref) over all languages
    double macro = 0.0;  // unweighted mean of per-language rates
    LangStats totals;
};

/// Normalizes each pair per its language's unit, aligns, and accumulates.
/// Throws on duplicate utt_id.
CorpusScore corpus_error_rate(std::span<const UtterancePair> pairs,
                              const text::NormalizationPolicy& policy);

struct TimedSegment {
    std::string recording_id;
    std::string speaker;
    double start = 0.0;
    double end = 0.0;
    std::optional<std::string> text;
};

struct DerBreakdown {
    double missed = 0.0;
    double false_alarm = 0.0;
    double confusion = 0.0;
    double total_ref = 0.0;
    double der = 0.0;
};

/// Diarization error rate with an optimal speaker mapping per recording and
/// a no-score collar around every reference segment boundary.
DerBreakdown der(std::span<const TimedSegment> ref, std::span<const TimedSegment> hyp,
                 double collar);

struct TcpPair {
    std::string recording_id;
    std::optional<std::string> ref_speaker;  // absent for unassigned hyp speakers
    std::optional<std::string> hyp_speaker;  // absent for unassigned ref speakers
    std::size_t n_sub = 0;
    std::size_t n_ins = 0;
    std::size_t n_del = 0;
    std::size_t n_ref = 0;
};

struct TcpResult {
    double rate = 0.0;
    std::size_t total_errors = 0;
    std::size_t n_sub = 0;
    std::size_t n_ins = 0;
    std::size_t n_del = 0;
    std::size_t ref_tokens = 0;
    std::vector<TcpPair> pairs;  // one row per (ref, hyp) pairing or unassigned side
};

/// Time-constrained minimum-permutation WER/CER. Pseudo word timings divide
/// each segment uniformly across its tokens; a ref/hyp word pair may match
/// or substitute only when their centers are within the collar. Speaker
/// assignment minimizes total errors per recording.
TcpResult tcpwer(std::span<const TimedSegment> ref, std::span<const TimedSegment> hyp,
                 double collar, text::Lang lang, const text::NormalizationPolicy& policy);

// RTTM interchange: SPEAKER <rec> 1 <tbeg> <tdur> <NA> <NA> <spk> <NA> <NA>
std::vector<TimedSegment> parse_rttm(std::istream& in);
std::vector<TimedSegment> parse_rttm_file(const std::string& path);
std::string format_rttm_line(const TimedSegment& seg);

}  // namespace sltk::metrics
