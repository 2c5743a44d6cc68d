#include "sltk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "sltk/hungarian.hpp"

namespace sltk::metrics {

namespace {

struct Interval {
    double a = 0.0, b = 0.0;
};

using SpeakerTimeline = std::map<std::string, std::vector<Interval>>;

std::vector<Interval> merge_intervals(std::vector<Interval> v) {
    std::sort(v.begin(), v.end(), [](const Interval& x, const Interval& y) {
        return x.a < y.a || (x.a == y.a && x.b < y.b);
    });
    std::vector<Interval> out;
    for (const Interval& iv : v) {
        if (!out.empty() && iv.a <= out.back().b)
            out.back().b = std::max(out.back().b, iv.b);
        else
            out.push_back(iv);
    }
    return out;
}

// recording -> speaker -> merged intervals
std::map<std::string, SpeakerTimeline> build_timelines(std::span<const TimedSegment> segs) {
    std::map<std::string, SpeakerTimeline> out;
    for (const TimedSegment& s : segs) {
        if (!(s.start < s.end))
            throw std::invalid_argument("segment for '" + s.recording_id +
                                        "' has start >= end");
        out[s.recording_id][s.speaker].push_back({s.start, s.end});
    }
    for (auto& [rec, spk_map] : out)
        for (auto& [spk, ivs] : spk_map) ivs = merge_intervals(std::move(ivs));
    return out;
}

bool contains(const std::vector<Interval>& ivs, double t) {
    for (const Interval& iv : ivs)
        if (iv.a < t && t < iv.b) return true;
    return false;
}

struct DerAccum {
    double missed = 0, false_alarm = 0, confusion = 0, total_ref = 0;
};

DerAccum der_one_recording(const SpeakerTimeline& ref, const SpeakerTimeline& hyp,
                           double collar) {
    std::vector<Interval> zones;
    std::vector<double> points;
    for (const auto& [spk, ivs] : ref) {
        for (const Interval& iv : ivs) {
            if (collar > 0.0) {
                zones.push_back({iv.a - collar, iv.a + collar});
                zones.push_back({iv.b - collar, iv.b + collar});
            }
            points.push_back(iv.a);
            points.push_back(iv.b);
        }
    }
    for (const auto& [spk, ivs] : hyp)
        for (const Interval& iv : ivs) {
            points.push_back(iv.a);
            points.push_back(iv.b);
        }
    zones = merge_intervals(std::move(zones));
    for (const Interval& z : zones) {
        points.push_back(z.a);
        points.push_back(z.b);
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());

    std::vector<std::string> ref_speakers, hyp_speakers;
    for (const auto& [spk, ivs] : ref) ref_speakers.push_back(spk);
    for (const auto& [spk, ivs] : hyp) hyp_speakers.push_back(spk);
    const std::size_t nr = ref_speakers.size(), nh = hyp_speakers.size();

    DerAccum acc;
    double min_rh = 0.0;
    std::vector<std::vector<double>> overlap(nr, std::vector<double>(nh, 0.0));
    for (std::size_t p = 0; p + 1 < points.size(); ++p) {
        double t0 = points[p], t1 = points[p + 1];
        if (!(t1 > t0)) continue;
        double mid = 0.5 * (t0 + t1);
        if (contains(zones, mid)) continue;
        double dur = t1 - t0;
        std::vector<std::size_t> active_r, active_h;
        for (std::size_t i = 0; i < nr; ++i)
            if (contains(ref.at(ref_speakers[i]), mid)) active_r.push_back(i);
        for (std::size_t j = 0; j < nh; ++j)
            if (contains(hyp.at(hyp_speakers[j]), mid)) active_h.push_back(j);
        double r = static_cast<double>(active_r.size());
        double h = static_cast<double>(active_h.size());
        acc.total_ref += r * dur;
        acc.missed += std::max(0.0, r - h) * dur;
        acc.false_alarm += std::max(0.0, h - r) * dur;
        min_rh += std::min(r, h) * dur;
        for (std::size_t i : active_r)
            for (std::size_t j : active_h) overlap[i][j] += dur;
    }

    // Optimal speaker mapping: maximize total mapped overlap.
    double mapped = 0.0;
    if (nr > 0 && nh > 0) {
        std::size_t n = std::max(nr, nh);
        std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < nr; ++i)
            for (std::size_t j = 0; j < nh; ++j) cost[i][j] = -overlap[i][j];
        std::vector<int> assign = hungarian_assignment(cost);
        for (std::size_t i = 0; i < nr; ++i) {
            int j = assign[i];
            if (j >= 0 && static_cast<std::size_t>(j) < nh) mapped += overlap[i][j];
        }
    }
    acc.confusion = std::max(0.0, min_rh - mapped);
    return acc;
}

struct TimedWord {
    std::string token;
    double center = 0.0;
};

// Pseudo word timings: a segment's span is divided uniformly across tokens.
std::map<std::string, std::map<std::string, std::vector<TimedWord>>> build_words(
    std::span<const TimedSegment> segs, text::Lang lang,
    const text::NormalizationPolicy& policy, std::string_view side) {
    std::vector<const TimedSegment*> sorted;
    sorted.reserve(segs.size());
    for (const TimedSegment& s : segs) sorted.push_back(&s);
    std::stable_sort(sorted.begin(), sorted.end(), [](const TimedSegment* a, const TimedSegment* b) {
        return a->start < b->start || (a->start == b->start && a->end < b->end);
    });
    std::map<std::string, std::map<std::string, std::vector<TimedWord>>> out;
    for (const TimedSegment* s : sorted) {
        if (!s->text)
            throw std::invalid_argument("tcpwer: " + std::string(side) + " segment for '" +
                                        s->recording_id + "' has no text");
        if (!(s->start < s->end))
            throw std::invalid_argument("tcpwer: segment for '" + s->recording_id +
                                        "' has start >= end");
        auto norm = text::normalize(*s->text, lang, policy);
        const std::size_t k = norm.tokens.size();
        auto& words = out[s->recording_id][s->speaker];
        for (std::size_t i = 0; i < k; ++i) {
            double center = s->start + (static_cast<double>(i) + 0.5) * (s->end - s->start) /
                                           static_cast<double>(k);
            words.push_back({norm.tokens[i], center});
        }
    }
    return out;
}

struct EditCounts {
    std::size_t n_sub = 0, n_ins = 0, n_del = 0;
    std::size_t total() const { return n_sub + n_ins + n_del; }
};

// Time-constrained edit distance: diagonal moves are allowed only when the
// word centers lie within the collar.
EditCounts tc_edit(const std::vector<TimedWord>& ref, const std::vector<TimedWord>& hyp,
                   double collar) {
    const std::size_t n = ref.size(), m = hyp.size();
    const std::size_t big = n + m + 1;
    std::vector<std::size_t> d((n + 1) * (m + 1), 0);
    auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 1) + j]; };
    auto allowed = [&](std::size_t i, std::size_t j) {
        return std::abs(ref[i - 1].center - hyp[j - 1].center) <= collar;
    };
    for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
    for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            std::size_t best = std::min(at(i - 1, j), at(i, j - 1)) + 1;
            if (allowed(i, j)) {
                std::size_t diag = at(i - 1, j - 1) + (ref[i - 1].token == hyp[j - 1].token ? 0 : 1);
                best = std::min(best, diag);
            }
            at(i, j) = std::min(best, big);
        }
    }
    EditCounts counts;
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 && allowed(i, j) && ref[i - 1].token == hyp[j - 1].token &&
            at(i, j) == at(i - 1, j - 1)) {
            --i, --j;
        } else if (i > 0 && j > 0 && allowed(i, j) && at(i, j) == at(i - 1, j - 1) + 1) {
            ++counts.n_sub;
            --i, --j;
        } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
            ++counts.n_del;
            --i;
        } else {
            ++counts.n_ins;
            --j;
        }
    }
    return counts;
}

}  // namespace

CorpusScore corpus_error_rate(std::span<const UtterancePair> pairs,
                              const text::NormalizationPolicy& policy) {
    std::unordered_set<std::string> seen;
    CorpusScore score;
    for (const UtterancePair& pair : pairs) {
        if (!seen.insert(pair.utt_id).second)
            throw std::invalid_argument("duplicate utt_id: '" + pair.utt_id + "'");
        auto ref = text::normalize(pair.reference, pair.lang, policy);
        auto hyp = text::normalize(pair.hypothesis, pair.lang, policy);
        text::Alignment a = text::align(ref, hyp);
        LangStats& st = score.per_lang[pair.lang];
        st.n_utts += 1;
        st.n_ref += a.n_ref;
        st.n_sub += a.n_sub;
        st.n_ins += a.n_ins;
        st.n_del += a.n_del;
        st.n_err += a.distance();
        if (text::degenerate_reference(a)) st.n_degenerate += 1;
    }
    double macro_sum = 0.0;
    for (auto& [lang, st] : score.per_lang) {
        st.rate = static_cast<double>(st.n_err) /
                  static_cast<double>(std::max<std::size_t>(st.n_ref, 1));
        macro_sum += st.rate;
        score.totals.n_utts += st.n_utts;
        score.totals.n_ref += st.n_ref;
        score.totals.n_sub += st.n_sub;
        score.totals.n_ins += st.n_ins;
        score.totals.n_del += st.n_del;
        score.totals.n_err += st.n_err;
        score.totals.n_degenerate += st.n_degenerate;
    }
    score.micro = static_cast<double>(score.totals.n_err) /
                  static_cast<double>(std::max<std::size_t>(score.totals.n_ref, 1));
    score.totals.rate = score.micro;
    score.macro = score.per_lang.empty() ? 0.0
                                         : macro_sum / static_cast<double>(score.per_lang.size());
    return score;
}

DerBreakdown der(std::span<const TimedSegment> ref, std::span<const TimedSegment> hyp,
                 double collar) {
    if (collar < 0.0) throw std::invalid_argument("der: collar must be >= 0");
    auto ref_tl = build_timelines(ref);
    auto hyp_tl = build_timelines(hyp);
    std::set<std::string> recordings;
    for (const auto& [rec, tl] : ref_tl) recordings.insert(rec);
    for (const auto& [rec, tl] : hyp_tl) recordings.insert(rec);

    DerBreakdown out;
    static const SpeakerTimeline kEmptyTimeline;
    for (const std::string& rec : recordings) {
        auto rit = ref_tl.find(rec);
        auto hit = hyp_tl.find(rec);
        DerAccum acc = der_one_recording(rit == ref_tl.end() ? kEmptyTimeline : rit->second,
                                         hit == hyp_tl.end() ? kEmptyTimeline : hit->second,
                                         collar);
        out.missed += acc.missed;
        out.false_alarm += acc.false_alarm;
        out.confusion += acc.confusion;
        out.total_ref += acc.total_ref;
    }
    double errors = out.missed + out.false_alarm + out.confusion;
    if (out.total_ref <= 0.0) {
        if (errors > 0.0)
            throw std::invalid_argument("der: reference contains no scored speech");
        out.der = 0.0;
    } else {
        out.der = errors / out.total_ref;
    }
    return out;
}

TcpResult tcpwer(std::span<const TimedSegment> ref, std::span<const TimedSegment> hyp,
                 double collar, text::Lang lang, const text::NormalizationPolicy& policy) {
    if (!(collar > 0.0)) throw std::invalid_argument("tcpwer: collar must be > 0");
    auto ref_words = build_words(ref, lang, policy, "reference");
    auto hyp_words = build_words(hyp, lang, policy, "hypothesis");
    std::set<std::string> recordings;
    for (const auto& [rec, m] : ref_words) recordings.insert(rec);
    for (const auto& [rec, m] : hyp_words) recordings.insert(rec);

    TcpResult out;
    static const std::map<std::string, std::vector<TimedWord>> kNoWords;
    for (const std::string& rec : recordings) {
        auto rit = ref_words.find(rec);
        auto hit = hyp_words.find(rec);
        const auto& rmap = rit == ref_words.end() ? kNoWords : rit->second;
        const auto& hmap = hit == hyp_words.end() ? kNoWords : hit->second;
        std::vector<std::string> rs, hs;
        for (const auto& [spk, words] : rmap) rs.push_back(spk);
        for (const auto& [spk, words] : hmap) hs.push_back(spk);
        const std::size_t nr = rs.size(), nh = hs.size();
        for (const auto& [spk, words] : rmap) out.ref_tokens += words.size();

        std::vector<std::vector<EditCounts>> pair_counts(nr, std::vector<EditCounts>(nh));
        const std::size_t n = nr + nh;
        if (n == 0) continue;
        std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < nr; ++i) {
            for (std::size_t j = 0; j < nh; ++j) {
                pair_counts[i][j] = tc_edit(rmap.at(rs[i]), hmap.at(hs[j]), collar);
                cost[i][j] = static_cast<double>(pair_counts[i][j].total());
            }
            for (std::size_t j = nh; j < n; ++j)
                cost[i][j] = static_cast<double>(rmap.at(rs[i]).size());
        }
        for (std::size_t i = nr; i < n; ++i)
            for (std::size_t j = 0; j < nh; ++j)
                cost[i][j] = static_cast<double>(hmap.at(hs[j]).size());

        std::vector<int> assign = hungarian_assignment(cost);
        std::vector<char> hyp_used(nh, 0);
        for (std::size_t i = 0; i < nr; ++i) {
            TcpPair row;
            row.recording_id = rec;
            row.ref_speaker = rs[i];
            row.n_ref = rmap.at(rs[i]).size();
            std::size_t j = static_cast<std::size_t>(assign[i]);
            if (j < nh) {
                hyp_used[j] = 1;
                row.hyp_speaker = hs[j];
                row.n_sub = pair_counts[i][j].n_sub;
                row.n_ins = pair_counts[i][j].n_ins;
                row.n_del = pair_counts[i][j].n_del;
            } else {
                row.n_del = row.n_ref;
            }
            out.pairs.push_back(std::move(row));
        }
        for (std::size_t j = 0; j < nh; ++j) {
            if (hyp_used[j]) continue;
            TcpPair row;
            row.recording_id = rec;
            row.hyp_speaker = hs[j];
            row.n_ins = hmap.at(hs[j]).size();
            out.pairs.push_back(std::move(row));
        }
    }
    for (const TcpPair& p : out.pairs) {
        out.n_sub += p.n_sub;
        out.n_ins += p.n_ins;
        out.n_del += p.n_del;
    }
    out.total_errors = out.n_sub + out.n_ins + out.n_del;
    if (out.ref_tokens == 0) {
        if (out.total_errors > 0)
            throw std::invalid_argument("tcpwer: reference contains no tokens");
        out.rate = 0.0;
    } else {
        out.rate = static_cast<double>(out.total_errors) / static_cast<double>(out.ref_tokens);
    }
    return out;
}

std::vector<TimedSegment> parse_rttm(std::istream& in) {
    std::vector<TimedSegment> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::vector<std::string> f;
        std::string tok;
        while (fields >> tok) f.push_back(tok);
        if (f.empty()) continue;
        if (f.size() != 9 || f[0] != "SPEAKER")
            throw std::runtime_error("RTTM line " + std::to_string(line_no) +
                                     ": expected 9 SPEAKER fields");
        TimedSegment seg;
        seg.recording_id = f[1];
        try {
            seg.start = std::stod(f[3]);
            double dur = std::stod(f[4]);
            seg.end = seg.start + dur;
        } catch (const std::exception&) {
            throw std::runtime_error("RTTM line " + std::to_string(line_no) +
                                     ": bad time fields");
        }
        seg.speaker = f[7];
        if (!(seg.start < seg.end))
            throw std::runtime_error("RTTM line " + std::to_string(line_no) +
                                     ": non-positive duration");
        out.push_back(std::move(seg));
    }
    return out;
}

std::vector<TimedSegment> parse_rttm_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open RTTM file: " + path);
    return parse_rttm(in);
}

std::string format_rttm_line(const TimedSegment& seg) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), "SPEAKER %s 1 %.3f %.3f <NA> <NA> %s <NA> <NA>",
                  seg.recording_id.c_str(), seg.start, seg.end - seg.start,
                  seg.speaker.c_str());
    return buf;
}

}  // namespace sltk::metrics
