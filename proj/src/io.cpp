#include "sltk/io.hpp"

#include <fstream>
#include <stdexcept>

#include "sltk/config.hpp"

namespace sltk::io {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error(what); }

const json& require(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) fail(std::string("missing field '") + key + "'");
    return *it;
}

std::string require_string(const json& j, const char* key) {
    const json& v = require(j, key);
    if (!v.is_string()) fail(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

double require_number(const json& j, const char* key) {
    const json& v = require(j, key);
    if (!v.is_number()) fail(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

}  // namespace

std::vector<JsonLine> read_jsonl(std::istream& in, std::string_view source) {
    std::vector<JsonLine> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back({line_no, json::parse(line)});
        } catch (const json::parse_error& e) {
            fail(std::string(source) + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<JsonLine> read_jsonl_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open input file: " + path);
    return read_jsonl(in, path);
}

metrics::UtterancePair parse_utterance_pair(const json& j) {
    config::check_keys(j, "record", {"utt_id", "lang", "reference", "hypothesis"});
    metrics::UtterancePair p;
    p.utt_id = require_string(j, "utt_id");
    p.lang = text::parse_lang(require_string(j, "lang"));
    p.reference = require_string(j, "reference");
    p.hypothesis = require_string(j, "hypothesis");
    return p;
}

reward::RolloutGroup parse_rollout_group(const json& j) {
    config::check_keys(j, "record",
                       {"group_id", "lang", "reference", "completions", "temperature"});
    reward::RolloutGroup g;
    g.group_id = require_string(j, "group_id");
    g.lang = text::parse_lang(require_string(j, "lang"));
    g.reference = require_string(j, "reference");
    const json& completions = require(j, "completions");
    if (!completions.is_array() || completions.empty())
        fail("field 'completions' must be a non-empty array");
    for (const json& c : completions) {
        if (!c.is_string()) fail("field 'completions' must contain strings");
        g.completions.push_back(c.get<std::string>());
    }
    if (auto it = j.find("temperature"); it != j.end()) {
        if (!it->is_number()) fail("field 'temperature' must be a number");
        g.sampling_temperature = it->get<double>();
    }
    return g;
}

LogProbRecord parse_logprob_record(const json& j) {
    config::check_keys(j, "record", {"id", "tokens"});
    LogProbRecord rec;
    rec.id = require_string(j, "id");
    const json& tokens = require(j, "tokens");
    if (!tokens.is_array()) fail("field 'tokens' must be an array");
    for (const json& t : tokens) {
        config::check_keys(t, "token", {"lp", "sec"});
        rl::TokenLogProb entry;
        entry.log_prob = require_number(t, "lp");
        if (entry.log_prob > 0.0) fail("token log-prob must be <= 0");
        std::string sec = require_string(t, "sec");
        auto label = rl::try_parse_section(sec);
        if (!label) fail("unknown section label '" + sec + "'");
        entry.label = *label;
        rec.probs.entries.push_back(entry);
    }
    return rec;
}

CotPair parse_cot_pair(const json& j) {
    config::check_keys(j, "record",
                       {"utt_id", "lang", "reference", "hypothesis1", "conversation_id"});
    CotPair p;
    p.utt_id = require_string(j, "utt_id");
    p.lang = text::parse_lang(require_string(j, "lang"));
    p.reference = require_string(j, "reference");
    p.hypothesis1 = require_string(j, "hypothesis1");
    if (auto it = j.find("conversation_id"); it != j.end())
        p.conversation_id = require_string(j, "conversation_id");
    return p;
}

diar::VadSegment parse_vad_segment(const json& j) {
    config::check_keys(j, "record", {"recording_id", "start", "end"});
    diar::VadSegment s;
    s.recording_id = require_string(j, "recording_id");
    s.start = require_number(j, "start");
    s.end = require_number(j, "end");
    return s;
}

diar::EmbeddingRecord parse_embedding_record(const json& j) {
    config::check_keys(j, "record", {"segment_id", "recording_id", "start", "end", "vector"});
    diar::EmbeddingRecord r;
    r.segment_id = require_string(j, "segment_id");
    r.recording_id = require_string(j, "recording_id");
    r.start = require_number(j, "start");
    r.end = require_number(j, "end");
    const json& vec = require(j, "vector");
    if (!vec.is_array() || vec.empty()) fail("field 'vector' must be a non-empty array");
    for (const json& v : vec) {
        if (!v.is_number()) fail("field 'vector' must contain numbers");
        r.vector.push_back(v.get<double>());
    }
    return r;
}

metrics::TimedSegment parse_timed_segment(const json& j) {
    config::check_keys(j, "record", {"recording_id", "speaker", "start", "end", "text"});
    metrics::TimedSegment s;
    s.recording_id = require_string(j, "recording_id");
    s.speaker = require_string(j, "speaker");
    s.start = require_number(j, "start");
    s.end = require_number(j, "end");
    if (auto it = j.find("text"); it != j.end()) {
        if (!it->is_string()) fail("field 'text' must be a string");
        s.text = it->get<std::string>();
    }
    return s;
}

}  // namespace sltk::io
