#include "sltk/config.hpp"

#include <fstream>
#include <stdexcept>

namespace sltk::config {

using nlohmann::json;

namespace {

[[noreturn]] void fail(std::string_view path, const std::string& what) {
    throw std::runtime_error("config: " + std::string(path) + ": " + what);
}

std::string join(std::string_view path, std::string_view key) {
    return path.empty() ? std::string(key) : std::string(path) + "." + std::string(key);
}

void expect_object(const json& j, std::string_view path) {
    if (!j.is_object()) fail(path, "expected an object");
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

long as_integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<long>();
}

bool as_boolean(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected a boolean");
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

}  // namespace

void check_keys(const json& obj, std::string_view path,
                std::initializer_list<std::string_view> allowed) {
    expect_object(obj, path);
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (std::string_view a : allowed)
            if (key == a) {
                known = true;
                break;
            }
        if (!known) fail(join(path, key), "unknown key");
    }
}

text::NormalizationPolicy normalization_from_json(const json& j, std::string_view path) {
    check_keys(j, path, {"char_unit_langs", "strip_punct", "lowercase"});
    text::NormalizationPolicy p;
    if (auto it = j.find("char_unit_langs"); it != j.end()) {
        const std::string key = join(path, "char_unit_langs");
        if (!it->is_array()) fail(key, "expected an array of language codes");
        p.char_unit_langs.clear();
        for (const auto& code : *it) p.char_unit_langs.insert(text::parse_lang(as_string(code, key)));
    }
    if (auto it = j.find("strip_punct"); it != j.end())
        p.strip_punct = as_boolean(*it, join(path, "strip_punct"));
    if (auto it = j.find("lowercase"); it != j.end())
        p.lowercase = as_boolean(*it, join(path, "lowercase"));
    return p;
}

reward::RewardConfig reward_from_json(const json& j, std::string_view path) {
    check_keys(j, path,
               {"enabled", "weights", "similarity_threshold", "strict_improvement",
                "reward_zero_tie", "group_size"});
    reward::RewardConfig c;
    if (auto it = j.find("enabled"); it != j.end()) {
        const std::string key = join(path, "enabled");
        if (!it->is_array()) fail(key, "expected an array of reward names");
        c.enabled.clear();
        for (const auto& name : *it) {
            auto rf = reward::try_parse_rf(as_string(name, key));
            if (!rf) fail(key, "unknown reward function '" + name.get<std::string>() + "'");
            c.enabled.insert(*rf);
        }
    }
    if (auto it = j.find("weights"); it != j.end()) {
        const std::string key = join(path, "weights");
        expect_object(*it, key);
        for (const auto& [name, value] : it->items()) {
            auto rf = reward::try_parse_rf(name);
            if (!rf) fail(join(key, name), "unknown key");
            c.weights[*rf] = as_number(value, join(key, name));
        }
    }
    if (auto it = j.find("similarity_threshold"); it != j.end())
        c.similarity_threshold = as_number(*it, join(path, "similarity_threshold"));
    if (auto it = j.find("strict_improvement"); it != j.end())
        c.strict_improvement = as_boolean(*it, join(path, "strict_improvement"));
    if (auto it = j.find("reward_zero_tie"); it != j.end())
        c.reward_zero_tie = as_boolean(*it, join(path, "reward_zero_tie"));
    if (auto it = j.find("group_size"); it != j.end())
        c.group_size = static_cast<int>(as_integer(*it, join(path, "group_size")));
    c.validate();
    return c;
}

rl::PLWSchedule schedule_from_json(const json& j, std::string_view path) {
    check_keys(j, path, {"start", "end", "decay_steps", "shape"});
    rl::PLWSchedule s;
    if (auto it = j.find("start"); it != j.end()) s.start = as_number(*it, join(path, "start"));
    if (auto it = j.find("end"); it != j.end()) s.end = as_number(*it, join(path, "end"));
    if (auto it = j.find("decay_steps"); it != j.end())
        s.decay_steps = as_integer(*it, join(path, "decay_steps"));
    if (auto it = j.find("shape"); it != j.end()) {
        std::string shape = as_string(*it, join(path, "shape"));
        if (shape != "linear") fail(join(path, "shape"), "unknown shape '" + shape + "'");
    }
    s.validate();
    return s;
}

diar::ClusteringConfig clustering_from_json(const json& j, std::string_view path) {
    check_keys(j, path,
               {"max_single_segment_time", "min_tail", "prune_fraction", "max_speakers",
                "fixed_k", "kmeans_restarts", "seed", "gap_merge"});
    diar::ClusteringConfig c;
    if (auto it = j.find("max_single_segment_time"); it != j.end())
        c.max_single_segment_time = as_number(*it, join(path, "max_single_segment_time"));
    if (auto it = j.find("min_tail"); it != j.end())
        c.min_tail = as_number(*it, join(path, "min_tail"));
    if (auto it = j.find("prune_fraction"); it != j.end())
        c.prune_fraction = as_number(*it, join(path, "prune_fraction"));
    if (auto it = j.find("max_speakers"); it != j.end())
        c.max_speakers = static_cast<int>(as_integer(*it, join(path, "max_speakers")));
    if (auto it = j.find("fixed_k"); it != j.end() && !it->is_null())
        c.fixed_k = static_cast<int>(as_integer(*it, join(path, "fixed_k")));
    if (auto it = j.find("kmeans_restarts"); it != j.end())
        c.kmeans_restarts = static_cast<int>(as_integer(*it, join(path, "kmeans_restarts")));
    if (auto it = j.find("seed"); it != j.end())
        c.seed = static_cast<std::uint64_t>(as_integer(*it, join(path, "seed")));
    if (auto it = j.find("gap_merge"); it != j.end())
        c.gap_merge = as_number(*it, join(path, "gap_merge"));
    c.validate();
    return c;
}

RunConfig run_config_from_json(const json& j) {
    check_keys(j, "", {"reward", "schedule", "clustering", "normalization", "workers", "seed"});
    RunConfig c;
    if (auto it = j.find("seed"); it != j.end())
        c.seed = static_cast<std::uint64_t>(as_integer(*it, "seed"));
    if (auto it = j.find("workers"); it != j.end()) {
        c.workers = static_cast<int>(as_integer(*it, "workers"));
        if (c.workers < 1) fail("workers", "must be >= 1");
    }
    if (auto it = j.find("normalization"); it != j.end())
        c.normalization = normalization_from_json(*it, "normalization");
    if (auto it = j.find("reward"); it != j.end()) c.reward = reward_from_json(*it, "reward");
    if (auto it = j.find("schedule"); it != j.end())
        c.schedule = schedule_from_json(*it, "schedule");
    if (auto it = j.find("clustering"); it != j.end()) {
        c.clustering = clustering_from_json(*it, "clustering");
        if (!it->contains("seed")) c.clustering.seed = c.seed;
    } else {
        c.clustering.seed = c.seed;
    }
    c.reward.policy = c.normalization;
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config file " + path + ": " + e.what());
    }
    return run_config_from_json(j);
}

json to_json(const text::NormalizationPolicy& p) {
    json langs = json::array();
    for (text::Lang l : p.char_unit_langs) langs.push_back(std::string(text::lang_code(l)));
    return {{"char_unit_langs", langs}, {"strip_punct", p.strip_punct}, {"lowercase", p.lowercase}};
}

json to_json(const reward::RewardConfig& c) {
    json enabled = json::array();
    for (reward::RF rf : reward::kAllRFs)
        if (c.enabled.count(rf)) enabled.push_back(std::string(reward::rf_name(rf)));
    json weights = json::object();
    for (const auto& [rf, w] : c.weights) weights[std::string(reward::rf_name(rf))] = w;
    return {{"enabled", enabled},
            {"weights", weights},
            {"similarity_threshold", c.similarity_threshold},
            {"strict_improvement", c.strict_improvement},
            {"reward_zero_tie", c.reward_zero_tie},
            {"group_size", c.group_size}};
}

json to_json(const rl::PLWSchedule& s) {
    return {{"start", s.start},
            {"end", s.end},
            {"decay_steps", s.decay_steps},
            {"shape", "linear"}};
}

json to_json(const diar::ClusteringConfig& c) {
    json fixed_k;
    if (c.fixed_k) fixed_k = *c.fixed_k;
    return {{"max_single_segment_time", c.max_single_segment_time},
            {"min_tail", c.min_tail},
            {"prune_fraction", c.prune_fraction},
            {"max_speakers", c.max_speakers},
            {"fixed_k", fixed_k},
            {"kmeans_restarts", c.kmeans_restarts},
            {"seed", c.seed},
            {"gap_merge", c.gap_merge}};
}

json to_json(const RunConfig& c) {
    return {{"reward", to_json(c.reward)},
            {"schedule", to_json(c.schedule)},
            {"clustering", to_json(c.clustering)},
            {"normalization", to_json(c.normalization)},
            {"workers", c.workers},
            {"seed", c.seed}};
}

}  // namespace sltk::config
