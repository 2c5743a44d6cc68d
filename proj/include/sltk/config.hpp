#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "sltk/diar.hpp"
#include "sltk/reward.hpp"
#include "sltk/rl.hpp"
#include "sltk/text.hpp"

namespace sltk::config {

/// One JSON document per run. Parsing is strict: an unknown key anywhere
/// fails with the offending key path.
struct RunConfig {
    reward::RewardConfig reward;
    rl::PLWSchedule schedule;
    diar::ClusteringConfig clustering;
    text::NormalizationPolicy normalization;
    int workers = 1;
    std::uint64_t seed = 0;
};

void check_keys(const nlohmann::json& obj, std::string_view path,
                std::initializer_list<std::string_view> allowed);

text::NormalizationPolicy normalization_from_json(const nlohmann::json& j, std::string_view path);
reward::RewardConfig reward_from_json(const nlohmann::json& j, std::string_view path);
rl::PLWSchedule schedule_from_json(const nlohmann::json& j, std::string_view path);
diar::ClusteringConfig clustering_from_json(const nlohmann::json& j, std::string_view path);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

nlohmann::json to_json(const text::NormalizationPolicy& p);
nlohmann::json to_json(const reward::RewardConfig& c);
nlohmann::json to_json(const rl::PLWSchedule& s);
nlohmann::json to_json(const diar::ClusteringConfig& c);
nlohmann::json to_json(const RunConfig& c);

}  // namespace sltk::config
