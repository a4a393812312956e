#pragma once

#include <filesystem>

#include "crowdpaste/compositor.hpp"
#include "crowdpaste/placement.hpp"
#include "crowdpaste/sampling.hpp"
#include "json.hpp"

namespace crowdpaste {

// Missing keys keep their defaults; unknown keys raise ConfigError so typos in
// config files do not pass silently.
void to_json(nlohmann::json& j, const PsadaParams& p);
void from_json(const nlohmann::json& j, PsadaParams& p);
void to_json(nlohmann::json& j, const DengParams& p);
void from_json(const nlohmann::json& j, DengParams& p);
void to_json(nlohmann::json& j, const ColorJitter& c);
void from_json(const nlohmann::json& j, ColorJitter& c);

// Plans are strict: every field is required.
nlohmann::json plan_to_json(const PastePlan& plan);
PastePlan plan_from_json(const nlohmann::json& j);

void save_plan(const PastePlan& plan, const std::filesystem::path& path);
PastePlan load_plan(const std::filesystem::path& path);

// Throws ConfigError naming the first key of `j` not listed in `allowed`.
void reject_unknown_keys(const nlohmann::json& j,
                         std::initializer_list<std::string_view> allowed,
                         std::string_view section);

}  // namespace crowdpaste
