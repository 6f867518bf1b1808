#pragma once

#include "mtt/experiment.hpp"

#include <json.hpp>

#include <filesystem>

namespace mtt::cli {

[[nodiscard]] nlohmann::json to_json(const TrackingLog& log);
[[nodiscard]] TrackingLog tracking_log_from_json(const nlohmann::json& j);

[[nodiscard]] Truth truth_of(const TrackingLog& log);

void write_json(const nlohmann::json& j, const std::filesystem::path& path);
[[nodiscard]] nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace mtt::cli
