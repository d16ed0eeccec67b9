#pragma once

#include <filesystem>

#include <nlohmann/json_fwd.hpp>

#include "mer/estimator.hpp"
#include "mer/evaluation.hpp"
#include "mer/forest.hpp"
#include "mer/selection.hpp"
#include "mer/svr.hpp"

namespace mer {

nlohmann::json to_json(const SvrParams& p);
SvrParams svr_params_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SvrModel& m);
SvrModel svr_model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ForestParams& p);
ForestParams forest_params_from_json(const nlohmann::json& j);

// Flattened node arrays per tree; child index -1 marks a leaf.
nlohmann::json to_json(const ForestModel& m);
ForestModel forest_model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EstimatorSpec& s);
EstimatorSpec estimator_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SelectedFeatureSet& s);
SelectedFeatureSet sfs_from_json(const nlohmann::json& j);

nlohmann::json to_json(const BenchmarkReport& r);

// Atomic write: the file appears complete or not at all.
void write_json_file(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

void save_sfs(const SelectedFeatureSet& s, const std::filesystem::path& path);
SelectedFeatureSet load_sfs(const std::filesystem::path& path);

}  // namespace mer
