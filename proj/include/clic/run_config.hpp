#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "clic/fnn.hpp"
#include "clic/scenario.hpp"

namespace clic {

inline constexpr int kRunConfigSchemaVersion = 1;

/// Environment variable naming the default output directory.
inline constexpr const char *kOutDirEnv = "CLIC_OUT_DIR";

struct CancellerSettings {
	int order{3};
	std::size_t hidden_nnc{300};
	std::size_t hidden_hc{200};
	TrainConfig train{};
	double ridge{0.0};
};

struct OutputSettings {
	/// Empty means $CLIC_OUT_DIR, else "clic_out".
	std::string dir{};
	std::string dataset{"dataset.clic"};
};

/// Complete run description. Every field has a default, so "{}" plus a
/// schema_version is a valid config.
struct RunConfig {
	int schema_version{kRunConfigSchemaVersion};
	ScenarioConfig scenario{};
	CancellerSettings canceller{};
	OutputSettings output{};

	std::filesystem::path outDir() const;
	std::filesystem::path datasetPath() const;
};

nlohmann::json toJson(const RunConfig &cfg);
/// Rejects unknown fields and a missing or different schema_version. The
/// exception message names the offending field.
RunConfig runConfigFromJson(const nlohmann::json &j);
RunConfig loadRunConfig(const std::filesystem::path &path);

} // namespace clic
