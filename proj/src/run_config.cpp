#include "clic/run_config.hpp"

#include <cstdlib>
#include <fstream>

namespace clic {

using nlohmann::json;

namespace {

void rejectUnknown(const json &j, const std::string &where, std::initializer_list<const char *> known)
{
	require(j.is_object(), where + ": expected an object");

	for (const auto &[key, value] : j.items()) {
		bool ok = false;

		for (const auto *k : known) {
			ok = ok || key == k;
		}

		require(ok, where + "." + key + ": unknown field");
	}
}

template <typename T>
void readField(const json &j, const std::string &where, const char *key, T &out)
{
	if (!j.contains(key)) {
		return;
	}

	try {
		out = j.at(key).get<T>();
	} catch (const json::exception &e) {
		throw InvalidArgument(where + "." + key + ": " + e.what());
	}
}

} // namespace

std::filesystem::path RunConfig::outDir() const
{
	if (!output.dir.empty()) {
		return output.dir;
	}

	if (const char *env = std::getenv(kOutDirEnv); env && *env) {
		return env;
	}

	return "clic_out";
}

std::filesystem::path RunConfig::datasetPath() const
{
	return outDir() / output.dataset;
}

json toJson(const RunConfig &cfg)
{
	const auto &t = cfg.canceller.train;

	return {
		{"schema_version", cfg.schema_version},
		{"scenario", toJson(cfg.scenario)},
		{"canceller",
		 {{"order", cfg.canceller.order},
		  {"hidden_nnc", cfg.canceller.hidden_nnc},
		  {"hidden_hc", cfg.canceller.hidden_hc},
		  {"ridge", cfg.canceller.ridge},
		  {"train",
		   {{"batch_size", t.batch_size},
		    {"epochs", t.epochs},
		    {"learning_rate", t.adam.learning_rate},
		    {"beta1", t.adam.beta1},
		    {"beta2", t.adam.beta2},
		    {"epsilon", t.adam.epsilon},
		    {"keep_best", t.keep_best}}}}},
		{"output", {{"dir", cfg.output.dir}, {"dataset", cfg.output.dataset}}},
	};
}

RunConfig runConfigFromJson(const json &j)
{
	rejectUnknown(j, "config", {"schema_version", "scenario", "canceller", "output"});

	RunConfig cfg;
	require(j.contains("schema_version"), "config.schema_version: missing");
	readField(j, "config", "schema_version", cfg.schema_version);
	require(cfg.schema_version == kRunConfigSchemaVersion,
		"config.schema_version: unsupported version " + std::to_string(cfg.schema_version));

	if (j.contains("scenario")) {
		try {
			cfg.scenario = scenarioFromJson(j.at("scenario"));
		} catch (const InvalidArgument &e) {
			throw InvalidArgument(std::string("config.") + e.what());
		}
	}

	if (j.contains("canceller")) {
		const auto &c = j.at("canceller");
		rejectUnknown(c, "config.canceller", {"order", "hidden_nnc", "hidden_hc", "ridge", "train"});
		readField(c, "config.canceller", "order", cfg.canceller.order);
		readField(c, "config.canceller", "hidden_nnc", cfg.canceller.hidden_nnc);
		readField(c, "config.canceller", "hidden_hc", cfg.canceller.hidden_hc);
		readField(c, "config.canceller", "ridge", cfg.canceller.ridge);
		require(cfg.canceller.order >= 1 && cfg.canceller.order % 2 == 1, "config.canceller.order: must be odd and >= 1");
		require(cfg.canceller.hidden_nnc >= 1 && cfg.canceller.hidden_hc >= 1, "config.canceller.hidden_*: must be >= 1");
		require(cfg.canceller.ridge >= 0.0, "config.canceller.ridge: must be >= 0");

		if (c.contains("train")) {
			const auto &t = c.at("train");
			const std::string where = "config.canceller.train";
			auto &tc = cfg.canceller.train;
			rejectUnknown(t, where, {"batch_size", "epochs", "learning_rate", "beta1", "beta2", "epsilon", "keep_best"});
			readField(t, where, "batch_size", tc.batch_size);
			readField(t, where, "epochs", tc.epochs);
			readField(t, where, "learning_rate", tc.adam.learning_rate);
			readField(t, where, "beta1", tc.adam.beta1);
			readField(t, where, "beta2", tc.adam.beta2);
			readField(t, where, "epsilon", tc.adam.epsilon);
			readField(t, where, "keep_best", tc.keep_best);

			try {
				tc.validate();
			} catch (const InvalidArgument &e) {
				throw InvalidArgument(where + ": " + e.what());
			}
		}
	}

	if (j.contains("output")) {
		const auto &o = j.at("output");
		rejectUnknown(o, "config.output", {"dir", "dataset"});
		readField(o, "config.output", "dir", cfg.output.dir);
		readField(o, "config.output", "dataset", cfg.output.dataset);
		require(!cfg.output.dataset.empty(), "config.output.dataset: must not be empty");
	}

	return cfg;
}

RunConfig loadRunConfig(const std::filesystem::path &path)
{
	std::ifstream in(path);
	require(static_cast<bool>(in), "config: cannot open " + path.string());

	json j;

	try {
		j = json::parse(in);
	} catch (const json::exception &e) {
		throw InvalidArgument("config: malformed JSON in " + path.string() + ": " + e.what());
	}

	return runConfigFromJson(j);
}

} // namespace clic
