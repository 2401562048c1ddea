#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "clic/harness.hpp"
#include "clic/run_config.hpp"

namespace clic::cli {

/// Failure with a stable one-line diagnostic; exit code 2 for usage errors, 1 otherwise.
class CommandError : public Error
{
public:
	CommandError(int exit_code, const std::string &what) : Error(what), _code(exit_code) {}

	int exitCode() const { return _code; }

private:
	int _code;
};

struct CommonOptions {
	std::optional<std::filesystem::path> config;
	std::optional<std::uint64_t> seed;
	std::optional<std::filesystem::path> out;
	bool force{false};
};

/// Loads the config (defaults when none is given) and applies --seed / --out.
RunConfig resolveConfig(const CommonOptions &opts);

/// Writes the dataset file. Returns its path.
std::filesystem::path cmdGenerate(const CommonOptions &opts, std::ostream &log);

/// Fits or trains one canceller on the dataset (generated first if absent),
/// appends to results.csv / history.csv and stores the model.
CancellerResult cmdRun(const CommonOptions &opts, const std::string &canceller, std::ostream &log);

struct SweepOptions {
	std::string axis;
	std::string values;
	bool counts_only{false};
};

/// Writes sweep_<axis>.csv. Returns its path.
std::filesystem::path cmdSweep(const CommonOptions &opts, const SweepOptions &sweep, std::ostream &log);

struct ReportOptions {
	std::filesystem::path results;
	std::optional<std::filesystem::path> history;
	std::optional<std::filesystem::path> out;
};

/// Prints the summary and writes summary.json, residual_power.csv and
/// epoch_loss.csv.
void cmdReport(const ReportOptions &opts, std::ostream &out);

/// "1,3,5", "100..400" or "100..400:50"; a range without a step uses default_step.
std::vector<std::int64_t> parseValues(const std::string &spec, std::int64_t default_step);

/// CSV schemas.
inline constexpr const char *kResultsHeader =
	"canceller,order,hidden,seed,c_db,residual_dbm,rx_dbm,n_params,complexity,epochs";
inline constexpr const char *kHistoryHeader = "canceller,order,hidden,seed,epoch,train_loss,test_loss,c_db";

std::string resultRow(const CancellerResult &r);
std::vector<std::string> historyRows(const CancellerResult &r);

} // namespace clic::cli
