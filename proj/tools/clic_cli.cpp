#include <iostream>

#include <CLI11.hpp>

#include "clic/commands.hpp"
#include "clic/container.hpp"

namespace {

void addCommon(CLI::App *cmd, clic::cli::CommonOptions &opts, std::string &config, std::string &out,
	       std::uint64_t &seed)
{
	cmd->add_option("--config", config, "Run config (JSON)");
	cmd->add_option("--seed", seed, "Override the root seed");
	cmd->add_option("--out", out, "Output directory (default: config, then $CLIC_OUT_DIR, then ./clic_out)");
	cmd->add_flag("--force", opts.force, "Overwrite existing outputs");
}

void finishCommon(CLI::App *cmd, clic::cli::CommonOptions &opts, const std::string &config, const std::string &out,
		  std::uint64_t seed)
{
	if (!config.empty()) {
		opts.config = config;
	}

	if (!out.empty()) {
		opts.out = out;
	}

	if (cmd->count("--seed") > 0) {
		opts.seed = seed;
	}
}

} // namespace

int main(int argc, char **argv)
{
	CLI::App app{"Cross-link interference cancellation workbench"};
	app.require_subcommand(1);

	clic::cli::CommonOptions common;
	std::string config, out;
	std::uint64_t seed = 0;

	auto *generate = app.add_subcommand("generate", "Synthesize a clean-period dataset");
	addCommon(generate, common, config, out, seed);

	std::string canceller;
	auto *run = app.add_subcommand("run", "Fit one canceller and append its result row");
	addCommon(run, common, config, out, seed);
	run->add_option("--canceller", canceller, "tc, pc, nnc or hc")->required();

	clic::cli::SweepOptions sweep;
	auto *sweep_cmd = app.add_subcommand("sweep", "Sweep P (PC) or N_h (NNC and HC)");
	addCommon(sweep_cmd, common, config, out, seed);
	sweep_cmd->add_option("--axis", sweep.axis, "P or Nh")->required();
	sweep_cmd->add_option("--values", sweep.values, "e.g. 1,3,5,7 or 100..400:50")->required();
	sweep_cmd->add_flag("--counts-only", sweep.counts_only, "Only evaluate the counting formulas");

	clic::cli::ReportOptions report;
	std::string results, history, report_out;
	auto *report_cmd = app.add_subcommand("report", "Summarize a results CSV and export plot data");
	report_cmd->add_option("--results", results, "results.csv from run")->required();
	report_cmd->add_option("--history", history, "history.csv (default: next to results)");
	report_cmd->add_option("--out", report_out, "Directory for exported tables");

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError &e) {
		if (e.get_exit_code() == 0) {
			return app.exit(e);
		}

		std::cerr << "error: usage: " << e.what() << "\n";
		return 2;
	}

	try {
		if (generate->parsed()) {
			finishCommon(generate, common, config, out, seed);
			clic::cli::cmdGenerate(common, std::cerr);
		} else if (run->parsed()) {
			finishCommon(run, common, config, out, seed);
			clic::cli::cmdRun(common, canceller, std::cerr);
		} else if (sweep_cmd->parsed()) {
			finishCommon(sweep_cmd, common, config, out, seed);
			clic::cli::cmdSweep(common, sweep, std::cerr);
		} else if (report_cmd->parsed()) {
			report.results = results;

			if (!history.empty()) {
				report.history = history;
			}

			if (!report_out.empty()) {
				report.out = report_out;
			}

			clic::cli::cmdReport(report, std::cout);
		}
	} catch (const clic::cli::CommandError &e) {
		std::cerr << "error: " << e.what() << "\n";
		return e.exitCode();
	} catch (const std::exception &e) {
		std::cerr << "error: " << e.what() << "\n";
		return 1;
	}

	return 0;
}
