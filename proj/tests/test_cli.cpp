#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "clic/commands.hpp"

using namespace clic;
namespace fs = std::filesystem;

namespace {

struct Outcome {
	int code;
	std::string output;
};

Outcome runCli(const std::string &args)
{
	const std::string cmd = std::string(CLIC_CLI_PATH) + " " + args + " 2>&1";
	FILE *pipe = popen(cmd.c_str(), "r");
	std::string out;
	char buf[512];

	while (pipe && fgets(buf, sizeof buf, pipe)) {
		out += buf;
	}

	const int status = pipe ? pclose(pipe) : -1;
	return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path &p)
{
	std::ifstream in(p, std::ios::binary);
	std::stringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

std::vector<std::string> lines(const std::string &text)
{
	std::vector<std::string> out;
	std::stringstream ss(text);
	std::string line;

	while (std::getline(ss, line)) {
		out.push_back(line);
	}

	return out;
}

class CliTest : public ::testing::Test
{
protected:
	void SetUp() override
	{
		dir = fs::temp_directory_path() / ("clic_cli_" + std::string(
							 ::testing::UnitTest::GetInstance()->current_test_info()->name()));
		fs::remove_all(dir);
		fs::create_directories(dir);

		auto cfg = toJson(RunConfig{});
		cfg["scenario"]["n_samples"] = 3000;
		cfg["canceller"]["hidden_nnc"] = 12;
		cfg["canceller"]["hidden_hc"] = 8;
		cfg["canceller"]["train"]["epochs"] = 2;
		config = dir / "small.json";
		std::ofstream(config) << cfg.dump(2);
	}

	std::string common() const { return "--config " + config.string() + " --out " + (dir / "out").string(); }

	fs::path dir;
	fs::path config;
};

int countLines(const std::string &s)
{
	return static_cast<int>(lines(s).size());
}

} // namespace

TEST(ParseValues, Forms)
{
	EXPECT_EQ(cli::parseValues("1,3,5", 2), (std::vector<std::int64_t>{1, 3, 5}));
	EXPECT_EQ(cli::parseValues("1..7", 2), (std::vector<std::int64_t>{1, 3, 5, 7}));
	EXPECT_EQ(cli::parseValues("100..400:100", 1), (std::vector<std::int64_t>{100, 200, 300, 400}));
	EXPECT_THROW(cli::parseValues("", 1), cli::CommandError);
	EXPECT_THROW(cli::parseValues("5..1", 1), cli::CommandError);
	EXPECT_THROW(cli::parseValues("1,x", 1), cli::CommandError);
	EXPECT_THROW(cli::parseValues("1..5:0", 1), cli::CommandError);
}

TEST_F(CliTest, GenerateRunReport)
{
	auto r = runCli("generate " + common());
	ASSERT_EQ(r.code, 0) << r.output;
	EXPECT_TRUE(fs::exists(dir / "out" / "dataset.clic"));
	EXPECT_TRUE(fs::exists(dir / "out" / "config.json"));

	for (const char *c : {"tc", "pc", "nnc", "hc"}) {
		r = runCli(std::string("run --canceller ") + c + " " + common());
		ASSERT_EQ(r.code, 0) << r.output;
	}

	const auto rows = lines(slurp(dir / "out" / "results.csv"));
	ASSERT_EQ(rows.size(), 5u);
	EXPECT_EQ(rows[0], cli::kResultsHeader);
	EXPECT_EQ(rows[2].rfind("pc,3,0,", 0), 0u);
	EXPECT_NE(rows[2].find(",1728,127864,"), std::string::npos);

	// two epochs each for nnc and hc
	EXPECT_EQ(countLines(slurp(dir / "out" / "history.csv")), 5);

	for (const char *f : {"tc.clic", "pc_P3.clic", "nnc_Nh12.clic", "hc_Nh8.clic"}) {
		EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
	}

	r = runCli("report --results " + (dir / "out" / "results.csv").string() + " --history " +
		   (dir / "out" / "history.csv").string() + " --out " + (dir / "report").string());
	ASSERT_EQ(r.code, 0) << r.output;
	EXPECT_NE(r.output.find("pc"), std::string::npos);

	const auto summary = nlohmann::json::parse(slurp(dir / "report" / "summary.json"));
	EXPECT_TRUE(summary.is_object() || summary.is_array());
	EXPECT_EQ(countLines(slurp(dir / "report" / "residual_power.csv")), 5);
	EXPECT_EQ(countLines(slurp(dir / "report" / "epoch_loss.csv")), 5);
}

TEST_F(CliTest, RunGeneratesMissingDataset)
{
	const auto r = runCli("run --canceller tc " + common());
	ASSERT_EQ(r.code, 0) << r.output;
	EXPECT_TRUE(fs::exists(dir / "out" / "dataset.clic"));
}

TEST_F(CliTest, RefusesOverwriteWithoutForce)
{
	ASSERT_EQ(runCli("generate " + common()).code, 0);
	const auto before = slurp(dir / "out" / "dataset.clic");

	auto r = runCli("generate --seed 9 " + common());
	EXPECT_NE(r.code, 0);
	EXPECT_EQ(countLines(r.output), 1) << r.output;
	EXPECT_EQ(r.output.rfind("error:", 0), 0u);
	EXPECT_EQ(slurp(dir / "out" / "dataset.clic"), before);

	r = runCli("generate --seed 9 --force " + common());
	EXPECT_EQ(r.code, 0) << r.output;
	EXPECT_NE(slurp(dir / "out" / "dataset.clic"), before);
}

TEST_F(CliTest, BadInputsGiveOneLineErrors)
{
	auto cfg = nlohmann::json::parse(slurp(config));
	cfg["canceller"]["mystery"] = 1;
	const auto bad = dir / "bad.json";
	std::ofstream(bad) << cfg.dump();

	auto r = runCli("generate --config " + bad.string() + " --out " + (dir / "o").string());
	EXPECT_NE(r.code, 0);
	EXPECT_EQ(countLines(r.output), 1) << r.output;
	EXPECT_NE(r.output.find("mystery"), std::string::npos);

	r = runCli("run --canceller xyz " + common());
	EXPECT_EQ(r.code, 2) << r.output;

	r = runCli("sweep --axis Q --values 1..3 --counts-only " + common());
	EXPECT_EQ(r.code, 2) << r.output;

	r = runCli("generate --config " + (dir / "missing.json").string());
	EXPECT_NE(r.code, 0);
	EXPECT_EQ(countLines(r.output), 1) << r.output;

	// corrupt dataset
	ASSERT_EQ(runCli("generate " + common()).code, 0);
	{
		std::fstream f(dir / "out" / "dataset.clic", std::ios::in | std::ios::out | std::ios::binary);
		f.seekp(200);
		f.put('\x7f');
	}
	r = runCli("run --canceller tc " + common());
	EXPECT_NE(r.code, 0);
	EXPECT_NE(r.output.find("checksum"), std::string::npos) << r.output;
}

TEST_F(CliTest, SweepCountsOnly)
{
	auto r = runCli("sweep --axis P --values 1..7 --counts-only " + common());
	ASSERT_EQ(r.code, 0) << r.output;
	const auto rows = lines(slurp(dir / "out" / "sweep_P.csv"));
	ASSERT_EQ(rows.size(), 5u);
	EXPECT_NE(rows[2].find(",1728,127864,"), std::string::npos);

	r = runCli("sweep --axis Nh --values 100..300:100 --counts-only " + common());
	ASSERT_EQ(r.code, 0) << r.output;
	EXPECT_EQ(countLines(slurp(dir / "out" / "sweep_Nh.csv")), 7);

	r = runCli("sweep --axis P --values 1..7 --counts-only " + common());
	EXPECT_NE(r.code, 0);
}

TEST_F(CliTest, ReportRejectsBadSchema)
{
	const auto bad = dir / "bad.csv";
	std::ofstream(bad) << "canceller,order\ntc,1\n";
	const auto r = runCli("report --results " + bad.string() + " --out " + (dir / "rep").string());
	EXPECT_NE(r.code, 0);
	EXPECT_EQ(countLines(r.output), 1) << r.output;
}
