#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "clic/channel.hpp"
#include "clic/rf_chain.hpp"
#include "clic/types.hpp"
#include "clic/waveform.hpp"

namespace clic {

/// Everything needed to synthesize one clean-period capture.
struct ScenarioConfig {
	std::size_t n_rx{4};
	std::size_t n_tx{4};
	std::size_t channel_taps{7};
	PathLossModel pathloss{};

	IqImbalance iq{1.05, 0.05};
	PaModel pa{{{cplx{1.0, 0.0}, cplx{0.05, 0.0}, cplx{0.01, 0.0}},
		    {cplx{-0.08, -0.02}, cplx{-0.01, 0.0}, cplx{-0.005, 0.0}}}};
	/// Optional per-antenna overrides; empty means iq/pa apply to every antenna.
	std::vector<RfChainParams> per_antenna{};
	/// Mean PA drive sits this far below unit drive (the coefficient reference).
	double pa_input_backoff_db{3.0};

	double tx_power_dbm{47.0};
	double rx_cli_power_dbm{-52.1};
	NoiseModel noise{-90.0};
	bool noise_enabled{true};

	bool adc_enabled{true};
	int adc_bits{12};
	/// ADC full scale = headroom * peak rail of the unquantized capture.
	double adc_headroom{1.2};

	bool calibrate{true};
	/// Replaces the Rayleigh draw when set; dimensions must match n_rx, n_tx, channel_taps.
	std::optional<MultipathChannel> fixed_channel{};

	OfdmConfig ofdm{};
	std::size_t n_samples{50000};
	double train_fraction{0.8};
	std::uint64_t seed{1};

	/// PA memory M.
	std::size_t paMemory() const;
	/// M + L, the regressor depth that spans the composed chain.
	std::size_t depth() const { return paMemory() + channel_taps; }

	/// RF parameters per antenna with the PA drive reference applied.
	std::vector<RfChainParams> rfParams() const;

	void validate() const;
};

nlohmann::json toJson(const ScenarioConfig &cfg);
/// Starts from defaults; unknown keys are rejected.
ScenarioConfig scenarioFromJson(const nlohmann::json &j);

/// Aligned clean-period capture of transmit data and received CLI.
struct CliDataset {
	MultiSequence d;
	MultiSequence s;
	/// max |d| over the training partition
	double m1{0.0};
	/// max |s| over the training partition
	double m2{0.0};
	std::size_t split_index{0};
	/// Generating config and seed, as JSON text.
	std::string meta;

	std::size_t size() const { return streamLength(d); }
	std::size_t numTx() const { return d.size(); }
	std::size_t numRx() const { return s.size(); }

	bool operator==(const CliDataset &) const = default;
};

/// Extra products of generation, kept for tests and diagnostics.
struct GenerationTrace {
	MultipathChannel channel;
	double channel_scale{1.0};
	std::optional<AdcConfig> adc;
	/// Received CLI power before noise/ADC over the evaluation window, mean per antenna.
	double clean_rx_power_dbm{0.0};
};

CliDataset generateDataset(const ScenarioConfig &cfg, GenerationTrace *trace = nullptr);

/// Max |x| over samples [0, end) of every stream.
double maxAbs(const MultiSequence &x, std::size_t end);

/// Sets m1, m2 from the training partition.
void computeNormalization(CliDataset &ds);

/// One row per window n = depth - 1, ..., N - 1. Row layout is antenna-major:
/// [Re d1[n], Im d1[n], Re d1[n-1], Im d1[n-1], ..., Re d_Na[n-depth+1], Im d_Na[n-depth+1]].
Eigen::MatrixXd buildRegressors(const MultiSequence &d, std::size_t depth);

/// Complex labels laid out as rows [Re s1[n], Im s1[n], ..., Re s_N0[n], Im s_N0[n]]
/// for n in [first, N).
Eigen::MatrixXd labelRows(const MultiSequence &s, std::size_t first);
MultiSequence labelStreams(const Eigen::MatrixXd &rows);

double normalize(double x, double m);
double denormalize(double y, double m);
cplx normalize(cplx x, double m);
cplx denormalize(cplx y, double m);
MultiSequence normalize(const MultiSequence &x, double m);
MultiSequence denormalize(const MultiSequence &y, double m);

void saveDataset(const CliDataset &ds, const std::filesystem::path &path);
CliDataset loadDataset(const std::filesystem::path &path);

} // namespace clic
