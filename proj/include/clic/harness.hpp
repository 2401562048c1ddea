#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clic/fnn.hpp"
#include "clic/poly_canceller.hpp"
#include "clic/scenario.hpp"

namespace clic {

/// Cancellation ratio over a window. db is empty when the residual is
/// below the numerical floor ("above measurable range").
struct Cancellation {
	double signal_energy{0.0};
	double residual_energy{0.0};
	std::optional<double> db;

	bool aboveRange() const { return !db.has_value(); }
};

/// Ratios beyond this are reported as above measurable range.
inline constexpr double kMaxMeasurableDb = 300.0;

/// 10 log10(sum |s|^2 / sum |s - s_hat|^2) over all antennas and samples [first, end).
Cancellation cDb(const MultiSequence &s, const MultiSequence &s_hat, std::size_t first, std::size_t end);
Cancellation cDb(const MultiSequence &s, const MultiSequence &s_hat);

/// measurePowerDbm(s - s_hat) over [first, end); -infinity when identical.
double residualPowerDbm(const MultiSequence &s, const MultiSequence &s_hat, std::size_t first, std::size_t end);

/// Mean per-antenna power of s over [first, end).
double windowPowerDbm(const MultiSequence &s, std::size_t first, std::size_t end);

/// TC real parameters, 2 N0 Na (M+L).
std::uint64_t countParamsTc(std::uint64_t n_rx, std::uint64_t n_tx, std::uint64_t pa_memory, std::uint64_t taps);
/// TC complexity, 8 N0 Na (M+L) - 2 N0.
std::uint64_t countComplexityTc(std::uint64_t n_rx, std::uint64_t n_tx, std::uint64_t pa_memory, std::uint64_t taps);
/// 2 N0 Na (M+L) + n_NNC
std::uint64_t countParamsHc(std::uint64_t n_rx, std::uint64_t n_tx, std::uint64_t pa_memory, std::uint64_t taps,
			    std::uint64_t hidden);
/// 8 N0 Na (M+L) - 2 N0 + c_NNC
std::uint64_t countComplexityHc(std::uint64_t n_rx, std::uint64_t n_tx, std::uint64_t pa_memory, std::uint64_t taps,
				std::uint64_t hidden);

enum class CancellerKind { Tc, Pc, Nnc, Hc };

std::string toString(CancellerKind kind);
CancellerKind cancellerFromString(const std::string &id);

/// Model dimensions the counting formulas need.
struct CancellerDims {
	std::size_t pa_memory{2};
	std::size_t channel_taps{7};

	std::size_t depth() const { return pa_memory + channel_taps; }
};

/// Reads M and L from a dataset generated by generateDataset.
CancellerDims dimsFromDataset(const CliDataset &ds);

struct CancellerOptions {
	int order{3};
	std::size_t hidden{300};
	TrainConfig train{};
	LsFitOptions ls{};
	/// Root for the network init and shuffle seeds.
	std::uint64_t seed{1};
};

struct CancellerResult {
	CancellerKind kind{CancellerKind::Tc};
	int order{0};
	std::size_t hidden{0};
	std::uint64_t seed{0};
	/// Evaluated on the test partition.
	Cancellation cancellation;
	double rx_power_dbm{0.0};
	double residual_power_dbm{0.0};
	std::uint64_t n_params{0};
	std::uint64_t complexity{0};
	std::size_t epochs_trained{0};
	std::size_t selected_epoch{0};
	std::vector<EpochStats> history;
	/// Test-partition C_dB after every epoch.
	std::vector<double> epoch_c_db;

	/// Reconstruction over the whole dataset.
	MultiSequence s_hat;
	std::optional<PolyCoefficients> coefficients;
	std::optional<FnnArtifact> network;
};

CancellerResult runTc(const CliDataset &ds, const CancellerDims &dims);
CancellerResult runPc(const CliDataset &ds, const CancellerDims &dims, int order, const LsFitOptions &ls = {});
CancellerResult runNnc(const CliDataset &ds, const CancellerDims &dims, const CancellerOptions &opts);
CancellerResult runHc(const CliDataset &ds, const CancellerDims &dims, const CancellerOptions &opts);
CancellerResult runCanceller(CancellerKind kind, const CliDataset &ds, const CancellerDims &dims,
			     const CancellerOptions &opts);

enum class SweepAxis { Order, Hidden };

SweepAxis sweepAxisFromString(const std::string &axis);

/// Shape of the dataset a sweep evaluates, used for count-only rows.
struct SweepShape {
	std::size_t n_rx{4};
	std::size_t n_tx{4};
	CancellerDims dims{};
};

/// Order axis: one PC row per value. Hidden axis: an NNC and an HC row per
/// value. With ds == nullptr only the counts are filled in.
std::vector<CancellerResult> sweep(const CliDataset *ds, const SweepShape &shape, SweepAxis axis,
				   const std::vector<std::int64_t> &values, const CancellerOptions &opts);

} // namespace clic
