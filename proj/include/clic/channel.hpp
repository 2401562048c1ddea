#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "clic/types.hpp"

namespace clic {

/// h = r^{-gamma/2} * hdot
struct PathLossModel {
	double distance_m{1.0};
	double exponent{0.0};

	double amplitudeScale() const;
};

/// FIR taps per (rx, tx) antenna pair, stored rx-major.
class MultipathChannel
{
public:
	MultipathChannel() = default;
	MultipathChannel(std::size_t n_rx, std::size_t n_tx, std::size_t n_taps);

	std::size_t numRx() const { return _n_rx; }
	std::size_t numTx() const { return _n_tx; }
	std::size_t numTaps() const { return _n_taps; }

	cplx &tap(std::size_t rx, std::size_t tx, std::size_t l) { return _taps[index(rx, tx, l)]; }
	cplx tap(std::size_t rx, std::size_t tx, std::size_t l) const { return _taps[index(rx, tx, l)]; }

	const std::vector<cplx> &taps() const { return _taps; }

	MultipathChannel scaled(double factor) const;

	bool operator==(const MultipathChannel &) const = default;

private:
	std::size_t index(std::size_t rx, std::size_t tx, std::size_t l) const
	{
		return (rx * _n_tx + tx) * _n_taps + l;
	}

	std::size_t _n_rx{0};
	std::size_t _n_tx{0};
	std::size_t _n_taps{0};
	std::vector<cplx> _taps;
};

/// AWGN power in dBm; -infinity disables noise.
struct NoiseModel {
	double power_dbm{-std::numeric_limits<double>::infinity()};

	bool enabled() const { return power_dbm > -std::numeric_limits<double>::infinity(); }
};

/// Uniform mid-rise quantizer per rail over [-full_scale, +full_scale].
struct AdcConfig {
	int bits{12};
	double full_scale{1.0};

	double step() const;
	void validate() const;
};

double dbmToWatts(double dbm);
double wattsToDbm(double watts);

/// Rayleigh taps, each r^{-gamma/2} * CN(0, 1).
MultipathChannel drawChannel(std::uint64_t seed, std::size_t n_rx, std::size_t n_tx, std::size_t n_taps,
			     const PathLossModel &pathloss = {});

/// rx[r][n] = sum_t sum_l h[r][t][l] tx[t][n - l]
MultiSequence propagate(const MultiSequence &tx, const MultipathChannel &ch);

ComplexSequence addAwgn(const ComplexSequence &x, const NoiseModel &noise, std::uint64_t seed);

/// Adds independent noise to every stream; stream i uses deriveSeed-style offset i.
MultiSequence addAwgn(const MultiSequence &x, const NoiseModel &noise, std::uint64_t seed);

double quantizeRail(double v, const AdcConfig &adc);
ComplexSequence quantizeAdc(const ComplexSequence &x, const AdcConfig &adc);
MultiSequence quantizeAdc(const MultiSequence &x, const AdcConfig &adc);

/// 10 log10(mean |x|^2) + 30. Returns -infinity for an all-zero input.
double measurePowerDbm(const ComplexSequence &x);

/// Mean over antennas of the per-antenna linear power, in dBm.
double measurePowerDbm(const MultiSequence &x);

/// Largest |Re| or |Im| over all samples.
double peakRail(const MultiSequence &x);

struct CalibrationResult {
	MultipathChannel channel;
	double scale{1.0};
	/// Received minus transmitted power, dB.
	double path_gain_db{0.0};
};

/// Scales the channel by one real factor so that propagate(probe, channel)
/// has mean per-antenna power target_rx_power_dbm. probe is the transmit
/// chain output.
CalibrationResult calibrateChannelGain(const MultipathChannel &ch, double tx_power_dbm,
					double target_rx_power_dbm, const MultiSequence &probe);

} // namespace clic
