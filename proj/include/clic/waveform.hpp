#pragma once

#include <cstdint>

#include "clic/types.hpp"

namespace clic {

/// OFDM numerology for the interfering BS downlink.
struct OfdmConfig {
	int fft_size{1024};
	/// Contiguous block centred on DC (DC included).
	int occupied_subcarriers{111};
	int cp_len{72};
	/// Square QAM order (4, 16, 64, ...).
	int qam_order{16};
	double sample_rate_hz{120e6};
	double bandwidth_hz{13e6};

	double occupiedBandwidthHz() const
	{
		return static_cast<double>(occupied_subcarriers) / fft_size * sample_rate_hz;
	}

	void validate() const;
};

/// Unit-energy square QAM point for symbol index k in [0, order).
cplx qamPoint(int order, std::uint64_t k);

/// Independent random QAM-OFDM streams, one per antenna, scaled so the
/// mean per-antenna power is exactly tx_power_dbm.
MultiSequence genOfdm(const OfdmConfig &cfg, std::size_t n_antennas, std::size_t n_samples, double tx_power_dbm,
		      std::uint64_t seed);

} // namespace clic
