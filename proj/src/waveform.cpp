#include "clic/waveform.hpp"

#include <cmath>
#include <unsupported/Eigen/FFT>

#include "clic/channel.hpp"
#include "clic/rng.hpp"

namespace clic {

void OfdmConfig::validate() const
{
	require(fft_size >= 2, "OfdmConfig: fft_size must be >= 2");
	require(occupied_subcarriers >= 1 && occupied_subcarriers < fft_size,
		"OfdmConfig: occupied_subcarriers must be in [1, fft_size)");
	require(cp_len >= 0 && cp_len < fft_size, "OfdmConfig: cp_len must be in [0, fft_size)");
	require(sample_rate_hz > 0.0 && bandwidth_hz > 0.0, "OfdmConfig: rates must be positive");

	const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(qam_order))));
	require(qam_order >= 4 && side * side == qam_order && side % 2 == 0, "OfdmConfig: qam_order must be a square of an even number");

	const double rel = std::abs(occupiedBandwidthHz() - bandwidth_hz) / bandwidth_hz;
	require(rel <= 0.05, "OfdmConfig: occupied bandwidth differs from bandwidth_hz by more than 5%");
}

cplx qamPoint(int order, std::uint64_t k)
{
	const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
	const auto i = static_cast<int>(k % static_cast<std::uint64_t>(side));
	const auto q = static_cast<int>(k / static_cast<std::uint64_t>(side));
	// mean energy of the odd-integer grid is 2 (side^2 - 1) / 3
	const double norm = std::sqrt(2.0 * (order - 1) / 3.0);
	return {(2.0 * i - side + 1) / norm, (2.0 * q - side + 1) / norm};
}

MultiSequence genOfdm(const OfdmConfig &cfg, std::size_t n_antennas, std::size_t n_samples, double tx_power_dbm,
		      std::uint64_t seed)
{
	cfg.validate();
	require(n_antennas >= 1, "genOfdm: need at least one antenna");
	require(n_samples >= static_cast<std::size_t>(cfg.fft_size + cfg.cp_len), "genOfdm: n_samples shorter than one symbol");
	require(std::isfinite(tx_power_dbm), "genOfdm: tx power must be finite");

	const auto nfft = static_cast<std::size_t>(cfg.fft_size);
	const auto ncp = static_cast<std::size_t>(cfg.cp_len);
	const int half = cfg.occupied_subcarriers / 2;
	const int first = -half;
	const int last = cfg.occupied_subcarriers - half - 1;

	Eigen::FFT<double> fft;
	MultiSequence out(n_antennas);

	for (std::size_t a = 0; a < n_antennas; ++a) {
		Rng rng(mix64(seed + a));
		auto &stream = out[a];
		stream.reserve(n_samples + nfft + ncp);

		std::vector<cplx> grid(nfft);
		std::vector<cplx> symbol;

		while (stream.size() < n_samples) {
			std::fill(grid.begin(), grid.end(), cplx{});

			for (int k = first; k <= last; ++k) {
				const auto bin = static_cast<std::size_t>((k + cfg.fft_size) % cfg.fft_size);
				grid[bin] = qamPoint(cfg.qam_order, rng.below(static_cast<std::uint64_t>(cfg.qam_order)));
			}

			fft.inv(symbol, grid);
			stream.insert(stream.end(), symbol.end() - static_cast<std::ptrdiff_t>(ncp), symbol.end());
			stream.insert(stream.end(), symbol.begin(), symbol.end());
		}

		stream.resize(n_samples);
	}

	const double scale = std::sqrt(dbmToWatts(tx_power_dbm) / dbmToWatts(measurePowerDbm(out)));

	for (auto &stream : out) {
		for (auto &v : stream) {
			v *= scale;
		}
	}

	return out;
}

} // namespace clic
