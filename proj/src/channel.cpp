#include "clic/channel.hpp"

#include <algorithm>
#include <cmath>

#include "clic/rng.hpp"

namespace clic {

double PathLossModel::amplitudeScale() const
{
	require(distance_m > 0.0, "PathLossModel: distance must be positive");
	require(exponent >= 0.0, "PathLossModel: exponent must be non-negative");
	return std::pow(distance_m, -exponent / 2.0);
}

MultipathChannel::MultipathChannel(std::size_t n_rx, std::size_t n_tx, std::size_t n_taps)
	: _n_rx(n_rx), _n_tx(n_tx), _n_taps(n_taps), _taps(n_rx * n_tx * n_taps)
{
	require(n_rx >= 1 && n_tx >= 1 && n_taps >= 1, "MultipathChannel: dimensions must be >= 1");
}

MultipathChannel MultipathChannel::scaled(double factor) const
{
	MultipathChannel out = *this;

	for (auto &h : out._taps) {
		h *= factor;
	}

	return out;
}

double AdcConfig::step() const
{
	return 2.0 * full_scale / std::ldexp(1.0, bits);
}

void AdcConfig::validate() const
{
	require(bits >= 1 && bits <= 52, "AdcConfig: bits out of range");
	require(std::isfinite(full_scale) && full_scale > 0.0, "AdcConfig: full_scale must be positive");
}

double dbmToWatts(double dbm)
{
	return std::pow(10.0, (dbm - 30.0) / 10.0);
}

double wattsToDbm(double watts)
{
	return 10.0 * std::log10(watts) + 30.0;
}

MultipathChannel drawChannel(std::uint64_t seed, std::size_t n_rx, std::size_t n_tx, std::size_t n_taps,
			     const PathLossModel &pathloss)
{
	MultipathChannel ch(n_rx, n_tx, n_taps);
	const double scale = pathloss.amplitudeScale();
	Rng rng(seed);

	for (std::size_t r = 0; r < n_rx; ++r) {
		for (std::size_t t = 0; t < n_tx; ++t) {
			for (std::size_t l = 0; l < n_taps; ++l) {
				ch.tap(r, t, l) = scale * rng.complexNormal(1.0);
			}
		}
	}

	return ch;
}

MultiSequence propagate(const MultiSequence &tx, const MultipathChannel &ch)
{
	require(tx.size() == ch.numTx(), "propagate: transmit stream count does not match channel");
	requireAligned(tx, "propagate");

	const std::size_t n = streamLength(tx);
	MultiSequence rx(ch.numRx(), ComplexSequence(n, cplx{}));

	for (std::size_t r = 0; r < ch.numRx(); ++r) {
		for (std::size_t t = 0; t < ch.numTx(); ++t) {
			for (std::size_t l = 0; l < ch.numTaps() && l < n; ++l) {
				const cplx h = ch.tap(r, t, l);
				const auto &x = tx[t];
				auto &y = rx[r];

				for (std::size_t k = l; k < n; ++k) {
					y[k] += h * x[k - l];
				}
			}
		}
	}

	return rx;
}

ComplexSequence addAwgn(const ComplexSequence &x, const NoiseModel &noise, std::uint64_t seed)
{
	if (!noise.enabled()) {
		return x;
	}

	require(std::isfinite(noise.power_dbm), "NoiseModel: power must be finite or -inf");

	const double variance = dbmToWatts(noise.power_dbm);
	Rng rng(seed);
	ComplexSequence y(x.size());

	for (std::size_t n = 0; n < x.size(); ++n) {
		y[n] = x[n] + rng.complexNormal(variance);
	}

	return y;
}

MultiSequence addAwgn(const MultiSequence &x, const NoiseModel &noise, std::uint64_t seed)
{
	MultiSequence out;
	out.reserve(x.size());

	for (std::size_t i = 0; i < x.size(); ++i) {
		out.push_back(addAwgn(x[i], noise, mix64(seed + i)));
	}

	return out;
}

double quantizeRail(double v, const AdcConfig &adc)
{
	const double step = adc.step();
	const double top = adc.full_scale - step / 2.0;
	const double q = (std::floor(v / step) + 0.5) * step;
	return std::clamp(q, -top, top);
}

ComplexSequence quantizeAdc(const ComplexSequence &x, const AdcConfig &adc)
{
	adc.validate();
	ComplexSequence y(x.size());

	for (std::size_t n = 0; n < x.size(); ++n) {
		y[n] = {quantizeRail(x[n].real(), adc), quantizeRail(x[n].imag(), adc)};
	}

	return y;
}

MultiSequence quantizeAdc(const MultiSequence &x, const AdcConfig &adc)
{
	MultiSequence out;
	out.reserve(x.size());

	for (const auto &s : x) {
		out.push_back(quantizeAdc(s, adc));
	}

	return out;
}

namespace {

double meanPower(const ComplexSequence &x)
{
	double acc = 0.0;

	for (const auto &v : x) {
		acc += std::norm(v);
	}

	return acc / static_cast<double>(x.size());
}

} // namespace

double measurePowerDbm(const ComplexSequence &x)
{
	require(!x.empty(), "measurePowerDbm: empty input");
	return wattsToDbm(meanPower(x));
}

double measurePowerDbm(const MultiSequence &x)
{
	require(!x.empty(), "measurePowerDbm: no streams");
	double acc = 0.0;

	for (const auto &s : x) {
		require(!s.empty(), "measurePowerDbm: empty stream");
		acc += meanPower(s);
	}

	return wattsToDbm(acc / static_cast<double>(x.size()));
}

double peakRail(const MultiSequence &x)
{
	double peak = 0.0;

	for (const auto &s : x) {
		for (const auto &v : s) {
			peak = std::max({peak, std::abs(v.real()), std::abs(v.imag())});
		}
	}

	return peak;
}

CalibrationResult calibrateChannelGain(const MultipathChannel &ch, double tx_power_dbm,
					double target_rx_power_dbm, const MultiSequence &probe)
{
	require(std::isfinite(tx_power_dbm) && std::isfinite(target_rx_power_dbm),
		"calibrateChannelGain: powers must be finite");

	const double rx_dbm = measurePowerDbm(propagate(probe, ch));
	require(std::isfinite(rx_dbm), "calibrateChannelGain: probe has zero received energy");

	CalibrationResult out;
	out.scale = std::pow(10.0, (target_rx_power_dbm - rx_dbm) / 20.0);
	out.channel = ch.scaled(out.scale);
	out.path_gain_db = target_rx_power_dbm - tx_power_dbm;
	return out;
}

} // namespace clic
