#include "clic/rng.hpp"

#include <cmath>
#include <numbers>

namespace clic {

void requireAligned(const MultiSequence &streams, const std::string &what)
{
	for (const auto &s : streams) {
		if (s.size() != streams.front().size()) {
			throw InvalidArgument(what + ": streams differ in length");
		}
	}
}

std::uint64_t Rng::below(std::uint64_t n)
{
	// rejection sampling keeps the result unbiased
	const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
	std::uint64_t v = _engine();

	while (v >= limit) {
		v = _engine();
	}

	return v % n;
}

double Rng::normal()
{
	if (_has_spare) {
		_has_spare = false;
		return _spare;
	}

	double u1 = uniform();

	while (u1 <= 0.0) {
		u1 = uniform();
	}

	const double u2 = uniform();
	const double r = std::sqrt(-2.0 * std::log(u1));
	const double theta = 2.0 * std::numbers::pi * u2;
	_spare = r * std::sin(theta);
	_has_spare = true;
	return r * std::cos(theta);
}

cplx Rng::complexNormal(double variance)
{
	const double s = std::sqrt(variance / 2.0);
	const double re = normal();
	const double im = normal();
	return {s * re, s * im};
}

} // namespace clic
