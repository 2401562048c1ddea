#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "clic/types.hpp"

namespace clic {

/// Purpose tags for per-component seeds derived from one root seed.
enum class SeedPurpose : std::uint64_t {
	Waveform = 1,
	Channel = 2,
	Noise = 3,
	Init = 4,
	Shuffle = 5,
	Impairment = 6,
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z)
{
	z += 0x9e3779b97f4a7c15ULL;
	z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
	z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
	return z ^ (z >> 31);
}

/// Counter-based derivation: seed = mix64(mix64(root) ^ (purpose << 32 | index)).
constexpr std::uint64_t deriveSeed(std::uint64_t root, SeedPurpose purpose, std::uint32_t index = 0)
{
	return mix64(mix64(root) ^ ((static_cast<std::uint64_t>(purpose) << 32) | index));
}

/// Portable random source. std::mt19937_64 has a fixed output sequence;
/// the uniform and normal transforms are done here so results do not
/// depend on the standard library's distribution implementations.
class Rng
{
public:
	explicit Rng(std::uint64_t seed) : _engine(seed) {}

	std::uint64_t nextU64() { return _engine(); }

	/// Uniform on [0, 1) with 53 random bits.
	double uniform() { return static_cast<double>(_engine() >> 11) * 0x1.0p-53; }

	/// Uniform integer on [0, n).
	std::uint64_t below(std::uint64_t n);

	/// Standard normal (Box-Muller, both outputs used).
	double normal();

	/// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
	cplx complexNormal(double variance = 1.0);

private:
	std::mt19937_64 _engine;
	double _spare{0.0};
	bool _has_spare{false};
};

} // namespace clic
