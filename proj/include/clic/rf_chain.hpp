#pragma once

#include <vector>

#include "clic/types.hpp"

namespace clic {

/// Transmit IQ mixer gain/phase mismatch.
struct IqImbalance {
	double gain{1.0};
	double phase_rad{0.0};

	/// K1 = (1 + g e^{j phi}) / 2
	cplx k1() const;
	/// K2 = (1 - g e^{j phi}) / 2
	cplx k2() const;

	static IqImbalance ideal() { return {}; }
};

/// Parallel Hammerstein power amplifier.
///
/// branches[i] holds the memory taps of odd order p = 2i + 1, so the
/// order set {1, 3, ..., P} is implied by the vector length. Every branch
/// has the same number of taps, M + 1.
///
/// input_reference is the amplitude that maps to unit PA drive: the model
/// is evaluated on x / input_reference and the output is scaled back by
/// input_reference. With the default of 1 the model is used as written.
struct PaModel {
	std::vector<std::vector<cplx>> branches{{cplx{1.0, 0.0}}};
	double input_reference{1.0};

	int order() const { return static_cast<int>(2 * branches.size()) - 1; }
	int memory() const { return branches.empty() ? 0 : static_cast<int>(branches.front().size()) - 1; }

	/// Taps of odd order p.
	const std::vector<cplx> &taps(int p) const;

	/// Throws unless branches are non-empty, rectangular, and finite.
	void validate() const;

	static PaModel identity() { return {}; }
};

/// y[n] = K1 x[n] + K2 conj(x[n])
ComplexSequence applyIqMixer(const ComplexSequence &x, const IqImbalance &iq);

/// y[n] = sum_p sum_m v_p[m] x[n-m] |x[n-m]|^{p-1}, zero history.
ComplexSequence applyPa(const ComplexSequence &x, const PaModel &pa);

/// applyPa(applyIqMixer(d, iq), pa)
ComplexSequence transmitChain(const ComplexSequence &d, const IqImbalance &iq, const PaModel &pa);

/// Per-antenna transmit impairments.
struct RfChainParams {
	IqImbalance iq;
	PaModel pa;
};

/// Runs transmitChain on every antenna stream. params has either one
/// entry (shared by all antennas) or one per stream.
MultiSequence transmitChain(const MultiSequence &d, const std::vector<RfChainParams> &params);

} // namespace clic
