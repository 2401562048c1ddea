#include "clic/rf_chain.hpp"

#include <cmath>
#include <string>

namespace clic {

cplx IqImbalance::k1() const
{
	return 0.5 * (1.0 + std::polar(gain, phase_rad));
}

cplx IqImbalance::k2() const
{
	return 0.5 * (1.0 - std::polar(gain, phase_rad));
}

const std::vector<cplx> &PaModel::taps(int p) const
{
	require(p >= 1 && p % 2 == 1 && p <= order(), "PaModel: order " + std::to_string(p) + " not present");
	return branches[static_cast<std::size_t>((p - 1) / 2)];
}

void PaModel::validate() const
{
	require(!branches.empty(), "PaModel: no branches");
	require(std::isfinite(input_reference) && input_reference > 0.0, "PaModel: input_reference must be positive");

	for (const auto &b : branches) {
		require(!b.empty() && b.size() == branches.front().size(), "PaModel: branches must share memory length");

		for (const auto &v : b) {
			require(std::isfinite(v.real()) && std::isfinite(v.imag()), "PaModel: non-finite coefficient");
		}
	}
}

ComplexSequence applyIqMixer(const ComplexSequence &x, const IqImbalance &iq)
{
	const cplx k1 = iq.k1();
	const cplx k2 = iq.k2();
	ComplexSequence y(x.size());

	for (std::size_t n = 0; n < x.size(); ++n) {
		y[n] = k1 * x[n] + k2 * std::conj(x[n]);
	}

	return y;
}

ComplexSequence applyPa(const ComplexSequence &x, const PaModel &pa)
{
	pa.validate();

	const double ref = pa.input_reference;
	const std::size_t taps = pa.branches.front().size();

	// basis[n][i] = u[n] |u[n]|^{2i}, with u the drive-normalized input
	std::vector<std::vector<cplx>> basis(x.size(), std::vector<cplx>(pa.branches.size()));

	for (std::size_t n = 0; n < x.size(); ++n) {
		const cplx u = x[n] / ref;
		const double mag2 = std::norm(u);
		cplx term = u;

		for (std::size_t i = 0; i < pa.branches.size(); ++i) {
			basis[n][i] = term;
			term *= mag2;
		}
	}

	ComplexSequence y(x.size(), cplx{});

	for (std::size_t n = 0; n < x.size(); ++n) {
		cplx acc{};

		for (std::size_t m = 0; m < taps && m <= n; ++m) {
			for (std::size_t i = 0; i < pa.branches.size(); ++i) {
				acc += pa.branches[i][m] * basis[n - m][i];
			}
		}

		y[n] = ref * acc;
	}

	return y;
}

ComplexSequence transmitChain(const ComplexSequence &d, const IqImbalance &iq, const PaModel &pa)
{
	return applyPa(applyIqMixer(d, iq), pa);
}

MultiSequence transmitChain(const MultiSequence &d, const std::vector<RfChainParams> &params)
{
	require(params.size() == 1 || params.size() == d.size(),
		"transmitChain: need one RF parameter set or one per antenna");

	MultiSequence out;
	out.reserve(d.size());

	for (std::size_t a = 0; a < d.size(); ++a) {
		const auto &p = params.size() == 1 ? params.front() : params[a];
		out.push_back(transmitChain(d[a], p.iq, p.pa));
	}

	return out;
}

} // namespace clic
