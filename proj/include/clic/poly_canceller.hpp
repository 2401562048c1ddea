#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "clic/types.hpp"

namespace clic {

/// Index set of the polynomial CLI expansion for one interfering BS.
///
/// Terms are ordered (tx antenna, p, q, m) with m fastest. A linear-only
/// spec keeps just (p = 1, q = 1), the traditional FIR canceller.
struct BasisSpec {
	int order{3};
	std::size_t depth{1};
	std::size_t n_tx{1};
	bool linear_only{false};

	struct Term {
		std::size_t tx;
		int p;
		int q;
		std::size_t m;
	};

	/// (p, q) pairs per (tx, m): (P+1)(P+3)/4, or 1 when linear_only.
	std::size_t pairsPerTap() const;
	std::size_t numTerms() const { return n_tx * depth * pairsPerTap(); }
	std::vector<Term> terms() const;

	void validate() const;

	bool operator==(const BasisSpec &) const = default;
};

/// x^q conj(x)^{p-q}
cplx basisPhi(cplx x, int p, int q);

/// Rows are sample indices n = depth - 1, ..., N - 1; columns follow
/// BasisSpec::terms().
Eigen::MatrixXcd buildBasisMatrix(const MultiSequence &d, const BasisSpec &spec);

/// Per-rx-antenna coefficients; omega.col(rx) matches spec.terms().
struct PolyCoefficients {
	BasisSpec spec;
	Eigen::MatrixXcd omega;

	std::size_t numRx() const { return static_cast<std::size_t>(omega.cols()); }
};

struct LsFitOptions {
	/// Tikhonov weight; 0 is plain least squares.
	double ridge{0.0};
	/// Relative pivot threshold below which a column counts as dependent.
	double rank_tolerance{1e-12};
};

struct LsFitReport {
	/// ||B w - y|| / ||y|| over all rx antennas.
	double relative_residual{0.0};
	/// |R_00| / |R_kk| of the pivoted QR.
	double condition_estimate{0.0};
};

/// Solves min ||basis * w - y|| per column of labels with one shared
/// column-pivoted Householder QR. labels has one column per rx antenna.
PolyCoefficients lsFit(const Eigen::MatrixXcd &basis, const Eigen::MatrixXcd &labels, const BasisSpec &spec,
		       const LsFitOptions &opts = {}, LsFitReport *report = nullptr);

/// Labels for windows n = first, ..., N - 1 as one column per rx antenna.
Eigen::MatrixXcd labelMatrix(const MultiSequence &s, std::size_t first, std::size_t end);

/// s_hat[rx][n] = sum_terms omega * Phi(d_tx[n-m], p, q) for n >= depth - 1.
/// The first depth - 1 outputs, which need pre-history, are zero.
MultiSequence reconstruct(const PolyCoefficients &coeffs, const MultiSequence &d);

/// Fits spec on samples [depth - 1, end) of (d, s).
PolyCoefficients polyFit(const MultiSequence &d, const MultiSequence &s, const BasisSpec &spec, std::size_t end,
			 const LsFitOptions &opts = {}, LsFitReport *report = nullptr);

/// Linear-only fit: FIR taps per (rx, tx) over depth samples.
PolyCoefficients tcFit(const MultiSequence &d, const MultiSequence &s, std::size_t depth, std::size_t end,
		       const LsFitOptions &opts = {}, LsFitReport *report = nullptr);

/// Real parameters, 0.5 N0 Na (M+L)(P+1)(P+3).
std::uint64_t countParamsPc(std::uint64_t n_rx, std::uint64_t n_tx, std::uint64_t pa_memory, std::uint64_t taps, int order);

/// Real additions and multiplications to reconstruct one sample on all rx
/// antennas, with the ((35P+33) 6^{P+2} + 12) / 35^2 per-term cost
/// evaluated as an exact rational and rounded once at the end.
std::uint64_t countComplexityPc(std::uint64_t n_rx, std::uint64_t n_tx, std::uint64_t pa_memory, std::uint64_t taps,
				int order);

void savePolyCoefficients(const PolyCoefficients &c, const std::filesystem::path &path);
PolyCoefficients loadPolyCoefficients(const std::filesystem::path &path);

} // namespace clic
