#include "clic/poly_canceller.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "clic/container.hpp"

namespace clic {

namespace {

constexpr const char *kPolyKind = "POLY";

using u128 = unsigned __int128;

} // namespace

std::size_t BasisSpec::pairsPerTap() const
{
	if (linear_only) {
		return 1;
	}

	const auto p = static_cast<std::size_t>(order);
	return (p + 1) * (p + 3) / 4;
}

std::vector<BasisSpec::Term> BasisSpec::terms() const
{
	std::vector<Term> out;
	out.reserve(numTerms());

	for (std::size_t t = 0; t < n_tx; ++t) {
		for (int p = 1; p <= order; p += 2) {
			for (int q = 0; q <= p; ++q) {
				if (linear_only && !(p == 1 && q == 1)) {
					continue;
				}

				for (std::size_t m = 0; m < depth; ++m) {
					out.push_back({t, p, q, m});
				}
			}
		}
	}

	return out;
}

void BasisSpec::validate() const
{
	require(order >= 1 && order % 2 == 1, "BasisSpec: order must be an odd integer >= 1");
	require(depth >= 1, "BasisSpec: depth must be >= 1");
	require(n_tx >= 1, "BasisSpec: n_tx must be >= 1");
}

cplx basisPhi(cplx x, int p, int q)
{
	require(p >= 0 && q >= 0 && q <= p, "basisPhi: need 0 <= q <= p");
	cplx out{1.0, 0.0};
	const cplx xc = std::conj(x);

	for (int i = 0; i < q; ++i) {
		out *= x;
	}

	for (int i = 0; i < p - q; ++i) {
		out *= xc;
	}

	return out;
}

Eigen::MatrixXcd buildBasisMatrix(const MultiSequence &d, const BasisSpec &spec)
{
	spec.validate();
	require(d.size() == spec.n_tx, "buildBasisMatrix: stream count does not match spec.n_tx");
	requireAligned(d, "buildBasisMatrix");

	const std::size_t n = streamLength(d);
	require(n >= spec.depth, "buildBasisMatrix: streams shorter than depth");

	const std::size_t rows = n - spec.depth + 1;
	const auto terms = spec.terms();
	Eigen::MatrixXcd basis(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(terms.size()));

	// Phi(d[k], p, q) is the same for every m; compute each (tx, p, q) column
	// over the whole stream once and shift it.
	std::vector<cplx> column(n);
	Eigen::Index c = 0;

	while (c < basis.cols()) {
		const auto &term = terms[static_cast<std::size_t>(c)];

		for (std::size_t k = 0; k < n; ++k) {
			column[k] = basisPhi(d[term.tx][k], term.p, term.q);
		}

		for (std::size_t m = 0; m < spec.depth; ++m, ++c) {
			for (std::size_t r = 0; r < rows; ++r) {
				basis(static_cast<Eigen::Index>(r), c) = column[r + spec.depth - 1 - m];
			}
		}
	}

	return basis;
}

Eigen::MatrixXcd labelMatrix(const MultiSequence &s, std::size_t first, std::size_t end)
{
	requireAligned(s, "labelMatrix");
	require(first <= end && end <= streamLength(s), "labelMatrix: window out of range");

	Eigen::MatrixXcd y(static_cast<Eigen::Index>(end - first), static_cast<Eigen::Index>(s.size()));

	for (std::size_t a = 0; a < s.size(); ++a) {
		for (std::size_t n = first; n < end; ++n) {
			y(static_cast<Eigen::Index>(n - first), static_cast<Eigen::Index>(a)) = s[a][n];
		}
	}

	return y;
}

PolyCoefficients lsFit(const Eigen::MatrixXcd &basis, const Eigen::MatrixXcd &labels, const BasisSpec &spec,
		       const LsFitOptions &opts, LsFitReport *report)
{
	spec.validate();
	require(basis.cols() == static_cast<Eigen::Index>(spec.numTerms()), "lsFit: basis columns do not match spec");
	require(labels.rows() == basis.rows(), "lsFit: label rows do not match basis rows");
	require(basis.rows() >= basis.cols(), "lsFit: fewer samples than coefficients");
	require(opts.ridge >= 0.0, "lsFit: ridge must be non-negative");

	const Eigen::Index n = basis.cols();
	Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr;

	if (opts.ridge > 0.0) {
		Eigen::MatrixXcd aug(basis.rows() + n, n);
		aug.topRows(basis.rows()) = basis;
		aug.bottomRows(n) = std::sqrt(opts.ridge) * Eigen::MatrixXcd::Identity(n, n);
		qr.compute(aug);
	} else {
		qr.compute(basis);
	}

	const auto diag = qr.matrixR().diagonal().cwiseAbs();
	const double rmax = diag.size() > 0 ? diag(0) : 0.0;
	const double rmin = diag.size() > 0 ? diag(diag.size() - 1) : 0.0;
	const double condition = rmin > 0.0 ? rmax / rmin : std::numeric_limits<double>::infinity();

	qr.setThreshold(opts.rank_tolerance);

	if (qr.rank() < n) {
		throw SingularMatrixError("lsFit: basis is rank deficient (rank " + std::to_string(qr.rank()) + " of " +
						  std::to_string(n) + ", condition estimate " + std::to_string(condition) + ")",
					  condition);
	}

	PolyCoefficients out;
	out.spec = spec;

	if (opts.ridge > 0.0) {
		Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(basis.rows() + n, labels.cols());
		rhs.topRows(basis.rows()) = labels;
		out.omega = qr.solve(rhs);
	} else {
		out.omega = qr.solve(labels);
	}

	if (report) {
		const double norm_y = labels.norm();
		report->relative_residual = norm_y > 0.0 ? (basis * out.omega - labels).norm() / norm_y : 0.0;
		report->condition_estimate = condition;
	}

	return out;
}

MultiSequence reconstruct(const PolyCoefficients &coeffs, const MultiSequence &d)
{
	const auto &spec = coeffs.spec;
	require(coeffs.omega.rows() == static_cast<Eigen::Index>(spec.numTerms()), "reconstruct: coefficient count does not match spec");

	const std::size_t n = streamLength(d);
	MultiSequence out(coeffs.numRx(), ComplexSequence(n, cplx{}));

	if (n < spec.depth) {
		require(d.size() == spec.n_tx, "reconstruct: stream count does not match spec.n_tx");
		return out;
	}

	const Eigen::MatrixXcd y = buildBasisMatrix(d, spec) * coeffs.omega;

	for (std::size_t a = 0; a < out.size(); ++a) {
		for (Eigen::Index r = 0; r < y.rows(); ++r) {
			out[a][static_cast<std::size_t>(r) + spec.depth - 1] = y(r, static_cast<Eigen::Index>(a));
		}
	}

	return out;
}

PolyCoefficients polyFit(const MultiSequence &d, const MultiSequence &s, const BasisSpec &spec, std::size_t end,
			 const LsFitOptions &opts, LsFitReport *report)
{
	requireAligned(d, "polyFit");
	require(streamLength(s) == streamLength(d), "polyFit: d and s differ in length");
	require(end >= spec.depth && end <= streamLength(d), "polyFit: training window out of range");

	MultiSequence head;

	for (const auto &stream : d) {
		head.emplace_back(stream.begin(), stream.begin() + static_cast<std::ptrdiff_t>(end));
	}

	return lsFit(buildBasisMatrix(head, spec), labelMatrix(s, spec.depth - 1, end), spec, opts, report);
}

PolyCoefficients tcFit(const MultiSequence &d, const MultiSequence &s, std::size_t depth, std::size_t end,
		       const LsFitOptions &opts, LsFitReport *report)
{
	BasisSpec spec;
	spec.order = 1;
	spec.depth = depth;
	spec.n_tx = d.size();
	spec.linear_only = true;
	return polyFit(d, s, spec, end, opts, report);
}

std::uint64_t countParamsPc(std::uint64_t n_rx, std::uint64_t n_tx, std::uint64_t pa_memory, std::uint64_t taps, int order)
{
	require(order >= 1 && order % 2 == 1, "countParamsPc: order must be odd");
	const auto p = static_cast<std::uint64_t>(order);
	// (P+1)(P+3) is a multiple of 8 for odd P
	return n_rx * n_tx * (pa_memory + taps) * ((p + 1) * (p + 3) / 2);
}

std::uint64_t countComplexityPc(std::uint64_t n_rx, std::uint64_t n_tx, std::uint64_t pa_memory, std::uint64_t taps,
				int order)
{
	require(order >= 1 && order % 2 == 1 && order <= 41, "countComplexityPc: order must be odd and <= 41");

	const auto p = static_cast<u128>(order);
	u128 pow6 = 1;

	for (int i = 0; i < order + 2; ++i) {
		pow6 *= 6;
	}

	constexpr u128 den = 35 * 35;
	// bracket * 35^2 = (35P+33) 6^{P+2} + 12 + 35^2 (P+1)(P+3)/2
	const u128 bracket_num = (35 * p + 33) * pow6 + 12 + den * ((p + 1) * (p + 3) / 2);
	const u128 scale = static_cast<u128>(n_rx) * n_tx * (pa_memory + taps);
	const u128 num = scale * bracket_num;
	const u128 offset = 2 * static_cast<u128>(n_rx) * den;
	require(num >= offset, "countComplexityPc: negative complexity");

	// round half up once, on the exact rational
	return static_cast<std::uint64_t>((num - offset + den / 2) / den);
}

void savePolyCoefficients(const PolyCoefficients &c, const std::filesystem::path &path)
{
	container::Document doc;
	doc.kind = kPolyKind;
	doc.metadata = nlohmann::json{{"order", c.spec.order},
				      {"depth", c.spec.depth},
				      {"n_tx", c.spec.n_tx},
				      {"linear_only", c.spec.linear_only},
				      {"n_rx", c.numRx()}}
			       .dump();

	std::vector<double> flat;
	flat.reserve(static_cast<std::size_t>(2 * c.omega.size()));

	for (Eigen::Index a = 0; a < c.omega.cols(); ++a) {
		for (Eigen::Index t = 0; t < c.omega.rows(); ++t) {
			flat.push_back(c.omega(t, a).real());
			flat.push_back(c.omega(t, a).imag());
		}
	}

	doc.arrays["omega"] = std::move(flat);
	container::writeFileAtomic(path, container::encode(doc));
}

PolyCoefficients loadPolyCoefficients(const std::filesystem::path &path)
{
	using container::FormatError;

	const auto doc = container::decode(container::readFile(path), kPolyKind);
	PolyCoefficients c;
	std::size_t n_rx = 0;

	try {
		const auto meta = nlohmann::json::parse(doc.metadata);
		c.spec.order = meta.at("order").get<int>();
		c.spec.depth = meta.at("depth").get<std::size_t>();
		c.spec.n_tx = meta.at("n_tx").get<std::size_t>();
		c.spec.linear_only = meta.at("linear_only").get<bool>();
		n_rx = meta.at("n_rx").get<std::size_t>();
	} catch (const nlohmann::json::exception &e) {
		throw FormatError(FormatError::Kind::Schema, std::string("poly: bad metadata: ") + e.what());
	}

	const auto &flat = container::array(doc, "omega");
	const std::size_t terms = c.spec.numTerms();

	if (flat.size() != 2 * terms * n_rx) {
		throw FormatError(FormatError::Kind::Schema, "poly: coefficient array size does not match spec");
	}

	c.omega.resize(static_cast<Eigen::Index>(terms), static_cast<Eigen::Index>(n_rx));
	std::size_t k = 0;

	for (std::size_t a = 0; a < n_rx; ++a) {
		for (std::size_t t = 0; t < terms; ++t, k += 2) {
			c.omega(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(a)) = {flat[k], flat[k + 1]};
		}
	}

	return c;
}

} // namespace clic
