#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <tuple>

#include "clic/harness.hpp"
#include "clic/poly_canceller.hpp"
#include "clic/rng.hpp"
#include "clic/scenario.hpp"

using namespace clic;

namespace {

MultiSequence randomStreams(std::size_t k, std::size_t n, std::uint64_t seed)
{
	Rng rng(seed);
	MultiSequence x(k, ComplexSequence(n));

	for (auto &s : x) {
		for (auto &v : s) {
			v = rng.complexNormal(1.0);
		}
	}

	return x;
}

// c_PC in floating point, summed per antenna pair; fine for the small orders used here
long double oracleComplexityPc(int n0, int na, int m, int l, int p)
{
	const long double per_term = ((35.0L * p + 33.0L) * std::pow(6.0L, p + 2) + 12.0L) / 1225.0L;
	long double total = 0.0L;

	for (int r = 0; r < n0; ++r) {
		for (int t = 0; t < na; ++t) {
			total += (m + l) * (per_term + (p + 1) * (p + 3) / 2.0L);
		}
		total -= 2.0L;
	}

	return total;
}

} // namespace

TEST(Basis, PhiValues)
{
	const cplx x{0.6, -1.3};
	EXPECT_EQ(basisPhi(x, 1, 1), x);
	EXPECT_EQ(basisPhi(x, 1, 0), std::conj(x));
	EXPECT_NEAR(std::abs(basisPhi(x, 3, 2) - x * std::norm(x)), 0.0, 1e-14);
	EXPECT_NEAR(std::abs(basisPhi(x, 3, 0) - std::pow(std::conj(x), 3)), 0.0, 1e-14);
	EXPECT_NEAR(std::abs(basisPhi(x, 5, 3) - x * std::norm(x) * std::norm(x)), 0.0, 1e-13);
}

TEST(Basis, TermsEnumerateEveryPairOnce)
{
	for (int order : {1, 3, 5, 7}) {
		BasisSpec spec{order, 4, 2, false};
		std::set<std::tuple<std::size_t, int, int, std::size_t>> seen;

		for (const auto &t : spec.terms()) {
			EXPECT_EQ(t.p % 2, 1);
			EXPECT_GE(t.q, 0);
			EXPECT_LE(t.q, t.p);
			EXPECT_LE(t.p, order);
			seen.insert({t.tx, t.p, t.q, t.m});
		}

		// brute-force count of odd p and 0 <= q <= p
		std::size_t pairs = 0;

		for (int p = 1; p <= order; p += 2) {
			pairs += static_cast<std::size_t>(p + 1);
		}

		EXPECT_EQ(spec.pairsPerTap(), pairs);
		EXPECT_EQ(seen.size(), spec.numTerms());
		EXPECT_EQ(spec.numTerms(), 2 * 4 * pairs);
	}

	BasisSpec linear{3, 4, 2, true};
	EXPECT_EQ(linear.numTerms(), 8u);

	EXPECT_THROW((BasisSpec{2, 4, 2, false}.validate()), InvalidArgument);
	EXPECT_THROW((BasisSpec{3, 0, 2, false}.validate()), InvalidArgument);
}

TEST(Basis, ColumnCountForDefaultShape)
{
	EXPECT_EQ((BasisSpec{3, 9, 4, false}.numTerms()), 216u);
	const auto d = randomStreams(4, 50, 1);
	const auto b = buildBasisMatrix(d, BasisSpec{3, 9, 4, false});
	EXPECT_EQ(b.rows(), 42);
	EXPECT_EQ(b.cols(), 216);
}

TEST(Counts, Golden)
{
	EXPECT_EQ(countParamsPc(4, 4, 2, 7, 3), 1728u);
	EXPECT_EQ(countComplexityPc(4, 4, 2, 7, 3), 127864u);
}

TEST(Counts, MatchOracles)
{
	for (int n0 = 1; n0 <= 4; ++n0) {
		for (int na = 1; na <= 4; ++na) {
			for (int p = 1; p <= 7; p += 2) {
				const auto u = [](int v) { return static_cast<std::uint64_t>(v); };
				EXPECT_EQ(countParamsPc(u(n0), u(na), 2, 7, p), (BasisSpec{p, 9, u(na), false}.numTerms() * 2 * u(n0)));
				EXPECT_EQ(countComplexityPc(u(n0), u(na), 2, 7, p),
					  static_cast<std::uint64_t>(std::llround(oracleComplexityPc(n0, na, 2, 7, p))));
			}
		}
	}
}

TEST(Counts, LinearInOrderAndExponentialComplexity)
{
	const auto n1 = countParamsPc(4, 4, 2, 7, 1);
	const auto n3 = countParamsPc(4, 4, 2, 7, 3);
	const auto n5 = countParamsPc(4, 4, 2, 7, 5);
	const auto n7 = countParamsPc(4, 4, 2, 7, 7);
	// pairs per tap grows by P+2 between successive odd orders, so second differences are constant
	EXPECT_EQ((n5 - n3) - (n3 - n1), (n7 - n5) - (n5 - n3));

	for (int p = 1; p <= 5; p += 2) {
		EXPECT_GT(static_cast<double>(countComplexityPc(4, 4, 2, 7, p + 2)),
			  6.0 * static_cast<double>(countComplexityPc(4, 4, 2, 7, p)));
	}

	EXPECT_THROW(countComplexityPc(4, 4, 2, 7, 4), InvalidArgument);
}

TEST(LsFit, RecoversPlantedCoefficients)
{
	const BasisSpec spec{3, 3, 2, false};
	const auto d = randomStreams(2, 400, 2);
	const auto basis = buildBasisMatrix(d, spec);
	Rng rng(3);
	Eigen::MatrixXcd truth(static_cast<Eigen::Index>(spec.numTerms()), 3);

	for (Eigen::Index i = 0; i < truth.size(); ++i) {
		truth.data()[i] = rng.complexNormal(1.0);
	}

	LsFitReport report;
	const auto fit = lsFit(basis, basis * truth, spec, {}, &report);
	EXPECT_LT((fit.omega - truth).norm() / truth.norm(), 1e-10);
	EXPECT_LT(report.relative_residual, 1e-12);
	EXPECT_GE(report.condition_estimate, 1.0);
}

TEST(LsFit, ErrorPaths)
{
	const BasisSpec spec{1, 2, 1, true};
	Eigen::MatrixXcd b(1, 2);
	b << cplx{1.0}, cplx{2.0};
	EXPECT_THROW(lsFit(b, Eigen::MatrixXcd::Ones(1, 1), spec), InvalidArgument);

	// duplicated column
	Eigen::MatrixXcd dup(5, 2);
	for (int r = 0; r < 5; ++r) {
		dup(r, 0) = dup(r, 1) = cplx{static_cast<double>(r + 1), 0.5};
	}
	EXPECT_THROW(lsFit(dup, Eigen::MatrixXcd::Ones(5, 1), spec), SingularMatrixError);

	// ridge makes it solvable and shrinks toward zero
	const auto ridged = lsFit(dup, Eigen::MatrixXcd::Ones(5, 1), spec, LsFitOptions{1e-3, 1e-12});
	EXPECT_TRUE(ridged.omega.allFinite());
	EXPECT_NEAR(std::abs(ridged.omega(0, 0) - ridged.omega(1, 0)), 0.0, 1e-9);
}

TEST(Reconstruct, TransientZeroAndMatchesBasis)
{
	const BasisSpec spec{3, 4, 2, false};
	const auto d = randomStreams(2, 60, 4);
	Rng rng(5);
	PolyCoefficients c{spec, Eigen::MatrixXcd(static_cast<Eigen::Index>(spec.numTerms()), 2)};

	for (Eigen::Index i = 0; i < c.omega.size(); ++i) {
		c.omega.data()[i] = rng.complexNormal(1.0);
	}

	const auto s = reconstruct(c, d);
	const Eigen::MatrixXcd direct = buildBasisMatrix(d, spec) * c.omega;

	for (std::size_t r = 0; r < 2; ++r) {
		for (std::size_t n = 0; n < 3; ++n) {
			EXPECT_EQ(s[r][n], cplx{});
		}

		for (std::size_t n = 3; n < 60; ++n) {
			EXPECT_NEAR(std::abs(s[r][n] - direct(static_cast<Eigen::Index>(n - 3), static_cast<Eigen::Index>(r))),
				    0.0, 1e-12);
		}
	}
}

TEST(TcFit, RecoversFirTaps)
{
	ScenarioConfig cfg;
	cfg.n_rx = 2;
	cfg.n_tx = 3;
	cfg.n_samples = 3000;
	cfg.iq = IqImbalance::ideal();
	cfg.pa = PaModel::identity();
	cfg.noise_enabled = false;
	cfg.adc_enabled = false;

	GenerationTrace trace;
	const auto ds = generateDataset(cfg, &trace);
	const auto fit = tcFit(ds.d, ds.s, cfg.depth(), ds.split_index);
	ASSERT_EQ(cfg.depth(), 7u);

	double err = 0.0, ref = 0.0;

	for (std::size_t r = 0; r < 2; ++r) {
		for (std::size_t t = 0; t < 3; ++t) {
			for (std::size_t l = 0; l < 7; ++l) {
				const cplx h = trace.channel.tap(r, t, l);
				const cplx w = fit.omega(static_cast<Eigen::Index>(t * 7 + l), static_cast<Eigen::Index>(r));
				err += std::norm(w - h);
				ref += std::norm(h);
			}
		}
	}

	EXPECT_LT(std::sqrt(err / ref), 1e-6);
}

TEST(PolyFit, SpansComposedChain)
{
	ScenarioConfig cfg;
	cfg.n_rx = 2;
	cfg.n_tx = 2;
	cfg.n_samples = 3000;
	cfg.noise_enabled = false;
	cfg.adc_enabled = false;

	const auto ds = generateDataset(cfg);
	LsFitReport report;
	const auto fit = polyFit(ds.d, ds.s, BasisSpec{3, cfg.depth(), 2, false}, ds.split_index, {}, &report);
	EXPECT_LE(report.relative_residual, 1e-8);

	const auto c = cDb(ds.s, reconstruct(fit, ds.d), ds.split_index, ds.size());
	ASSERT_TRUE(c.db.has_value() || c.aboveRange());
	if (c.db) {
		EXPECT_GE(*c.db, 80.0);
	}

	// an under-order basis cannot span it
	const auto lin = tcFit(ds.d, ds.s, cfg.depth(), ds.split_index);
	EXPECT_LT(*cDb(ds.s, reconstruct(lin, ds.d), ds.split_index, ds.size()).db, 40.0);
}

TEST(PolyFile, RoundTrip)
{
	const BasisSpec spec{3, 2, 2, false};
	Rng rng(6);
	PolyCoefficients c{spec, Eigen::MatrixXcd(static_cast<Eigen::Index>(spec.numTerms()), 3)};

	for (Eigen::Index i = 0; i < c.omega.size(); ++i) {
		c.omega.data()[i] = rng.complexNormal(1.0);
	}

	const auto path = std::filesystem::temp_directory_path() / "clic_test_poly.clic";
	savePolyCoefficients(c, path);
	const auto back = loadPolyCoefficients(path);
	EXPECT_EQ(back.spec, spec);
	EXPECT_EQ(back.omega, c.omega);
}
