#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "clic/fnn.hpp"
#include "clic/rng.hpp"

using namespace clic;

namespace {

Eigen::MatrixXd randomMatrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed)
{
	Rng rng(seed);
	Eigen::MatrixXd m(r, c);

	for (Eigen::Index i = 0; i < m.size(); ++i) {
		m.data()[i] = rng.normal();
	}

	return m;
}

// Visits every parameter of a model as a mutable double.
template <typename F>
void eachParam(FnnModel &m, F f)
{
	for (Eigen::Index i = 0; i < m.w_h.size(); ++i) f(m.w_h.data()[i]);
	for (Eigen::Index i = 0; i < m.b_h.size(); ++i) f(m.b_h.data()[i]);
	for (Eigen::Index i = 0; i < m.w_out.size(); ++i) f(m.w_out.data()[i]);
	for (Eigen::Index i = 0; i < m.b_out.size(); ++i) f(m.b_out.data()[i]);
}

std::vector<double> flat(FnnModel m)
{
	std::vector<double> out;
	eachParam(m, [&](double &v) { out.push_back(v); });
	return out;
}

} // namespace

TEST(Fnn, ForwardByHand)
{
	FnnModel m(2, 2, 1);
	m.w_h << 1.0, -1.0, 0.5, 2.0;
	m.b_h << 0.0, -10.0;
	m.w_out << 3.0, 7.0;
	m.b_out << 0.25;

	Eigen::VectorXd x(2);
	x << 2.0, 1.0;
	// hidden: relu(1) = 1, relu(1 + 2 - 10) = 0
	EXPECT_DOUBLE_EQ(forward(m, x)(0), 3.25);
}

TEST(Fnn, MseIsMeanOfSquaredNorms)
{
	const auto m = FnnModel::initialized(3, 5, 2, 4);
	const auto x = randomMatrix(3, 7, 1);
	const auto y = randomMatrix(2, 7, 2);
	double acc = 0.0;

	for (Eigen::Index c = 0; c < 7; ++c) {
		acc += (forward(m, x.col(c)) - y.col(c)).squaredNorm();
	}

	EXPECT_NEAR(mseLoss(m, x, y), acc / 7.0, 1e-12);
	EXPECT_NEAR(backward(m, x, y).loss, acc / 7.0, 1e-12);
}

TEST(Fnn, GradientMatchesCentralDifferences)
{
	for (std::uint64_t seed = 1; seed <= 5; ++seed) {
		FnnModel m = FnnModel::initialized(4, 2, 2, seed);
		m.b_h = randomMatrix(2, 1, seed + 50).col(0) * 0.1;
		m.b_out = randomMatrix(2, 1, seed + 60).col(0);
		const auto x = randomMatrix(4, 6, seed + 10);
		const auto y = randomMatrix(2, 6, seed + 20);

		// stay away from ReLU kinks
		const Eigen::MatrixXd z = (m.w_h * x).colwise() + m.b_h;
		if ((z.array().abs() < 1e-3).any()) {
			continue;
		}

		const auto analytic = flat(backward(m, x, y).grad);
		std::vector<double> numeric;
		const double h = 1e-6;
		FnnModel probe = m;

		eachParam(probe, [&](double &v) {
			const double keep = v;
			v = keep + h;
			const double up = mseLoss(probe, x, y);
			v = keep - h;
			const double down = mseLoss(probe, x, y);
			v = keep;
			numeric.push_back((up - down) / (2.0 * h));
		});

		ASSERT_EQ(analytic.size(), numeric.size());

		for (std::size_t i = 0; i < analytic.size(); ++i) {
			const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-8});
			EXPECT_LT(std::abs(analytic[i] - numeric[i]) / denom, 1e-4) << "seed " << seed << " param " << i;
		}
	}
}

TEST(Fnn, GlorotInit)
{
	const auto m = FnnModel::initialized(72, 300, 8, 11);
	const double a1 = std::sqrt(6.0 / (72 + 300));
	const double a2 = std::sqrt(6.0 / (300 + 8));
	EXPECT_LE(m.w_h.cwiseAbs().maxCoeff(), a1);
	EXPECT_LE(m.w_out.cwiseAbs().maxCoeff(), a2);
	EXPECT_GT(m.w_h.cwiseAbs().maxCoeff(), 0.95 * a1);
	EXPECT_TRUE(m.b_h.isZero());
	EXPECT_TRUE(m.b_out.isZero());
	EXPECT_TRUE(m == FnnModel::initialized(72, 300, 8, 11));
	EXPECT_FALSE(m == FnnModel::initialized(72, 300, 8, 12));
}

TEST(Adam, FirstStepIsSignedLearningRate)
{
	FnnModel m(2, 2, 1);
	FnnGradients g(2, 2, 1);
	g.w_h << 0.5, -2.0, 1e-3, 0.0;
	g.b_h << 4.0, -4.0;
	g.w_out << 1.0, -1.0;
	g.b_out << 0.1;

	auto state = AdamState::zeros(m);
	const AdamConfig cfg;
	adamStep(m, state, g, cfg);
	EXPECT_EQ(state.t, 1u);

	const auto gp = flat(g);
	const auto mp = flat(m);

	for (std::size_t i = 0; i < gp.size(); ++i) {
		// m_hat = g, v_hat = g^2
		const double expected = -cfg.learning_rate * gp[i] / (std::abs(gp[i]) + cfg.epsilon);
		EXPECT_NEAR(mp[i], expected, 1e-18);
	}
}

TEST(Adam, SecondStepOracle)
{
	FnnModel m(1, 1, 1);
	FnnGradients g1(1, 1, 1), g2(1, 1, 1);
	g1.w_h << 1.0;
	g2.w_h << -3.0;
	auto state = AdamState::zeros(m);
	const AdamConfig cfg;
	adamStep(m, state, g1, cfg);
	adamStep(m, state, g2, cfg);

	double mm = 0.0, vv = 0.0, w = 0.0;

	for (int t = 1; t <= 2; ++t) {
		const double g = t == 1 ? 1.0 : -3.0;
		mm = 0.9 * mm + 0.1 * g;
		vv = 0.999 * vv + 0.001 * g * g;
		const double mh = mm / (1.0 - std::pow(0.9, t));
		const double vh = vv / (1.0 - std::pow(0.999, t));
		w -= 2e-4 * mh / (std::sqrt(vh) + 1e-8);
	}

	EXPECT_NEAR(m.w_h(0, 0), w, 1e-15);
}

TEST(Train, FitsLinearMapAndIsDeterministic)
{
	const Eigen::MatrixXd x = randomMatrix(3, 512, 1) * 0.5;
	Eigen::MatrixXd a(2, 3);
	a << 0.3, -0.2, 0.1, 0.05, 0.4, -0.3;
	const Eigen::MatrixXd y = a * x;
	const Eigen::MatrixXd tx = randomMatrix(3, 128, 2) * 0.5;
	const Eigen::MatrixXd ty = a * tx;

	TrainConfig cfg;
	cfg.epochs = 25;
	cfg.adam.learning_rate = 3e-3;
	cfg.seed = 7;

	const auto init = FnnModel::initialized(3, 16, 2, 3);
	const double before = mseLoss(init, tx, ty);
	const auto r1 = train(init, x, y, tx, ty, cfg);
	const auto r2 = train(init, x, y, tx, ty, cfg);

	ASSERT_EQ(r1.history.size(), 25u);
	EXPECT_LT(mseLoss(r1.model, tx, ty), 0.05 * before);
	EXPECT_TRUE(r1.model == r2.model);

	// keep-best selects the epoch with the lowest test loss
	std::size_t best = 0;
	for (std::size_t e = 1; e < r1.history.size(); ++e) {
		if (r1.history[e].test_loss < r1.history[best].test_loss) {
			best = e;
		}
	}
	EXPECT_EQ(r1.selected_epoch, best + 1);
	EXPECT_DOUBLE_EQ(mseLoss(r1.model, tx, ty), r1.history[best].test_loss);

	cfg.seed = 8;
	EXPECT_FALSE(train(init, x, y, tx, ty, cfg).model == r1.model);
}

TEST(Train, ObserverAndValidation)
{
	const auto x = randomMatrix(2, 40, 1);
	const auto y = randomMatrix(1, 40, 2);
	TrainConfig cfg;
	cfg.epochs = 3;
	std::vector<std::size_t> seen;
	train(FnnModel::initialized(2, 4, 1, 1), x, y, Eigen::MatrixXd(), Eigen::MatrixXd(), cfg,
	      [&](std::size_t e, const FnnModel &, const EpochStats &) { seen.push_back(e); });
	EXPECT_EQ(seen, (std::vector<std::size_t>{1, 2, 3}));

	cfg.batch_size = 0;
	EXPECT_THROW(cfg.validate(), InvalidArgument);
	cfg = {};
	EXPECT_THROW(train(FnnModel::initialized(3, 4, 1, 1), x, y, Eigen::MatrixXd(), Eigen::MatrixXd(), cfg),
		     InvalidArgument);
}

TEST(Counts, NncGoldenAndAffine)
{
	EXPECT_EQ(countParamsNnc(4, 4, 2, 7, 300), 24310u);
	EXPECT_EQ(countComplexityNnc(4, 4, 2, 7, 300), 48380u);

	for (std::uint64_t h = 50; h < 400; h += 50) {
		EXPECT_EQ(countParamsNnc(4, 4, 2, 7, h + 50) - countParamsNnc(4, 4, 2, 7, h),
			  countParamsNnc(4, 4, 2, 7, 100) - countParamsNnc(4, 4, 2, 7, 50));
		EXPECT_EQ(countComplexityNnc(4, 4, 2, 7, h + 50) - countComplexityNnc(4, 4, 2, 7, h),
			  countComplexityNnc(4, 4, 2, 7, 100) - countComplexityNnc(4, 4, 2, 7, 50));
	}

	// the reported count carries two more than the network's weight tally
	EXPECT_EQ(FnnModel(72, 300, 8).parameterCount() + 2, countParamsNnc(4, 4, 2, 7, 300));
}

TEST(FnnFile, RoundTrip)
{
	FnnArtifact a{FnnModel::initialized(6, 5, 2, 9), 0.37, 1.2e-3};
	a.model.b_h.setConstant(0.01);
	const auto path = std::filesystem::temp_directory_path() / "clic_test_fnn.clic";
	saveFnn(a, path);
	const auto b = loadFnn(path);
	EXPECT_TRUE(b.model == a.model);
	EXPECT_EQ(b.m1, a.m1);
	EXPECT_EQ(b.m2, a.m2);
}
