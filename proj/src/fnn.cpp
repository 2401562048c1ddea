#include "clic/fnn.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <nlohmann/json.hpp>

#include "clic/container.hpp"
#include "clic/rng.hpp"

namespace clic {

namespace {

constexpr const char *kFnnKind = "FNNM";

void requireShape(const FnnModel &model, const Eigen::MatrixXd &x)
{
	require(static_cast<std::size_t>(x.rows()) == model.numInputs(), "fnn: input dimension does not match model");
}

void appendRowMajor(std::vector<double> &out, const Eigen::MatrixXd &m)
{
	for (Eigen::Index r = 0; r < m.rows(); ++r) {
		for (Eigen::Index c = 0; c < m.cols(); ++c) {
			out.push_back(m(r, c));
		}
	}
}

} // namespace

FnnModel::FnnModel(std::size_t n_in, std::size_t n_h, std::size_t n_out)
	: w_h(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_h), static_cast<Eigen::Index>(n_in))),
	  b_h(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_h))),
	  w_out(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_out), static_cast<Eigen::Index>(n_h))),
	  b_out(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_out)))
{
	require(n_in >= 1 && n_h >= 1 && n_out >= 1, "FnnModel: layer widths must be >= 1");
}

std::size_t FnnModel::parameterCount() const
{
	return (numInputs() + 1) * numHidden() + (numHidden() + 1) * numOutputs();
}

FnnModel FnnModel::initialized(std::size_t n_in, std::size_t n_h, std::size_t n_out, std::uint64_t seed)
{
	FnnModel model(n_in, n_h, n_out);
	Rng rng(seed);

	auto fill = [&rng](Eigen::MatrixXd &w) {
		const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));

		// row-major draw order so the layout of Eigen storage does not matter
		for (Eigen::Index r = 0; r < w.rows(); ++r) {
			for (Eigen::Index c = 0; c < w.cols(); ++c) {
				w(r, c) = limit * (2.0 * rng.uniform() - 1.0);
			}
		}
	};

	fill(model.w_h);
	fill(model.w_out);
	return model;
}

bool FnnModel::operator==(const FnnModel &other) const
{
	auto same = [](const auto &a, const auto &b) {
		return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
	};

	return same(w_h, other.w_h) && same(b_h, other.b_h) && same(w_out, other.w_out) && same(b_out, other.b_out);
}

Eigen::VectorXd forward(const FnnModel &model, const Eigen::VectorXd &x)
{
	requireShape(model, x);
	const Eigen::VectorXd hidden = (model.w_h * x + model.b_h).cwiseMax(0.0);
	return model.w_out * hidden + model.b_out;
}

Eigen::MatrixXd forwardBatch(const FnnModel &model, const Eigen::MatrixXd &x)
{
	requireShape(model, x);
	Eigen::MatrixXd hidden = model.w_h * x;
	hidden.colwise() += model.b_h;
	hidden = hidden.cwiseMax(0.0);
	Eigen::MatrixXd y = model.w_out * hidden;
	y.colwise() += model.b_out;
	return y;
}

double mseLoss(const FnnModel &model, const Eigen::MatrixXd &x, const Eigen::MatrixXd &y)
{
	require(x.cols() == y.cols() && x.cols() > 0, "mseLoss: empty or mismatched batch");

	// chunked so large evaluation sets do not allocate a full hidden matrix
	constexpr Eigen::Index kChunk = 4096;
	double acc = 0.0;

	for (Eigen::Index c = 0; c < x.cols(); c += kChunk) {
		const Eigen::Index n = std::min(kChunk, x.cols() - c);
		acc += (forwardBatch(model, x.middleCols(c, n)) - y.middleCols(c, n)).squaredNorm();
	}

	return acc / static_cast<double>(x.cols());
}

LossAndGradients backward(const FnnModel &model, const Eigen::MatrixXd &x, const Eigen::MatrixXd &y)
{
	requireShape(model, x);
	require(x.cols() == y.cols() && x.cols() > 0, "backward: empty or mismatched batch");
	require(static_cast<std::size_t>(y.rows()) == model.numOutputs(), "backward: label dimension does not match model");

	const double inv_batch = 1.0 / static_cast<double>(x.cols());

	Eigen::MatrixXd pre = model.w_h * x;
	pre.colwise() += model.b_h;
	const Eigen::MatrixXd hidden = pre.cwiseMax(0.0);
	Eigen::MatrixXd out = model.w_out * hidden;
	out.colwise() += model.b_out;

	const Eigen::MatrixXd err = out - y;

	LossAndGradients r;
	r.loss = err.squaredNorm() * inv_batch;

	const Eigen::MatrixXd d_out = (2.0 * inv_batch) * err;
	r.grad.w_out.noalias() = d_out * hidden.transpose();
	r.grad.b_out = d_out.rowwise().sum();

	Eigen::MatrixXd d_pre = model.w_out.transpose() * d_out;
	d_pre = (pre.array() > 0.0).select(d_pre, 0.0);
	r.grad.w_h.noalias() = d_pre * x.transpose();
	r.grad.b_h = d_pre.rowwise().sum();
	return r;
}

AdamState AdamState::zeros(const FnnModel &like)
{
	AdamState s;
	s.m = FnnModel(like.numInputs(), like.numHidden(), like.numOutputs());
	s.v = s.m;
	return s;
}

void adamStep(FnnModel &model, AdamState &state, const FnnGradients &grad, const AdamConfig &cfg)
{
	state.t += 1;
	const double t = static_cast<double>(state.t);
	const double c1 = 1.0 - std::pow(cfg.beta1, t);
	const double c2 = 1.0 - std::pow(cfg.beta2, t);
	const double b1 = cfg.beta1;
	const double b2 = cfg.beta2;

	auto update = [&](auto param, auto m, auto v, auto g) {
		m = b1 * m + (1.0 - b1) * g;
		v = b2 * v + (1.0 - b2) * g.square();
		param -= cfg.learning_rate * (m / c1) / ((v / c2).sqrt() + cfg.epsilon);
	};

	update(model.w_h.array(), state.m.w_h.array(), state.v.w_h.array(), grad.w_h.array());
	update(model.b_h.array(), state.m.b_h.array(), state.v.b_h.array(), grad.b_h.array());
	update(model.w_out.array(), state.m.w_out.array(), state.v.w_out.array(), grad.w_out.array());
	update(model.b_out.array(), state.m.b_out.array(), state.v.b_out.array(), grad.b_out.array());
}

void TrainConfig::validate() const
{
	require(batch_size >= 1, "TrainConfig: batch_size must be >= 1");
	require(adam.learning_rate >= 0.0 && std::isfinite(adam.learning_rate), "TrainConfig: learning_rate must be >= 0");
	require(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0,
		"TrainConfig: Adam betas must be in [0, 1)");
	require(adam.epsilon > 0.0, "TrainConfig: epsilon must be positive");
}

TrainResult train(FnnModel model, const Eigen::MatrixXd &train_x, const Eigen::MatrixXd &train_y,
		  const Eigen::MatrixXd &test_x, const Eigen::MatrixXd &test_y, const TrainConfig &cfg,
		  const EpochObserver &observer)
{
	cfg.validate();
	require(train_x.cols() > 0, "train: empty training set");
	require(train_x.cols() == train_y.cols(), "train: inputs and labels differ in sample count");
	require(test_x.cols() == test_y.cols(), "train: test inputs and labels differ in sample count");
	requireShape(model, train_x);

	const bool have_test = test_x.cols() > 0;
	const auto n = static_cast<std::size_t>(train_x.cols());
	const auto batch = std::min(cfg.batch_size, n);

	Rng shuffle_rng(cfg.seed);
	std::vector<std::size_t> order(n);
	std::iota(order.begin(), order.end(), std::size_t{0});

	AdamState adam = AdamState::zeros(model);
	Eigen::MatrixXd xb(train_x.rows(), static_cast<Eigen::Index>(batch));
	Eigen::MatrixXd yb(train_y.rows(), static_cast<Eigen::Index>(batch));

	TrainResult result;
	result.model = model;
	double best = std::numeric_limits<double>::infinity();

	for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
		for (std::size_t i = n - 1; i > 0; --i) {
			std::swap(order[i], order[shuffle_rng.below(i + 1)]);
		}

		double loss_sum = 0.0;

		for (std::size_t start = 0; start < n; start += batch) {
			const std::size_t count = std::min(batch, n - start);

			if (static_cast<Eigen::Index>(count) != xb.cols()) {
				xb.resize(train_x.rows(), static_cast<Eigen::Index>(count));
				yb.resize(train_y.rows(), static_cast<Eigen::Index>(count));
			}

			for (std::size_t k = 0; k < count; ++k) {
				xb.col(static_cast<Eigen::Index>(k)) = train_x.col(static_cast<Eigen::Index>(order[start + k]));
				yb.col(static_cast<Eigen::Index>(k)) = train_y.col(static_cast<Eigen::Index>(order[start + k]));
			}

			const auto step = backward(model, xb, yb);
			adamStep(model, adam, step.grad, cfg.adam);
			loss_sum += step.loss * static_cast<double>(count);
		}

		EpochStats stats;
		stats.train_loss = loss_sum / static_cast<double>(n);
		stats.test_loss = have_test ? mseLoss(model, test_x, test_y) : std::numeric_limits<double>::quiet_NaN();
		result.history.push_back(stats);

		if (!cfg.keep_best || !have_test || stats.test_loss < best) {
			best = stats.test_loss;
			result.model = model;
			result.selected_epoch = epoch;
		}

		if (observer) {
			observer(epoch, model, stats);
		}
	}

	return result;
}

std::uint64_t countParamsNnc(std::uint64_t n_rx, std::uint64_t n_tx, std::uint64_t pa_memory, std::uint64_t taps,
			     std::uint64_t hidden)
{
	return hidden * (2 * (pa_memory + taps) * n_tx + 2 * n_rx + 1) + 2 * n_rx + 2;
}

std::uint64_t countComplexityNnc(std::uint64_t n_rx, std::uint64_t n_tx, std::uint64_t pa_memory, std::uint64_t taps,
				 std::uint64_t hidden, std::uint64_t c_sigma)
{
	return 2 * (2 * hidden + 1) * (n_tx * (pa_memory + taps) + n_rx) + c_sigma * hidden;
}

void saveFnn(const FnnArtifact &a, const std::filesystem::path &path)
{
	container::Document doc;
	doc.kind = kFnnKind;
	doc.metadata = nlohmann::json{{"n_in", a.model.numInputs()},
				      {"n_h", a.model.numHidden()},
				      {"n_out", a.model.numOutputs()}}
			       .dump();

	std::vector<double> params;
	params.reserve(a.model.parameterCount());
	appendRowMajor(params, a.model.w_h);
	appendRowMajor(params, a.model.b_h);
	appendRowMajor(params, a.model.w_out);
	appendRowMajor(params, a.model.b_out);
	doc.arrays["params"] = std::move(params);
	doc.arrays["norm"] = {a.m1, a.m2};
	container::writeFileAtomic(path, container::encode(doc));
}

FnnArtifact loadFnn(const std::filesystem::path &path)
{
	using container::FormatError;

	const auto doc = container::decode(container::readFile(path), kFnnKind);
	std::size_t n_in = 0, n_h = 0, n_out = 0;

	try {
		const auto meta = nlohmann::json::parse(doc.metadata);
		n_in = meta.at("n_in").get<std::size_t>();
		n_h = meta.at("n_h").get<std::size_t>();
		n_out = meta.at("n_out").get<std::size_t>();
	} catch (const nlohmann::json::exception &e) {
		throw FormatError(FormatError::Kind::Schema, std::string("fnn: bad metadata: ") + e.what());
	}

	FnnArtifact a;
	a.model = FnnModel(n_in, n_h, n_out);
	const auto &params = container::array(doc, "params");
	const auto &norm = container::array(doc, "norm");

	if (params.size() != a.model.parameterCount() || norm.size() != 2) {
		throw FormatError(FormatError::Kind::Schema, "fnn: parameter block size does not match layer widths");
	}

	std::size_t k = 0;

	auto take = [&](auto &m) {
		for (Eigen::Index r = 0; r < m.rows(); ++r) {
			for (Eigen::Index c = 0; c < m.cols(); ++c) {
				m(r, c) = params[k++];
			}
		}
	};

	take(a.model.w_h);
	take(a.model.b_h);
	take(a.model.w_out);
	take(a.model.b_out);
	a.m1 = norm[0];
	a.m2 = norm[1];
	return a;
}

} // namespace clic
