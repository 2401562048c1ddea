#include "clic/harness.hpp"

#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>

#include "clic/rng.hpp"

namespace clic {

namespace {

void requireWindow(const MultiSequence &s, const MultiSequence &s_hat, std::size_t first, std::size_t end)
{
	require(s.size() == s_hat.size() && !s.empty(), "cDb: antenna counts differ");
	requireAligned(s, "cDb");
	requireAligned(s_hat, "cDb");
	require(streamLength(s) == streamLength(s_hat), "cDb: stream lengths differ");
	require(first < end && end <= streamLength(s), "cDb: window out of range");
}

MultiSequence subtract(const MultiSequence &a, const MultiSequence &b)
{
	MultiSequence out = a;

	for (std::size_t i = 0; i < out.size(); ++i) {
		for (std::size_t n = 0; n < out[i].size(); ++n) {
			out[i][n] -= b[i][n];
		}
	}

	return out;
}

MultiSequence add(const MultiSequence &a, const MultiSequence &b)
{
	MultiSequence out = a;

	for (std::size_t i = 0; i < out.size(); ++i) {
		for (std::size_t n = 0; n < out[i].size(); ++n) {
			out[i][n] += b[i][n];
		}
	}

	return out;
}

void evaluate(CancellerResult &r, const CliDataset &ds)
{
	const std::size_t n = ds.size();
	r.cancellation = cDb(ds.s, r.s_hat, ds.split_index, n);
	r.rx_power_dbm = windowPowerDbm(ds.s, ds.split_index, n);
	r.residual_power_dbm = residualPowerDbm(ds.s, r.s_hat, ds.split_index, n);
}

void requireSplit(const CliDataset &ds, const CancellerDims &dims)
{
	require(ds.numTx() >= 1 && ds.numRx() >= 1, "canceller: dataset has no streams");
	require(ds.split_index >= dims.depth() && ds.split_index < ds.size(),
		"canceller: train/test split leaves an empty partition");
}

/// Network inputs, one normalized window per column, for n = depth-1 .. N-1.
Eigen::MatrixXd networkInputs(const CliDataset &ds, std::size_t depth)
{
	Eigen::MatrixXd x = buildRegressors(ds.d, depth).transpose();
	x /= ds.m1;
	return x;
}

/// Trains the FNN on labels (one complex stream per rx antenna, scaled by
/// label_scale) and returns the denormalized reconstruction.
MultiSequence fitNetwork(const CliDataset &ds, const CancellerDims &dims, const CancellerOptions &opts,
			 const MultiSequence &labels, double label_scale, CancellerResult &r)
{
	const std::size_t depth = dims.depth();
	const Eigen::MatrixXd x = networkInputs(ds, depth);
	Eigen::MatrixXd y = labelRows(labels, depth - 1).transpose();
	y /= label_scale;

	const auto n_train = static_cast<Eigen::Index>(ds.split_index - (depth - 1));
	const Eigen::Index n_test = x.cols() - n_train;

	TrainConfig cfg = opts.train;
	cfg.seed = deriveSeed(opts.seed, SeedPurpose::Shuffle);
	FnnModel init = FnnModel::initialized(static_cast<std::size_t>(x.rows()), opts.hidden,
					      static_cast<std::size_t>(y.rows()), deriveSeed(opts.seed, SeedPurpose::Init));

	auto trained = train(std::move(init), x.leftCols(n_train), y.leftCols(n_train), x.rightCols(n_test),
			     y.rightCols(n_test), cfg);

	// test loss is the normalized residual energy per sample, so every
	// epoch's C_dB follows from it without another pass
	const double signal = cDb(ds.s, ds.s, ds.split_index, ds.size()).signal_energy;

	for (const auto &h : trained.history) {
		const double residual = label_scale * label_scale * static_cast<double>(n_test) * h.test_loss;
		r.epoch_c_db.push_back(10.0 * std::log10(signal / residual));
	}

	const Eigen::MatrixXd out = forwardBatch(trained.model, x) * label_scale;
	MultiSequence s_hat(ds.numRx(), ComplexSequence(ds.size(), cplx{}));

	for (std::size_t a = 0; a < s_hat.size(); ++a) {
		for (Eigen::Index c = 0; c < out.cols(); ++c) {
			s_hat[a][static_cast<std::size_t>(c) + depth - 1] = {out(static_cast<Eigen::Index>(2 * a), c),
									     out(static_cast<Eigen::Index>(2 * a + 1), c)};
		}
	}

	r.history = std::move(trained.history);
	r.epochs_trained = r.history.size();
	r.selected_epoch = trained.selected_epoch;
	r.network = FnnArtifact{std::move(trained.model), ds.m1, label_scale};
	return s_hat;
}

} // namespace

Cancellation cDb(const MultiSequence &s, const MultiSequence &s_hat, std::size_t first, std::size_t end)
{
	requireWindow(s, s_hat, first, end);
	Cancellation c;

	for (std::size_t a = 0; a < s.size(); ++a) {
		for (std::size_t n = first; n < end; ++n) {
			c.signal_energy += std::norm(s[a][n]);
			c.residual_energy += std::norm(s[a][n] - s_hat[a][n]);
		}
	}

	require(c.signal_energy > 0.0, "cDb: signal energy is zero");

	if (c.residual_energy > 0.0) {
		const double db = 10.0 * std::log10(c.signal_energy / c.residual_energy);

		if (db <= kMaxMeasurableDb) {
			c.db = db;
		}
	}

	return c;
}

Cancellation cDb(const MultiSequence &s, const MultiSequence &s_hat)
{
	return cDb(s, s_hat, 0, streamLength(s));
}

double windowPowerDbm(const MultiSequence &s, std::size_t first, std::size_t end)
{
	require(first < end && end <= streamLength(s), "windowPowerDbm: window out of range");
	MultiSequence window;

	for (const auto &stream : s) {
		window.emplace_back(stream.begin() + static_cast<std::ptrdiff_t>(first),
				    stream.begin() + static_cast<std::ptrdiff_t>(end));
	}

	return measurePowerDbm(window);
}

double residualPowerDbm(const MultiSequence &s, const MultiSequence &s_hat, std::size_t first, std::size_t end)
{
	requireWindow(s, s_hat, first, end);
	return windowPowerDbm(subtract(s, s_hat), first, end);
}

std::uint64_t countParamsTc(std::uint64_t n_rx, std::uint64_t n_tx, std::uint64_t pa_memory, std::uint64_t taps)
{
	return 2 * n_rx * n_tx * (pa_memory + taps);
}

std::uint64_t countComplexityTc(std::uint64_t n_rx, std::uint64_t n_tx, std::uint64_t pa_memory, std::uint64_t taps)
{
	return 8 * n_rx * n_tx * (pa_memory + taps) - 2 * n_rx;
}

std::uint64_t countParamsHc(std::uint64_t n_rx, std::uint64_t n_tx, std::uint64_t pa_memory, std::uint64_t taps,
			    std::uint64_t hidden)
{
	return countParamsTc(n_rx, n_tx, pa_memory, taps) + countParamsNnc(n_rx, n_tx, pa_memory, taps, hidden);
}

std::uint64_t countComplexityHc(std::uint64_t n_rx, std::uint64_t n_tx, std::uint64_t pa_memory, std::uint64_t taps,
				std::uint64_t hidden)
{
	return countComplexityTc(n_rx, n_tx, pa_memory, taps) + countComplexityNnc(n_rx, n_tx, pa_memory, taps, hidden);
}

std::string toString(CancellerKind kind)
{
	switch (kind) {
	case CancellerKind::Tc: return "tc";
	case CancellerKind::Pc: return "pc";
	case CancellerKind::Nnc: return "nnc";
	case CancellerKind::Hc: return "hc";
	}

	return "?";
}

CancellerKind cancellerFromString(const std::string &id)
{
	if (id == "tc") return CancellerKind::Tc;
	if (id == "pc") return CancellerKind::Pc;
	if (id == "nnc") return CancellerKind::Nnc;
	if (id == "hc") return CancellerKind::Hc;
	throw InvalidArgument("unknown canceller '" + id + "' (expected tc, pc, nnc or hc)");
}

CancellerDims dimsFromDataset(const CliDataset &ds)
{
	try {
		const auto meta = nlohmann::json::parse(ds.meta);
		const auto cfg = scenarioFromJson(meta.at("scenario"));
		return {cfg.paMemory(), cfg.channel_taps};
	} catch (const nlohmann::json::exception &e) {
		throw InvalidArgument(std::string("dataset metadata lacks a scenario config: ") + e.what());
	}
}

CancellerResult runTc(const CliDataset &ds, const CancellerDims &dims)
{
	requireSplit(ds, dims);
	CancellerResult r;
	r.kind = CancellerKind::Tc;
	r.order = 1;
	r.coefficients = tcFit(ds.d, ds.s, dims.depth(), ds.split_index);
	r.s_hat = reconstruct(*r.coefficients, ds.d);
	r.n_params = countParamsTc(ds.numRx(), ds.numTx(), dims.pa_memory, dims.channel_taps);
	r.complexity = countComplexityTc(ds.numRx(), ds.numTx(), dims.pa_memory, dims.channel_taps);
	evaluate(r, ds);
	return r;
}

CancellerResult runPc(const CliDataset &ds, const CancellerDims &dims, int order, const LsFitOptions &ls)
{
	requireSplit(ds, dims);
	CancellerResult r;
	r.kind = CancellerKind::Pc;
	r.order = order;

	BasisSpec spec;
	spec.order = order;
	spec.depth = dims.depth();
	spec.n_tx = ds.numTx();
	r.coefficients = polyFit(ds.d, ds.s, spec, ds.split_index, ls);
	r.s_hat = reconstruct(*r.coefficients, ds.d);
	r.n_params = countParamsPc(ds.numRx(), ds.numTx(), dims.pa_memory, dims.channel_taps, order);
	r.complexity = countComplexityPc(ds.numRx(), ds.numTx(), dims.pa_memory, dims.channel_taps, order);
	evaluate(r, ds);
	return r;
}

CancellerResult runNnc(const CliDataset &ds, const CancellerDims &dims, const CancellerOptions &opts)
{
	requireSplit(ds, dims);
	require(ds.m1 > 0.0 && ds.m2 > 0.0, "runNnc: dataset normalization constants must be positive");

	CancellerResult r;
	r.kind = CancellerKind::Nnc;
	r.hidden = opts.hidden;
	r.seed = opts.seed;
	r.s_hat = fitNetwork(ds, dims, opts, ds.s, ds.m2, r);
	r.n_params = countParamsNnc(ds.numRx(), ds.numTx(), dims.pa_memory, dims.channel_taps, opts.hidden);
	r.complexity = countComplexityNnc(ds.numRx(), ds.numTx(), dims.pa_memory, dims.channel_taps, opts.hidden);
	evaluate(r, ds);
	return r;
}

CancellerResult runHc(const CliDataset &ds, const CancellerDims &dims, const CancellerOptions &opts)
{
	requireSplit(ds, dims);

	const auto linear = tcFit(ds.d, ds.s, dims.depth(), ds.split_index);
	const MultiSequence s_lin = reconstruct(linear, ds.d);
	MultiSequence residual = subtract(ds.s, s_lin);

	// pre-history samples have no linear estimate and never enter training
	for (auto &stream : residual) {
		std::fill(stream.begin(), stream.begin() + static_cast<std::ptrdiff_t>(dims.depth() - 1), cplx{});
	}

	const double m2_hc = maxAbs(residual, ds.split_index);
	require(m2_hc > 0.0, "runHc: linear stage leaves no residual to learn");

	CancellerResult r;
	r.kind = CancellerKind::Hc;
	r.hidden = opts.hidden;
	r.seed = opts.seed;
	r.coefficients = linear;
	r.s_hat = add(s_lin, fitNetwork(ds, dims, opts, residual, m2_hc, r));
	r.n_params = countParamsHc(ds.numRx(), ds.numTx(), dims.pa_memory, dims.channel_taps, opts.hidden);
	r.complexity = countComplexityHc(ds.numRx(), ds.numTx(), dims.pa_memory, dims.channel_taps, opts.hidden);
	evaluate(r, ds);
	return r;
}

CancellerResult runCanceller(CancellerKind kind, const CliDataset &ds, const CancellerDims &dims,
			     const CancellerOptions &opts)
{
	switch (kind) {
	case CancellerKind::Tc: return runTc(ds, dims);
	case CancellerKind::Pc: return runPc(ds, dims, opts.order, opts.ls);
	case CancellerKind::Nnc: return runNnc(ds, dims, opts);
	case CancellerKind::Hc: return runHc(ds, dims, opts);
	}

	throw InvalidArgument("runCanceller: unknown kind");
}

SweepAxis sweepAxisFromString(const std::string &axis)
{
	if (axis == "P" || axis == "order") return SweepAxis::Order;
	if (axis == "Nh" || axis == "hidden") return SweepAxis::Hidden;
	throw InvalidArgument("unknown sweep axis '" + axis + "' (expected P or Nh)");
}

std::vector<CancellerResult> sweep(const CliDataset *ds, const SweepShape &shape, SweepAxis axis,
				   const std::vector<std::int64_t> &values, const CancellerOptions &opts)
{
	const auto n_rx = ds ? ds->numRx() : shape.n_rx;
	const auto n_tx = ds ? ds->numTx() : shape.n_tx;
	const auto &dims = shape.dims;
	std::vector<CancellerResult> rows;

	for (const auto value : values) {
		if (axis == SweepAxis::Order) {
			require(value >= 1 && value % 2 == 1, "sweep: order values must be odd and >= 1");
			const int order = static_cast<int>(value);

			if (ds) {
				rows.push_back(runPc(*ds, dims, order, opts.ls));
			} else {
				CancellerResult r;
				r.kind = CancellerKind::Pc;
				r.order = order;
				r.n_params = countParamsPc(n_rx, n_tx, dims.pa_memory, dims.channel_taps, order);
				r.complexity = countComplexityPc(n_rx, n_tx, dims.pa_memory, dims.channel_taps, order);
				rows.push_back(std::move(r));
			}

			continue;
		}

		require(value >= 1, "sweep: hidden sizes must be >= 1");
		CancellerOptions o = opts;
		o.hidden = static_cast<std::size_t>(value);

		for (const auto kind : {CancellerKind::Nnc, CancellerKind::Hc}) {
			if (ds) {
				rows.push_back(runCanceller(kind, *ds, dims, o));
				continue;
			}

			CancellerResult r;
			r.kind = kind;
			r.hidden = o.hidden;
			r.seed = o.seed;

			if (kind == CancellerKind::Nnc) {
				r.n_params = countParamsNnc(n_rx, n_tx, dims.pa_memory, dims.channel_taps, o.hidden);
				r.complexity = countComplexityNnc(n_rx, n_tx, dims.pa_memory, dims.channel_taps, o.hidden);
			} else {
				r.n_params = countParamsHc(n_rx, n_tx, dims.pa_memory, dims.channel_taps, o.hidden);
				r.complexity = countComplexityHc(n_rx, n_tx, dims.pa_memory, dims.channel_taps, o.hidden);
			}

			rows.push_back(std::move(r));
		}
	}

	return rows;
}

} // namespace clic
