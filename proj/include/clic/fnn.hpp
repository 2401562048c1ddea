#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "clic/types.hpp"

namespace clic {

/// Three-layer network y = W_out relu(W_h x + b_h) + b_out.
///
/// Batches are column-major: one sample per column.
struct FnnModel {
	Eigen::MatrixXd w_h;
	Eigen::VectorXd b_h;
	Eigen::MatrixXd w_out;
	Eigen::VectorXd b_out;

	FnnModel() = default;
	/// All-zero parameters.
	FnnModel(std::size_t n_in, std::size_t n_h, std::size_t n_out);

	std::size_t numInputs() const { return static_cast<std::size_t>(w_h.cols()); }
	std::size_t numHidden() const { return static_cast<std::size_t>(w_h.rows()); }
	std::size_t numOutputs() const { return static_cast<std::size_t>(w_out.rows()); }

	/// (n_in + 1) n_h + (n_h + 1) n_out
	std::size_t parameterCount() const;

	/// Uniform in +-sqrt(6 / (fan_in + fan_out)) per layer, zero biases.
	static FnnModel initialized(std::size_t n_in, std::size_t n_h, std::size_t n_out, std::uint64_t seed);

	bool operator==(const FnnModel &other) const;
};

/// Same layout as the model it differentiates.
using FnnGradients = FnnModel;

Eigen::VectorXd forward(const FnnModel &model, const Eigen::VectorXd &x);
Eigen::MatrixXd forwardBatch(const FnnModel &model, const Eigen::MatrixXd &x);

/// Mean over samples of the squared L2 error, (1/B) sum_n ||y_n - yhat_n||^2.
double mseLoss(const FnnModel &model, const Eigen::MatrixXd &x, const Eigen::MatrixXd &y);

struct LossAndGradients {
	double loss{0.0};
	FnnGradients grad;
};

/// Loss and its gradient with respect to every parameter.
LossAndGradients backward(const FnnModel &model, const Eigen::MatrixXd &x, const Eigen::MatrixXd &y);

struct AdamConfig {
	double learning_rate{2e-4};
	double beta1{0.9};
	double beta2{0.999};
	double epsilon{1e-8};
};

struct AdamState {
	FnnModel m;
	FnnModel v;
	std::uint64_t t{0};

	static AdamState zeros(const FnnModel &like);
};

/// One bias-corrected Adam update, in place.
void adamStep(FnnModel &model, AdamState &state, const FnnGradients &grad, const AdamConfig &cfg);

struct TrainConfig {
	std::size_t batch_size{32};
	std::size_t epochs{60};
	AdamConfig adam{};
	std::uint64_t seed{1};
	/// Keep the parameters of the epoch with the lowest test loss.
	bool keep_best{true};

	void validate() const;
};

struct EpochStats {
	/// Mean of the mini-batch losses seen during the epoch.
	double train_loss{0.0};
	/// Loss of the end-of-epoch parameters on the test set.
	double test_loss{0.0};
};

struct TrainResult {
	FnnModel model;
	std::vector<EpochStats> history;
	/// 1-based epoch whose parameters were returned.
	std::size_t selected_epoch{0};
};

/// Called after every epoch with the 1-based epoch number.
using EpochObserver = std::function<void(std::size_t, const FnnModel &, const EpochStats &)>;

/// Mini-batch Adam on the MSE loss. Every epoch visits the training set
/// once in an order drawn from cfg.seed. test_x/test_y may be empty, in
/// which case test_loss is NaN and the last epoch is kept.
TrainResult train(FnnModel model, const Eigen::MatrixXd &train_x, const Eigen::MatrixXd &train_y,
		  const Eigen::MatrixXd &test_x, const Eigen::MatrixXd &test_y, const TrainConfig &cfg,
		  const EpochObserver &observer = {});

/// N_h [2 (M+L) Na + 2 N0 + 1] + 2 N0 + 2
std::uint64_t countParamsNnc(std::uint64_t n_rx, std::uint64_t n_tx, std::uint64_t pa_memory, std::uint64_t taps,
			     std::uint64_t hidden);

/// 2 (2 N_h + 1) [Na (M+L) + N0] + c_sigma N_h
std::uint64_t countComplexityNnc(std::uint64_t n_rx, std::uint64_t n_tx, std::uint64_t pa_memory, std::uint64_t taps,
				 std::uint64_t hidden, std::uint64_t c_sigma = 1);

/// Network plus its input/label scales.
struct FnnArtifact {
	FnnModel model;
	double m1{1.0};
	double m2{1.0};
};

void saveFnn(const FnnArtifact &a, const std::filesystem::path &path);
FnnArtifact loadFnn(const std::filesystem::path &path);

} // namespace clic
