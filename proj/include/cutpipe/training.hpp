#pragma once

// Binary classifier y = <Z...Z> of ZFeatureMap(x) followed by
// RealAmplitudes(theta), trained by full-batch gradient descent on the MSE
// against +/-1 labels. Every circuit evaluation goes through the estimator.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cutpipe/dataset.hpp"
#include "cutpipe/estimator.hpp"

namespace cutpipe {

struct ModelConfig {
    int feature_reps = 1;
    int ansatz_reps = 1;
};

std::size_t parameter_count(int n_qubits, const ModelConfig& model);

ParamCircuit model_circuit(std::span<const double> x, std::span<const double> theta, const ModelConfig& model);

double forward(std::span<const double> x, std::span<const double> theta, Estimator& est,
               const ModelConfig& model, Phase phase = Phase::Eval);

double mse_loss(std::span<const double> predictions, std::span<const double> labels);

double loss(std::span<const double> theta, std::span<const Sample> batch, Estimator& est, const ModelConfig& model);

// d<O>/d(param) for every slot of `role`, by the +/- pi/2 shift rule on the
// bound gate angle, times the slot scale. 2 queries per slot.
std::vector<double> shift_rule_gradient(std::span<const double> x, std::span<const double> theta,
                                        ParamRole role, Estimator& est, const ModelConfig& model, Phase phase);

struct LossAndGradient {
    double loss = 0.0;
    std::vector<double> gradient;
    std::vector<double> predictions;
};

// batch * (1 + 2 |theta|) estimator queries.
LossAndGradient loss_and_gradient(std::span<const double> theta, std::span<const Sample> batch,
                                  Estimator& est, const ModelConfig& model);

std::vector<double> parameter_shift_grad(std::span<const double> theta, std::span<const Sample> batch,
                                         Estimator& est, const ModelConfig& model);

struct TrainConfig {
    std::size_t maxiter = 60;
    double learning_rate = 0.1;
    std::uint64_t seed = 0;
    ModelConfig model;
};

struct TrainResult {
    std::vector<double> params;
    std::vector<double> loss_trace;
    std::vector<std::vector<double>> param_trace;  // after each step
    double train_time_s = 0.0;
    double test_accuracy = 0.0;
    bool failed = false;
    std::string error;
};

std::vector<double> initial_params(int n_qubits, const ModelConfig& model, std::uint64_t seed);

// Never throws estimator errors: a failed run comes back with `failed` set
// and the partial traces.
TrainResult train(const Dataset& dataset, const TrainConfig& cfg, Estimator& est);

// sign(y_hat) == y with sign(0) = +1.
double accuracy_from_predictions(std::span<const double> predictions, std::span<const Sample> samples);

double accuracy(std::span<const double> theta, std::span<const Sample> samples, Estimator& est,
                const ModelConfig& model, Phase phase = Phase::Eval);

struct RobustnessConfig {
    std::vector<double> magnitudes{0.0, 0.05, 0.1, 0.2};
    bool gaussian = true;
    bool fgsm = true;
    std::size_t trials = 5;
    std::uint64_t seed = 0;

    void validate() const;
};

struct AttackTrace {
    std::string attack;
    std::vector<double> magnitudes;
    std::vector<double> accuracies;
};

struct RobustnessReport {
    std::vector<AttackTrace> traces;
    double summary = 0.0;
};

// Mean accuracy over the non-zero magnitudes of each trace, then the mean
// across traces.
double robustness_summary(std::span<const AttackTrace> traces);

RobustnessReport robustness_eval(std::span<const double> theta, std::span<const Sample> test,
                                 double clean_accuracy, const RobustnessConfig& rcfg, Estimator& est,
                                 const ModelConfig& model);

}  // namespace cutpipe
