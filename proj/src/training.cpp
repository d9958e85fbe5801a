#include "cutpipe/training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace cutpipe {

std::size_t parameter_count(int n_qubits, const ModelConfig& model) {
    return static_cast<std::size_t>(n_qubits) * static_cast<std::size_t>(model.ansatz_reps + 1);
}

ParamCircuit model_circuit(std::span<const double> x, std::span<const double> theta, const ModelConfig& model) {
    const int n = static_cast<int>(x.size());
    return compose(build_zfeaturemap(n, x, model.feature_reps), build_realamplitudes(n, theta, model.ansatz_reps));
}

double forward(std::span<const double> x, std::span<const double> theta, Estimator& est, const ModelConfig& model,
               Phase phase) {
    const ParamCircuit c = model_circuit(x, theta, model);
    return est(c, PauliObservable::z_all(c.n_qubits), phase);
}

double mse_loss(std::span<const double> predictions, std::span<const double> labels) {
    if (predictions.size() != labels.size() || predictions.empty()) {
        throw std::invalid_argument("loss needs matching, non-empty prediction and label vectors");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double e = predictions[i] - labels[i];
        sum += e * e;
    }
    return sum / static_cast<double>(predictions.size());
}

double loss(std::span<const double> theta, std::span<const Sample> batch, Estimator& est, const ModelConfig& model) {
    if (batch.empty()) throw std::invalid_argument("loss over an empty batch");
    std::vector<double> preds, labels;
    for (const Sample& s : batch) {
        preds.push_back(forward(s.x, theta, est, model, Phase::Train));
        labels.push_back(s.y);
    }
    return mse_loss(preds, labels);
}

std::vector<double> shift_rule_gradient(std::span<const double> x, std::span<const double> theta, ParamRole role,
                                        Estimator& est, const ModelConfig& model, Phase phase) {
    const ParamCircuit base = model_circuit(x, theta, model);
    const auto observable = PauliObservable::z_all(base.n_qubits);
    std::vector<double> grad(role == ParamRole::Weight ? theta.size() : x.size(), 0.0);
    constexpr double kShift = std::numbers::pi / 2;
    for (const ParamSlot& slot : base.param_slots) {
        if (slot.role != role) continue;
        ParamCircuit shifted = base;
        double& angle = *shifted.gates[slot.gate_index].angle;
        const double original = angle;
        angle = original + kShift;
        const double plus = est(shifted, observable, phase);
        angle = original - kShift;
        const double minus = est(shifted, observable, phase);
        grad.at(slot.index) += slot.scale * 0.5 * (plus - minus);
    }
    return grad;
}

LossAndGradient loss_and_gradient(std::span<const double> theta, std::span<const Sample> batch, Estimator& est,
                                  const ModelConfig& model) {
    if (batch.empty()) throw std::invalid_argument("gradient over an empty batch");
    LossAndGradient out;
    out.gradient.assign(theta.size(), 0.0);
    std::vector<double> labels;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (const Sample& s : batch) {
        const double f = forward(s.x, theta, est, model, Phase::Train);
        const auto df = shift_rule_gradient(s.x, theta, ParamRole::Weight, est, model, Phase::Grad);
        for (std::size_t j = 0; j < theta.size(); ++j) out.gradient[j] += 2.0 * (f - s.y) * df[j] * inv_n;
        out.predictions.push_back(f);
        labels.push_back(s.y);
    }
    out.loss = mse_loss(out.predictions, labels);
    return out;
}

std::vector<double> parameter_shift_grad(std::span<const double> theta, std::span<const Sample> batch,
                                         Estimator& est, const ModelConfig& model) {
    return loss_and_gradient(theta, batch, est, model).gradient;
}

std::vector<double> initial_params(int n_qubits, const ModelConfig& model, std::uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed, 0x1417));
    std::uniform_real_distribution<double> uniform(-std::numbers::pi, std::numbers::pi);
    std::vector<double> theta(parameter_count(n_qubits, model));
    for (double& t : theta) t = uniform(rng);
    return theta;
}

TrainResult train(const Dataset& dataset, const TrainConfig& cfg, Estimator& est) {
    if (cfg.maxiter < 1) throw std::invalid_argument("maxiter must be at least 1");
    if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
    const auto train_set = dataset.samples(dataset.train);
    const auto test_set = dataset.samples(dataset.test);
    TrainResult result;
    result.params = initial_params(static_cast<int>(dataset.n_features()), cfg.model, cfg.seed);

    const double t0 = monotonic_seconds();
    try {
        for (std::size_t it = 0; it < cfg.maxiter; ++it) {
            const auto lg = loss_and_gradient(result.params, train_set, est, cfg.model);
            result.loss_trace.push_back(lg.loss);
            for (std::size_t j = 0; j < result.params.size(); ++j) {
                result.params[j] -= cfg.learning_rate * lg.gradient[j];
            }
            result.param_trace.push_back(result.params);
        }
    } catch (const std::exception& e) {
        result.train_time_s = monotonic_seconds() - t0;
        result.failed = true;
        result.error = e.what();
        return result;
    }
    result.train_time_s = monotonic_seconds() - t0;
    try {
        result.test_accuracy = accuracy(result.params, test_set, est, cfg.model, Phase::Eval);
    } catch (const std::exception& e) {
        result.failed = true;
        result.error = e.what();
    }
    return result;
}

double accuracy_from_predictions(std::span<const double> predictions, std::span<const Sample> samples) {
    if (samples.empty() || predictions.size() != samples.size()) {
        throw std::invalid_argument("accuracy needs one prediction per sample");
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double predicted = predictions[i] >= 0.0 ? 1.0 : -1.0;
        if (predicted == samples[i].y) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

double accuracy(std::span<const double> theta, std::span<const Sample> samples, Estimator& est,
                const ModelConfig& model, Phase phase) {
    std::vector<double> preds;
    preds.reserve(samples.size());
    for (const Sample& s : samples) preds.push_back(forward(s.x, theta, est, model, phase));
    return accuracy_from_predictions(preds, samples);
}

void RobustnessConfig::validate() const {
    if (magnitudes.empty() || magnitudes.front() != 0.0) {
        throw std::invalid_argument("robustness magnitudes must start at 0");
    }
    for (std::size_t i = 1; i < magnitudes.size(); ++i) {
        if (!(magnitudes[i] > magnitudes[i - 1])) throw std::invalid_argument("robustness magnitudes must ascend");
    }
    if (gaussian && trials == 0) throw std::invalid_argument("gaussian attack needs at least one trial");
}

double robustness_summary(std::span<const AttackTrace> traces) {
    double total = 0.0;
    std::size_t used = 0;
    for (const AttackTrace& t : traces) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < t.magnitudes.size(); ++i) {
            if (t.magnitudes[i] == 0.0) continue;
            sum += t.accuracies[i];
            ++count;
        }
        if (count == 0) continue;
        total += sum / static_cast<double>(count);
        ++used;
    }
    return used == 0 ? 0.0 : total / static_cast<double>(used);
}

RobustnessReport robustness_eval(std::span<const double> theta, std::span<const Sample> test, double clean_accuracy,
                                 const RobustnessConfig& rcfg, Estimator& est, const ModelConfig& model) {
    rcfg.validate();
    if (test.empty()) throw std::invalid_argument("robustness evaluation on an empty split");
    RobustnessReport report;

    if (rcfg.gaussian) {
        AttackTrace trace{"gaussian", {}, {}};
        for (std::size_t m = 0; m < rcfg.magnitudes.size(); ++m) {
            const double sigma = rcfg.magnitudes[m];
            trace.magnitudes.push_back(sigma);
            if (sigma == 0.0) {
                trace.accuracies.push_back(clean_accuracy);
                continue;
            }
            double acc = 0.0;
            for (std::size_t t = 0; t < rcfg.trials; ++t) {
                std::mt19937_64 rng(mix_seed(mix_seed(rcfg.seed, m), t));
                std::normal_distribution<double> normal(0.0, 1.0);
                std::vector<Sample> noisy(test.begin(), test.end());
                for (Sample& s : noisy) {
                    for (double& v : s.x) v += sigma * normal(rng);
                }
                acc += accuracy(theta, noisy, est, model, Phase::Robust);
            }
            trace.accuracies.push_back(acc / static_cast<double>(rcfg.trials));
        }
        report.traces.push_back(std::move(trace));
    }

    if (rcfg.fgsm) {
        // Loss gradient sign per sample: sign((f - y) * df/dx_i).
        std::vector<std::vector<double>> direction;
        for (const Sample& s : test) {
            const double f = forward(s.x, theta, est, model, Phase::Robust);
            const auto dfdx = shift_rule_gradient(s.x, theta, ParamRole::Feature, est, model, Phase::Robust);
            std::vector<double> dir(dfdx.size());
            for (std::size_t i = 0; i < dir.size(); ++i) {
                const double g = 2.0 * (f - s.y) * dfdx[i];
                dir[i] = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
            }
            direction.push_back(std::move(dir));
        }
        AttackTrace trace{"fgsm", {}, {}};
        for (double eps : rcfg.magnitudes) {
            trace.magnitudes.push_back(eps);
            if (eps == 0.0) {
                trace.accuracies.push_back(clean_accuracy);
                continue;
            }
            std::vector<Sample> adv(test.begin(), test.end());
            for (std::size_t k = 0; k < adv.size(); ++k) {
                for (std::size_t i = 0; i < adv[k].x.size(); ++i) adv[k].x[i] += eps * direction[k][i];
            }
            trace.accuracies.push_back(accuracy(theta, adv, est, model, Phase::Robust));
        }
        report.traces.push_back(std::move(trace));
    }

    report.summary = robustness_summary(report.traces);
    return report;
}

}  // namespace cutpipe
