#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pinnsel/common.hpp"

namespace pinnsel {

/// Fully-connected tanh network u(x, t) with explicit parameter storage.
/// weights[l] is widths[l+1] x widths[l] row-major; biases[l] has widths[l+1].
struct MlpParams {
    std::vector<int> widths;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    int layer_count() const { return static_cast<int>(weights.size()); }
    std::size_t parameter_count() const;
    bool same_shape(const MlpParams& o) const;
    void set_zero();
};

/// Deterministic Glorot-normal initialization; biases zero.
MlpParams init_params(const std::vector<int>& widths, std::uint64_t seed);

/// Network output and its exact space-time derivatives at one point.
struct DerivativeBundle {
    double u = 0.0;
    double u_x = 0.0;
    double u_t = 0.0;
    double u_xx = 0.0;
};

/// Propagates truncated Taylor coefficients (value, d/dx, d/dt, d2/dx2)
/// through the network; derivatives are exact to floating point.
DerivativeBundle forward_with_derivatives(const MlpParams& p, double x, double t);

/// Plain forward evaluation of u(x, t).
double forward_value(const MlpParams& p, double x, double t);

/// Burgers residual r = u_t + u u_x - nu u_xx at one point.
double residual(const MlpParams& p, double x, double t, double nu);

struct LossWeights {
    double lambda_ic = 1.0;
    double lambda_bc = 1.0;
    double lambda_pde = 1.0;
};

struct TrainingData {
    std::vector<Point> ic_points;
    std::vector<double> ic_values;
    std::vector<Point> bc_points;
    std::vector<double> bc_values;
    std::vector<Point> collocation;
};

/// Composite PINN loss: weighted mean squared IC/BC mismatch plus weighted
/// mean squared PDE residual over the collocation set.
double loss(const MlpParams& p, const TrainingData& data, const LossWeights& w,
            double nu, int threads = 0);

/// Exact gradient of `loss` with respect to every parameter, computed by a
/// reverse pass over the Taylor-coefficient propagation. Optionally returns
/// the loss value computed along the way.
MlpParams loss_gradient(const MlpParams& p, const TrainingData& data,
                        const LossWeights& w, double nu, int threads = 0,
                        double* loss_out = nullptr);

struct TrainConfig {
    int steps = 1000;
    double learning_rate = 1e-3;
    double lr_final = 0.0;   // > 0: exponential decay to this value over `steps`
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int batch_size = 0;      // 0 = full batch; else collocation minibatch size
    std::uint64_t seed = 0;  // minibatch sampling stream
    int record_every = 100;  // loss history cadence; 0 disables
    int threads = 0;         // 0 = hardware default
};

struct LossRecord {
    int step;
    double loss;
};

/// Adam training loop that can be advanced in segments; optimizer state and
/// the pure-stepping wall clock persist across run() calls.
class Trainer {
public:
    Trainer(MlpParams params, TrainConfig cfg);

    void run(int steps, const TrainingData& data, const LossWeights& w, double nu);

    const MlpParams& params() const { return params_; }
    int step() const { return step_; }
    double train_seconds() const { return seconds_; }
    const std::vector<LossRecord>& history() const { return history_; }

private:
    MlpParams params_, m_, v_;
    TrainConfig cfg_;
    Rng batch_rng_;
    std::vector<int> batch_order_;
    int step_ = 0;
    double seconds_ = 0.0;
    std::vector<LossRecord> history_;
};

struct TrainResult {
    MlpParams params;
    std::vector<LossRecord> history;
    double seconds = 0.0;
};

/// One-shot convenience wrapper around Trainer.
TrainResult train(const MlpParams& init, const TrainingData& data,
                  const LossWeights& w, double nu, const TrainConfig& cfg);

/// Flat binary parameter file with a one-line JSON header.
void save_params(const MlpParams& p, const std::string& path);
MlpParams load_params(const std::string& path);

}  // namespace pinnsel
