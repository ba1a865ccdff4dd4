#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hqmom/ensemble.hpp"
#include "hqmom/qbmm.hpp"

namespace hqmom {

inline constexpr int kClosureInputDim = 6;  // five moments + Cp

struct Hyperparams {
    std::size_t epochs = 500;
    double learning_rate = 1e-5;
    std::size_t batch_size = 32;
    double dropout = 0.10;
    double recurrent_dropout = 0.10;
    std::size_t window = 256;
    double lambda = 1.0;     // negative-weight penalty, not a paper value
    double out_scale = 1.0;  // output normalization (see ClosureModel::out_scale)
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    TransportExponents exponents = TransportExponents::Generic;
};

// One LSTM layer (gate order: input, forget, output, candidate; tanh cell
// activation, hard-sigmoid gates) plus an affine head of width 3N emitting
// quadrature corrections (N weight, N xi1, N xi2 corrections).
//
// Parameter vector layout: W [4H x 6], U [4H x H], b [4H], Wo [3N x H],
// bo [3N]; total 4H(6+H+1) + 3N(H+1).
struct ClosureModel {
    int hidden = 32;
    int n_nodes = 4;
    std::vector<double> theta;
    std::array<double, kClosureInputDim> feat_mean{};
    std::array<double, kClosureInputDim> feat_std{{1, 1, 1, 1, 1, 1}};
    // Output normalization: the head is trained in normalized units and its
    // output is scaled by this constant to correction units, so the small
    // per-update parameter motion of Adam at the prescribed learning rate
    // can span the correction range the quadrature needs.
    double out_scale = 1.0;

    std::size_t param_count() const {
        const std::size_t h = hidden, n = n_nodes;
        return 4 * h * (kClosureInputDim + h + 1) + 3 * n * (h + 1);
    }
    std::size_t off_w() const { return 0; }
    std::size_t off_u() const { return 4u * hidden * kClosureInputDim; }
    std::size_t off_b() const { return off_u() + 4u * hidden * hidden; }
    std::size_t off_wo() const { return off_b() + 4u * hidden; }
    std::size_t off_bo() const { return off_wo() + 3u * n_nodes * hidden; }

    // Zero head (so the hybrid starts exactly at baseline CHyQMOM);
    // LSTM kernels uniform in [-0.05, 0.05], biases zero.
    static ClosureModel init(int hidden, int n_nodes, std::uint64_t seed);
};

struct LstmState {
    std::vector<double> h, c;
    void reset(int hidden) {
        h.assign(hidden, 0.0);
        c.assign(hidden, 0.0);
    }
};

// Per-window dropout masks (inverted scaling), sampled once per window and
// reused at every timestep, Keras-style.
struct DropoutMasks {
    std::array<double, kClosureInputDim> input{};
    std::vector<double> recurrent;
    static DropoutMasks sample(Rng& rng, double p_in, double p_rec, int hidden);
};

struct ForwardCache {
    std::size_t steps = 0;
    int hidden = 0;
    std::vector<double> xm;      // [T x 6] masked normalized inputs
    std::vector<double> hm;      // [T x H] masked previous hidden
    std::vector<double> c_prev;  // [T x H]
    std::vector<double> z;       // [T x 4H] pre-activations
    std::vector<double> gates;   // [T x 4H] activated i,f,o,g
    std::vector<double> c;       // [T x H]
    std::vector<double> h;       // [T x H]
    DropoutMasks masks;
    bool masked = false;
};

// Runs the LSTM over the window (raw, unnormalized inputs), updating
// `state` in place, and returns the 3N corrections from the final hidden
// state. `masks` enables training-mode dropout; `cache` enables backward().
std::vector<double> closure_forward(const ClosureModel& model,
                                    const std::vector<std::array<double, kClosureInputDim>>& window,
                                    LstmState& state, const DropoutMasks* masks = nullptr,
                                    ForwardCache* cache = nullptr);

// w, xi1, xi2 shifted elementwise by the corrections; no renormalization.
Quadrature hybrid_quadrature(const Quadrature& baseline, const std::vector<double>& corrections);

// The ten projected moments entering the loss: (0,0), (1,0), (0,1), (2,0),
// (1,1), (0,2), (3,0), (2,1), (3,2), (3-3g, 0).
std::array<std::pair<double, int>, 10> loss_index_set(double gamma);

struct QuadLossContext {
    Quadrature baseline;                 // CHyQMOM inversion of the input-series moments at window end
    double cp = 1.0;
    PhysParams params{};
    TransportExponents exponents = TransportExponents::Generic;
    std::array<double, 5> rates_mc{};    // RP time units, like transport_rhs
    std::array<double, 10> moments_mc{};
    std::array<double, 5> alpha{};       // transport-rate weights
    std::array<double, 10> beta{};       // projected-moment weights
    double lambda = 1.0;
};

// Loss from a correction vector; optionally fills d(loss)/d(corrections).
double closure_loss(const std::vector<double>& corrections, const QuadLossContext& ctx,
                    std::vector<double>* grad_corrections = nullptr);

// Per-trajectory loss weights: reciprocal sup-norms of the MC rate and
// moment series (zero when a series is identically zero).
void loss_weights(const TrajectoryRecord& record, double gamma, std::array<double, 5>& alpha,
                  std::array<double, 10>& beta);

// Backpropagation through the window; accumulates d(loss)/d(theta) into
// grad_theta (size param_count). The carried-in state is treated as
// constant (truncated BPTT at window boundaries).
void closure_backward(const ClosureModel& model, const ForwardCache& cache,
                      const std::vector<double>& grad_corrections,
                      std::vector<double>& grad_theta);

struct AdamOptimizer {
    double lr, beta1, beta2, eps;
    std::vector<double> m, v;
    std::size_t t = 0;
    AdamOptimizer(std::size_t n, const Hyperparams& hp)
        : lr(hp.learning_rate), beta1(hp.adam_beta1), beta2(hp.adam_beta2), eps(hp.adam_eps),
          m(n, 0.0), v(n, 0.0) {}
    void step(std::vector<double>& theta, const std::vector<double>& grad);
};

struct TrainResult {
    ClosureModel model;
    std::vector<double> epoch_loss;
};

// One training trajectory: the LSTM reads the moment history the closure
// will actually see at inference -- the uncorrected reduced-order run --
// while the Monte Carlo ensemble on the same grid supplies the rate and
// moment targets (and the loss weights). At zero correction the moment
// residuals then equal the reduced-order model's error, which is the
// signal the corrections are trained to cancel.
struct TrainingSeries {
    TrajectoryRecord inputs;   // baseline quadrature-method run
    TrajectoryRecord targets;  // Monte Carlo surrogate truth
};

// Adam over shuffled batches of windows. Within each trajectory, windows
// are visited in time order with the recurrent state carried across them
// and reset at trajectory boundaries; the visiting order of trajectories
// is reshuffled every epoch.
TrainResult train_closure(const std::vector<TrainingSeries>& series, int hidden, int n_nodes,
                          const Hyperparams& hyper, std::uint64_t seed);

void save_model(const ClosureModel& model, const std::string& path);
ClosureModel load_model(const std::string& path);

}  // namespace hqmom
