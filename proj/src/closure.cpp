#include "hqmom/closure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "hqmom/errors.hpp"

namespace hqmom {

namespace {

double ipow(double x, int n) {
    if (n < 0) return 1.0 / ipow(x, -n);
    double r = 1.0;
    while (n > 0) {
        if (n & 1) r *= x;
        x *= x;
        n >>= 1;
    }
    return r;
}

bool strict_exponent(double i) { return i < 0.0 || i != std::floor(i); }

double xi1_pow(double xi1, double i) {
    if (i == 0.0) return 1.0;
    if (i == std::floor(i) && std::abs(i) < 64.0) return ipow(xi1, static_cast<int>(i));
    return std::exp(i * std::log(xi1));
}

double hard_sigmoid(double x) { return std::clamp(0.2 * x + 0.5, 0.0, 1.0); }
double hard_sigmoid_deriv(double x) { return (x > -2.5 && x < 2.5) ? 0.2 : 0.0; }

}  // namespace

ClosureModel ClosureModel::init(int hidden, int n_nodes, std::uint64_t seed) {
    ClosureModel m;
    m.hidden = hidden;
    m.n_nodes = n_nodes;
    m.theta.assign(m.param_count(), 0.0);
    Rng rng(seed);
    // Kernel and recurrent kernel small-uniform; biases and head stay zero
    // so the untrained model is exactly the baseline quadrature.
    for (std::size_t k = m.off_w(); k < m.off_b(); ++k) m.theta[k] = rng.uniform(-0.05, 0.05);
    return m;
}

DropoutMasks DropoutMasks::sample(Rng& rng, double p_in, double p_rec, int hidden) {
    DropoutMasks masks;
    for (auto& v : masks.input)
        v = (p_in > 0.0 && rng.uniform01() < p_in) ? 0.0 : 1.0 / (1.0 - p_in);
    masks.recurrent.resize(hidden);
    for (auto& v : masks.recurrent)
        v = (p_rec > 0.0 && rng.uniform01() < p_rec) ? 0.0 : 1.0 / (1.0 - p_rec);
    return masks;
}

std::vector<double> closure_forward(const ClosureModel& model,
                                    const std::vector<std::array<double, kClosureInputDim>>& window,
                                    LstmState& state, const DropoutMasks* masks,
                                    ForwardCache* cache) {
    const int H = model.hidden;
    const int I = kClosureInputDim;
    if (state.h.size() != static_cast<std::size_t>(H))
        throw ContractViolation("closure_forward: state size does not match hidden width");
    if (window.empty()) throw ContractViolation("closure_forward: empty window");
    const std::size_t T = window.size();

    const double* W = model.theta.data() + model.off_w();
    const double* U = model.theta.data() + model.off_u();
    const double* b = model.theta.data() + model.off_b();

    if (cache) {
        cache->steps = T;
        cache->hidden = H;
        cache->xm.assign(T * I, 0.0);
        cache->hm.assign(T * H, 0.0);
        cache->c_prev.assign(T * H, 0.0);
        cache->z.assign(T * 4 * H, 0.0);
        cache->gates.assign(T * 4 * H, 0.0);
        cache->c.assign(T * H, 0.0);
        cache->h.assign(T * H, 0.0);
        cache->masked = masks != nullptr;
        if (masks) cache->masks = *masks;
    }

    std::vector<double> xm(I), hm(H), z(4 * H), gates(4 * H);
    for (std::size_t t = 0; t < T; ++t) {
        for (int x = 0; x < I; ++x) {
            double v = (window[t][x] - model.feat_mean[x]) / model.feat_std[x];
            if (masks) v *= masks->input[x];
            xm[x] = v;
        }
        for (int u = 0; u < H; ++u)
            hm[u] = masks ? state.h[u] * masks->recurrent[u] : state.h[u];

        for (int r = 0; r < 4 * H; ++r) {
            double acc = b[r];
            const double* wrow = W + static_cast<std::size_t>(r) * I;
            for (int x = 0; x < I; ++x) acc += wrow[x] * xm[x];
            const double* urow = U + static_cast<std::size_t>(r) * H;
            for (int u = 0; u < H; ++u) acc += urow[u] * hm[u];
            z[r] = acc;
        }
        for (int u = 0; u < H; ++u) {
            gates[u] = hard_sigmoid(z[u]);                   // input
            gates[H + u] = hard_sigmoid(z[H + u]);           // forget
            gates[2 * H + u] = hard_sigmoid(z[2 * H + u]);   // output
            gates[3 * H + u] = std::tanh(z[3 * H + u]);      // candidate
        }
        if (cache) {
            std::copy(xm.begin(), xm.end(), cache->xm.begin() + t * I);
            std::copy(hm.begin(), hm.end(), cache->hm.begin() + t * H);
            std::copy(state.c.begin(), state.c.end(), cache->c_prev.begin() + t * H);
            std::copy(z.begin(), z.end(), cache->z.begin() + t * 4 * H);
            std::copy(gates.begin(), gates.end(), cache->gates.begin() + t * 4 * H);
        }
        for (int u = 0; u < H; ++u) {
            const double c_new = gates[H + u] * state.c[u] + gates[u] * gates[3 * H + u];
            state.c[u] = c_new;
            state.h[u] = gates[2 * H + u] * std::tanh(c_new);
        }
        if (cache) {
            std::copy(state.c.begin(), state.c.end(), cache->c.begin() + t * H);
            std::copy(state.h.begin(), state.h.end(), cache->h.begin() + t * H);
        }
    }

    const int out_dim = 3 * model.n_nodes;
    const double* Wo = model.theta.data() + model.off_wo();
    const double* bo = model.theta.data() + model.off_bo();
    std::vector<double> y(out_dim);
    for (int r = 0; r < out_dim; ++r) {
        double acc = bo[r];
        const double* row = Wo + static_cast<std::size_t>(r) * H;
        for (int u = 0; u < H; ++u) acc += row[u] * state.h[u];
        y[r] = acc * model.out_scale;
    }
    return y;
}

void closure_backward(const ClosureModel& model, const ForwardCache& cache,
                      const std::vector<double>& grad_corrections,
                      std::vector<double>& grad_theta) {
    const int H = model.hidden;
    const int I = kClosureInputDim;
    const int out_dim = 3 * model.n_nodes;
    if (grad_corrections.size() != static_cast<std::size_t>(out_dim))
        throw ContractViolation("closure_backward: correction gradient size mismatch");
    if (grad_theta.size() != model.param_count())
        throw ContractViolation("closure_backward: gradient buffer size mismatch");
    const std::size_t T = cache.steps;

    const double* U = model.theta.data() + model.off_u();
    const double* Wo = model.theta.data() + model.off_wo();
    double* gW = grad_theta.data() + model.off_w();
    double* gU = grad_theta.data() + model.off_u();
    double* gb = grad_theta.data() + model.off_b();
    double* gWo = grad_theta.data() + model.off_wo();
    double* gbo = grad_theta.data() + model.off_bo();

    // Head.
    std::vector<double> dh(H, 0.0), dc(H, 0.0);
    const double* h_last = cache.h.data() + (T - 1) * H;
    for (int r = 0; r < out_dim; ++r) {
        const double g = grad_corrections[r] * model.out_scale;
        gbo[r] += g;
        const double* row = Wo + static_cast<std::size_t>(r) * H;
        double* grow = gWo + static_cast<std::size_t>(r) * H;
        for (int u = 0; u < H; ++u) {
            grow[u] += g * h_last[u];
            dh[u] += g * row[u];
        }
    }

    std::vector<double> dz(4 * H);
    for (std::size_t t = T; t-- > 0;) {
        const double* z = cache.z.data() + t * 4 * H;
        const double* gates = cache.gates.data() + t * 4 * H;
        const double* c = cache.c.data() + t * H;
        const double* c_prev = cache.c_prev.data() + t * H;
        const double* xm = cache.xm.data() + t * I;
        const double* hm = cache.hm.data() + t * H;

        for (int u = 0; u < H; ++u) {
            const double tc = std::tanh(c[u]);
            const double i_g = gates[u];
            const double f_g = gates[H + u];
            const double o_g = gates[2 * H + u];
            const double g_g = gates[3 * H + u];
            const double d_o = dh[u] * tc;
            const double dcu = dc[u] + dh[u] * o_g * (1.0 - tc * tc);
            const double d_i = dcu * g_g;
            const double d_g = dcu * i_g;
            const double d_f = dcu * c_prev[u];
            dc[u] = dcu * f_g;  // becomes dc for step t-1
            dz[u] = d_i * hard_sigmoid_deriv(z[u]);
            dz[H + u] = d_f * hard_sigmoid_deriv(z[H + u]);
            dz[2 * H + u] = d_o * hard_sigmoid_deriv(z[2 * H + u]);
            dz[3 * H + u] = d_g * (1.0 - g_g * g_g);
        }

        std::fill(dh.begin(), dh.end(), 0.0);
        for (int r = 0; r < 4 * H; ++r) {
            const double d = dz[r];
            if (d == 0.0) continue;
            double* wrow = gW + static_cast<std::size_t>(r) * I;
            for (int x = 0; x < I; ++x) wrow[x] += d * xm[x];
            double* urow = gU + static_cast<std::size_t>(r) * H;
            const double* Urow = U + static_cast<std::size_t>(r) * H;
            for (int u = 0; u < H; ++u) {
                urow[u] += d * hm[u];
                dh[u] += d * Urow[u];
            }
        }
        for (int r = 0; r < 4 * H; ++r) gb[r] += dz[r];
        // hm = h_prev (times recurrent mask); chain the mask into dh.
        if (cache.masked)
            for (int u = 0; u < H; ++u) dh[u] *= cache.masks.recurrent[u];
    }
}

Quadrature hybrid_quadrature(const Quadrature& baseline, const std::vector<double>& corrections) {
    const std::size_t n = baseline.size();
    if (corrections.size() != 3 * n)
        throw ContractViolation("hybrid_quadrature: expected 3N corrections");
    Quadrature q = baseline;
    for (std::size_t k = 0; k < n; ++k) {
        q.weights[k] += corrections[k];
        q.xi1[k] += corrections[n + k];
        q.xi2[k] += corrections[2 * n + k];
    }
    return q;
}

std::array<std::pair<double, int>, 10> loss_index_set(double gamma) {
    return {{{0, 0},
             {1, 0},
             {0, 1},
             {2, 0},
             {1, 1},
             {0, 2},
             {3, 0},
             {2, 1},
             {3, 2},
             {3.0 - 3.0 * gamma, 0}}};
}

namespace {

// factor * dP(i,j)/d{w_k, xi1_k, xi2_k} accumulated into the node
// gradients. The w-gradient includes zero-weight nodes: a perturbed weight
// immediately activates the node.
void accumulate_projection_grad(const Quadrature& q, double i, int j, double factor,
                                std::vector<double>& gw, std::vector<double>& gx1,
                                std::vector<double>& gx2) {
    const bool strict = strict_exponent(i);
    for (std::size_t k = 0; k < q.size(); ++k) {
        if (strict && !(q.xi1[k] > 0.0))
            throw DomainError("closure_loss: node has xi1 = " + std::to_string(q.xi1[k]) +
                              " with exponent i = " + std::to_string(i));
        const double t1 = xi1_pow(q.xi1[k], i);
        const double t2 = ipow(q.xi2[k], j);
        gw[k] += factor * t1 * t2;
        if (q.weights[k] != 0.0) {
            if (i != 0.0) gx1[k] += factor * q.weights[k] * i * xi1_pow(q.xi1[k], i - 1.0) * t2;
            if (j != 0) gx2[k] += factor * q.weights[k] * j * t1 * ipow(q.xi2[k], j - 1);
        }
    }
}

struct RhsTerm {
    double coef;
    double i;
    int j;
};

}  // namespace

double closure_loss(const std::vector<double>& corrections, const QuadLossContext& ctx,
                    std::vector<double>* grad_corrections) {
    const Quadrature q = hybrid_quadrature(ctx.baseline, corrections);
    const std::size_t n = q.size();
    std::vector<double> gw(n, 0.0), gx1(n, 0.0), gx2(n, 0.0);
    const bool want_grad = grad_corrections != nullptr;

    const double g =
        ctx.exponents == TransportExponents::Generic ? 3.0 * ctx.params.gamma : 3.0;
    const double re = ctx.params.reynolds;
    const double cp = ctx.cp;

    // Quadrature-sum transport rates, mirroring transport_rhs.
    const std::array<std::vector<RhsTerm>, 5> terms = {{
        {{1.0, 0, 1}},
        {{-1.5, -1, 2}, {-4.0 / re, -2, 1}, {1.0, -g - 1.0, 0}, {-cp, -1, 0}},
        {{2.0, 1, 1}},
        {{-0.5, 0, 2}, {-4.0 / re, -1, 1}, {1.0, -g, 0}},
        {{-3.0, -1, 3}, {-8.0 / re, -2, 2}, {2.0, -g - 1.0, 1}, {-2.0 * cp, -1, 1}},
    }};
    const std::array<double, 5> constants = {0.0, 0.0, 0.0, -cp, 0.0};

    double loss = 0.0;
    for (int c = 0; c < 5; ++c) {
        double rate = constants[c];
        for (const auto& term : terms[c]) rate += term.coef * project_moment(q, term.i, term.j);
        const double resid = rate - ctx.rates_mc[c];
        loss += ctx.alpha[c] * resid * resid;
        if (want_grad && ctx.alpha[c] != 0.0) {
            const double factor = 2.0 * ctx.alpha[c] * resid;
            for (const auto& term : terms[c])
                accumulate_projection_grad(q, term.i, term.j, factor * term.coef, gw, gx1, gx2);
        }
    }

    const auto index_set = loss_index_set(ctx.params.gamma);
    for (int m = 0; m < 10; ++m) {
        const double value = project_moment(q, index_set[m].first, index_set[m].second);
        const double resid = value - ctx.moments_mc[m];
        loss += ctx.beta[m] * resid * resid;
        if (want_grad && ctx.beta[m] != 0.0)
            accumulate_projection_grad(q, index_set[m].first, index_set[m].second,
                                       2.0 * ctx.beta[m] * resid, gw, gx1, gx2);
    }

    for (std::size_t k = 0; k < n; ++k) {
        if (q.weights[k] < 0.0) {
            loss += ctx.lambda * (-q.weights[k]);
            if (want_grad) gw[k] -= ctx.lambda;
        }
    }

    if (want_grad) {
        grad_corrections->assign(3 * n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            (*grad_corrections)[k] = gw[k];
            (*grad_corrections)[n + k] = gx1[k];
            (*grad_corrections)[2 * n + k] = gx2[k];
        }
    }
    return loss;
}

void loss_weights(const TrajectoryRecord& record, double gamma, std::array<double, 5>& alpha,
                  std::array<double, 10>& beta) {
    const std::size_t n = record.size();
    if (n == 0) throw ContractViolation("loss_weights: empty record");

    std::array<double, 5> rate_sup{};
    std::array<double, 10> mom_sup{};
    mom_sup[0] = 1.0;  // mu00 is identically 1
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < 5; ++c)
            rate_sup[c] = std::max(rate_sup[c], std::abs(record.moment_rates[i][c]));
        const auto m = record.moments[i].as_array();
        for (int c = 0; c < 5; ++c) mom_sup[1 + c] = std::max(mom_sup[1 + c], std::abs(m[c]));
        for (int c = 0; c < 4; ++c)
            mom_sup[6 + c] = std::max(mom_sup[6 + c], std::abs(record.target_moments[i][c]));
    }
    (void)gamma;  // index ordering is fixed; gamma only names the last moment
    for (int c = 0; c < 5; ++c) alpha[c] = rate_sup[c] > 0.0 ? 1.0 / rate_sup[c] : 0.0;
    for (int c = 0; c < 10; ++c) beta[c] = mom_sup[c] > 0.0 ? 1.0 / mom_sup[c] : 0.0;
}

void AdamOptimizer::step(std::vector<double>& theta, const std::vector<double>& grad) {
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t k = 0; k < theta.size(); ++k) {
        m[k] = beta1 * m[k] + (1.0 - beta1) * grad[k];
        v[k] = beta2 * v[k] + (1.0 - beta2) * grad[k] * grad[k];
        theta[k] -= lr * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + eps);
    }
}

namespace {

struct WindowSpec {
    std::size_t record;
    std::size_t start;
    QuadLossContext ctx;
};

}  // namespace

TrainResult train_closure(const std::vector<TrainingSeries>& series, int hidden, int n_nodes,
                          const Hyperparams& hyper, std::uint64_t seed) {
    if (series.empty()) throw ContractViolation("train_closure: empty dataset");
    for (std::size_t r = 0; r < series.size(); ++r) {
        if (series[r].inputs.size() != series[r].targets.size() || series[r].inputs.size() == 0)
            throw ContractViolation(
                "train_closure: series " + std::to_string(r) + " input/target lengths differ (" +
                std::to_string(series[r].inputs.size()) + " vs " +
                std::to_string(series[r].targets.size()) + ")");
    }
    const std::size_t W = hyper.window;

    ClosureModel model = ClosureModel::init(hidden, n_nodes, Rng::derive_seed(seed, 0));
    model.out_scale = hyper.out_scale;

    // Per-feature standardization constants from the training set.
    std::array<double, kClosureInputDim> sum{}, sumsq{};
    std::size_t count = 0;
    for (const auto& s : series) {
        const auto& rec = s.inputs;
        for (std::size_t i = 0; i < rec.size(); ++i) {
            const auto m = rec.moments[i].as_array();
            for (int c = 0; c < 5; ++c) {
                sum[c] += m[c];
                sumsq[c] += m[c] * m[c];
            }
            sum[5] += rec.cp[i];
            sumsq[5] += rec.cp[i] * rec.cp[i];
            ++count;
        }
    }
    for (int c = 0; c < kClosureInputDim; ++c) {
        model.feat_mean[c] = sum[c] / static_cast<double>(count);
        const double var =
            sumsq[c] / static_cast<double>(count) - model.feat_mean[c] * model.feat_mean[c];
        model.feat_std[c] = var > 1e-24 ? std::sqrt(var) : 1.0;
    }

    // Full, non-overlapping windows per trajectory, targets at the window end.
    std::vector<std::vector<WindowSpec>> per_record(series.size());
    const double gamma = PhysParams{}.gamma;
    std::size_t n_windows = 0;
    for (std::size_t r = 0; r < series.size(); ++r) {
        const auto& rom = series[r].inputs;
        const auto& mc = series[r].targets;
        std::array<double, 5> alpha;
        std::array<double, 10> beta;
        loss_weights(mc, gamma, alpha, beta);
        const std::size_t nwin = rom.size() / W;
        for (std::size_t w = 0; w < nwin; ++w) {
            const std::size_t end = w * W + W - 1;
            WindowSpec spec;
            spec.record = r;
            spec.start = w * W;
            spec.ctx.baseline = chyqmom4_invert(rom.moments[end], n_nodes);
            spec.ctx.cp = rom.cp[end];
            spec.ctx.exponents = hyper.exponents;
            spec.ctx.rates_mc = mc.moment_rates[end];
            const auto m = mc.moments[end].as_array();
            spec.ctx.moments_mc = {1.0,
                                   m[0],
                                   m[1],
                                   m[2],
                                   m[3],
                                   m[4],
                                   mc.target_moments[end][0],
                                   mc.target_moments[end][1],
                                   mc.target_moments[end][2],
                                   mc.target_moments[end][3]};
            spec.ctx.alpha = alpha;
            spec.ctx.beta = beta;
            spec.ctx.lambda = hyper.lambda;
            per_record[r].push_back(std::move(spec));
            ++n_windows;
        }
    }
    if (n_windows == 0)
        throw ContractViolation("train_closure: no trajectory is long enough for one window");

    Rng shuffle_rng(Rng::derive_seed(seed, 1));
    Rng dropout_rng(Rng::derive_seed(seed, 2));
    AdamOptimizer adam(model.param_count(), hyper);
    const bool use_dropout = hyper.dropout > 0.0 || hyper.recurrent_dropout > 0.0;

    TrainResult result;
    std::vector<double> batch_grad(model.param_count(), 0.0);
    std::vector<std::size_t> order(series.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);

        double epoch_loss = 0.0;
        std::size_t in_batch = 0;
        std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
        const auto flush = [&] {
            if (in_batch == 0) return;
            for (double& v : batch_grad) v /= static_cast<double>(in_batch);
            adam.step(model.theta, batch_grad);
            std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
            in_batch = 0;
        };

        for (const std::size_t r : order) {
            LstmState state;
            state.reset(model.hidden);
            for (const auto& spec : per_record[r]) {
                const auto& rec = series[spec.record].inputs;
                std::vector<std::array<double, kClosureInputDim>> window(W);
                for (std::size_t i = 0; i < W; ++i) {
                    const auto m = rec.moments[spec.start + i].as_array();
                    window[i] = {m[0], m[1], m[2], m[3], m[4], rec.cp[spec.start + i]};
                }
                DropoutMasks masks;
                if (use_dropout)
                    masks = DropoutMasks::sample(dropout_rng, hyper.dropout,
                                                 hyper.recurrent_dropout, model.hidden);
                ForwardCache cache;
                const std::vector<double> y = closure_forward(
                    model, window, state, use_dropout ? &masks : nullptr, &cache);
                std::vector<double> grad_y;
                const double loss = closure_loss(y, spec.ctx, &grad_y);
                if (!std::isfinite(loss))
                    throw Error("train_closure: non-finite loss at epoch " +
                                std::to_string(epoch) + ", record " + std::to_string(r));
                epoch_loss += loss;
                closure_backward(model, cache, grad_y, batch_grad);
                if (++in_batch == hyper.batch_size) flush();
            }
        }
        flush();
        result.epoch_loss.push_back(epoch_loss / static_cast<double>(n_windows));
    }
    result.model = std::move(model);
    return result;
}

void save_model(const ClosureModel& model, const std::string& path) {
    nlohmann::json doc;
    doc["format"] = "hqmom-closure";
    doc["version"] = 1;
    doc["hidden"] = model.hidden;
    doc["n_nodes"] = model.n_nodes;
    doc["feat_mean"] = model.feat_mean;
    doc["feat_std"] = model.feat_std;
    doc["out_scale"] = model.out_scale;
    doc["theta"] = model.theta;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("save_model: cannot open " + path);
    out << doc.dump();
    if (!out) throw IoError("save_model: write failed for " + path);
}

ClosureModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_model: cannot open " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ModelFormatError("load_model: corrupt checkpoint " + path + ": " + e.what());
    }
    if (doc.value("format", "") != "hqmom-closure")
        throw ModelFormatError("load_model: " + path + " is not a closure checkpoint");
    if (doc.value("version", 0) != 1)
        throw ModelFormatError("load_model: unsupported checkpoint version in " + path);
    ClosureModel model;
    try {
        model.hidden = doc.at("hidden").get<int>();
        model.n_nodes = doc.at("n_nodes").get<int>();
        model.feat_mean = doc.at("feat_mean").get<std::array<double, kClosureInputDim>>();
        model.feat_std = doc.at("feat_std").get<std::array<double, kClosureInputDim>>();
        model.out_scale = doc.value("out_scale", 1.0);
        model.theta = doc.at("theta").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ModelFormatError("load_model: malformed checkpoint " + path + ": " + e.what());
    }
    if (model.theta.size() != model.param_count())
        throw ModelFormatError("load_model: parameter count mismatch in " + path);
    return model;
}

}  // namespace hqmom
