#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "hqmom/closure.hpp"
#include "hqmom/errors.hpp"
#include "hqmom/hybrid.hpp"

using namespace hqmom;

namespace {

double hardsig(double x) { return std::min(1.0, std::max(0.0, 0.2 * x + 0.5)); }

// Deterministic but unstructured parameter fill.
void pattern_fill(ClosureModel& m, std::uint64_t seed) {
    Rng rng(seed);
    for (auto& v : m.theta) v = rng.uniform(-0.3, 0.3);
}

std::vector<std::array<double, kClosureInputDim>> sample_window(std::size_t steps,
                                                                std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::array<double, kClosureInputDim>> window(steps);
    for (auto& row : window)
        for (auto& v : row) v = rng.uniform(0.5, 1.5);
    return window;
}

Quadrature gaussian_quadrature() {
    return chyqmom4_invert(MomentSet{1.0, 0.0, 1.01, 0.0, 0.04}, 4);
}

// Loss context whose targets are exactly the baseline's own rates and
// projections, so zero corrections give zero loss.
QuadLossContext self_consistent_ctx(const Quadrature& q, double cp) {
    QuadLossContext ctx;
    ctx.baseline = q;
    ctx.cp = cp;
    ctx.rates_mc = transport_rhs(q, cp, ctx.params, ctx.exponents);
    const auto idx = loss_index_set(ctx.params.gamma);
    for (int k = 0; k < 10; ++k)
        ctx.moments_mc[k] = project_moment(q, idx[k].first, idx[k].second);
    ctx.alpha.fill(1.0);
    ctx.beta.fill(1.0);
    return ctx;
}

}  // namespace

TEST_CASE("param_count matches the documented layout") {
    ClosureModel m;
    m.hidden = 32;
    m.n_nodes = 4;
    CHECK(m.param_count() == 4 * 32 * (6 + 32 + 1) + 3 * 4 * (32 + 1));
    CHECK(m.off_bo() + 3 * m.n_nodes == m.param_count());
}

TEST_CASE("zero head: corrections vanish for any input") {
    const ClosureModel m = ClosureModel::init(8, 5, 123);
    LstmState st;
    st.reset(m.hidden);
    const auto out = closure_forward(m, sample_window(16, 7), st);
    REQUIRE(out.size() == 15);
    for (double v : out) CHECK(v == 0.0);
    // the LSTM itself must still be active
    double hsum = 0.0;
    for (double h : st.h) hsum += std::abs(h);
    CHECK(hsum > 0.0);
}

TEST_CASE("forward pass matches a hand-rolled reference recursion") {
    const int H = 2, N = 4, I = kClosureInputDim;
    ClosureModel m;
    m.hidden = H;
    m.n_nodes = N;
    m.theta.assign(m.param_count(), 0.0);
    pattern_fill(m, 99);
    for (int x = 0; x < I; ++x) {
        m.feat_mean[x] = 0.1 * x;
        m.feat_std[x] = 1.0 + 0.05 * x;
    }
    const auto window = sample_window(5, 11);

    LstmState st;
    st.reset(H);
    const auto out = closure_forward(m, window, st);

    // Independent straight-line recursion from the documented layout:
    // z = W x + U h + b with gate rows [input, forget, output, candidate].
    const double* W = m.theta.data();
    const double* U = m.theta.data() + m.off_u();
    const double* b = m.theta.data() + m.off_b();
    const double* Wo = m.theta.data() + m.off_wo();
    const double* bo = m.theta.data() + m.off_bo();
    double h[H] = {0, 0}, c[H] = {0, 0};
    for (const auto& raw : window) {
        double x[I];
        for (int k = 0; k < I; ++k) x[k] = (raw[k] - m.feat_mean[k]) / m.feat_std[k];
        double z[4 * H];
        for (int r = 0; r < 4 * H; ++r) {
            z[r] = b[r];
            for (int k = 0; k < I; ++k) z[r] += W[r * I + k] * x[k];
            for (int u = 0; u < H; ++u) z[r] += U[r * H + u] * h[u];
        }
        for (int u = 0; u < H; ++u) {
            const double gi = hardsig(z[u]);
            const double gf = hardsig(z[H + u]);
            const double go = hardsig(z[2 * H + u]);
            const double gc = std::tanh(z[3 * H + u]);
            c[u] = gf * c[u] + gi * gc;
            h[u] = go * std::tanh(c[u]);
        }
    }
    REQUIRE(out.size() == 3 * N);
    for (int r = 0; r < 3 * N; ++r) {
        double y = bo[r];
        for (int u = 0; u < H; ++u) y += Wo[r * H + u] * h[u];
        CHECK(out[r] == doctest::Approx(y).epsilon(1e-12));
        CHECK(st.h[r % H] == doctest::Approx(h[r % H]).epsilon(1e-12));
    }
}

TEST_CASE("state carries across windows and reset clears it") {
    const ClosureModel m = ClosureModel::init(4, 4, 5);
    const auto w1 = sample_window(8, 1);
    const auto w2 = sample_window(8, 2);
    LstmState carried;
    carried.reset(m.hidden);
    closure_forward(m, w1, carried);
    const auto h_after_first = carried.h;
    closure_forward(m, w2, carried);

    LstmState fresh;
    fresh.reset(m.hidden);
    closure_forward(m, w2, fresh);
    bool differs = false;
    for (int u = 0; u < m.hidden; ++u)
        if (carried.h[u] != fresh.h[u]) differs = true;
    CHECK(differs);

    // same prefix twice gives the same state
    LstmState again;
    again.reset(m.hidden);
    closure_forward(m, w1, again);
    for (int u = 0; u < m.hidden; ++u) CHECK(again.h[u] == h_after_first[u]);
}

TEST_CASE("dropout masks: zero rates are identity, inverted scaling preserves means") {
    Rng rng(std::uint64_t{17});
    const auto identity = DropoutMasks::sample(rng, 0.0, 0.0, 6);
    for (double v : identity.input) CHECK(v == 1.0);
    for (double v : identity.recurrent) CHECK(v == 1.0);

    double mean = 0.0;
    const int trials = 20000;
    for (int i = 0; i < trials; ++i)
        mean += DropoutMasks::sample(rng, 0.1, 0.1, 1).input[0];
    mean /= trials;
    CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("hybrid_quadrature shifts elementwise") {
    const Quadrature q = gaussian_quadrature();
    const std::vector<double> zero(12, 0.0);
    const Quadrature same = hybrid_quadrature(q, zero);
    CHECK(same.weights == q.weights);
    CHECK(same.xi1 == q.xi1);
    CHECK(same.xi2 == q.xi2);

    std::vector<double> corr(12, 0.0);
    corr[0] = 0.01;   // w_0
    corr[5] = -0.02;  // xi1_1
    corr[11] = 0.5;   // xi2_3
    const Quadrature shifted = hybrid_quadrature(q, corr);
    CHECK(shifted.weights[0] == doctest::Approx(q.weights[0] + 0.01));
    CHECK(shifted.xi1[1] == doctest::Approx(q.xi1[1] - 0.02));
    CHECK(shifted.xi2[3] == doctest::Approx(q.xi2[3] + 0.5));
    CHECK(shifted.weights[1] == q.weights[1]);
}

TEST_CASE("loss_index_set worked values") {
    const auto idx = loss_index_set(1.4);
    CHECK(idx[0].first == 0.0);
    CHECK(idx[0].second == 0);
    CHECK(idx[9].first == doctest::Approx(-1.2));
    CHECK(idx[9].second == 0);
    CHECK(idx[8].first == 3.0);
    CHECK(idx[8].second == 2);
}

TEST_CASE("closure_loss: self-consistent targets give zero loss") {
    const Quadrature q = gaussian_quadrature();
    const QuadLossContext ctx = self_consistent_ctx(q, 1.1);
    const std::vector<double> zero(12, 0.0);
    CHECK(closure_loss(zero, ctx) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("closure_loss: negative-weight penalty only") {
    const Quadrature q = gaussian_quadrature();
    QuadLossContext ctx = self_consistent_ctx(q, 1.0);
    ctx.alpha.fill(0.0);
    ctx.beta.fill(0.0);
    ctx.lambda = 1.0;
    std::vector<double> corr(12, 0.0);
    corr[2] = -(q.weights[2] + 0.1);  // drive w_2 to -0.1
    CHECK(closure_loss(corr, ctx) == doctest::Approx(0.1).epsilon(1e-14));
    ctx.lambda = 3.0;
    CHECK(closure_loss(corr, ctx) == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("closure_loss gradient matches central differences") {
    const Quadrature q = gaussian_quadrature();
    QuadLossContext ctx = self_consistent_ctx(q, 1.2);
    // perturb the targets so residuals are nonzero
    for (auto& r : ctx.rates_mc) r += 0.05;
    for (auto& v : ctx.moments_mc) v *= 1.02;

    Rng rng(std::uint64_t{31});
    std::vector<double> corr(12);
    for (auto& v : corr) v = rng.uniform(-0.05, 0.05);

    std::vector<double> grad;
    closure_loss(corr, ctx, &grad);
    REQUIRE(grad.size() == corr.size());
    const double eps = 1e-6;
    for (std::size_t k = 0; k < corr.size(); ++k) {
        std::vector<double> up = corr, dn = corr;
        up[k] += eps;
        dn[k] -= eps;
        const double fd = (closure_loss(up, ctx) - closure_loss(dn, ctx)) / (2.0 * eps);
        CHECK(grad[k] == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("full BPTT gradient matches finite differences on theta") {
    const int H = 3, N = 4;
    ClosureModel m;
    m.hidden = H;
    m.n_nodes = N;
    m.theta.assign(m.param_count(), 0.0);
    pattern_fill(m, 7);
    const auto window = sample_window(6, 3);
    const Quadrature q = gaussian_quadrature();
    QuadLossContext ctx = self_consistent_ctx(q, 1.05);
    for (auto& r : ctx.rates_mc) r += 0.03;

    const auto loss_of = [&](const std::vector<double>& theta) {
        ClosureModel probe = m;
        probe.theta = theta;
        LstmState st;
        st.reset(H);
        return closure_loss(closure_forward(probe, window, st), ctx);
    };

    LstmState st;
    st.reset(H);
    ForwardCache cache;
    const auto corr = closure_forward(m, window, st, nullptr, &cache);
    std::vector<double> gc;
    closure_loss(corr, ctx, &gc);
    std::vector<double> gt(m.param_count(), 0.0);
    closure_backward(m, cache, gc, gt);

    Rng rng(std::uint64_t{13});
    const double eps = 1e-6;
    double ref_scale = 0.0;
    for (double v : gt) ref_scale = std::max(ref_scale, std::abs(v));
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t k = static_cast<std::size_t>(rng.below(m.param_count()));
        std::vector<double> up = m.theta, dn = m.theta;
        up[k] += eps;
        dn[k] -= eps;
        const double fd = (loss_of(up) - loss_of(dn)) / (2.0 * eps);
        CHECK(std::abs(gt[k] - fd) <= 1e-5 * std::max(1.0, ref_scale));
    }
}

TEST_CASE("loss_weights are reciprocal sup-norms") {
    TrajectoryRecord rec;
    rec.times = {0.0, 0.01, 0.02};
    rec.moments = {MomentSet{1, 0, 1, 0, 0.04}, MomentSet{1.1, 0.2, 1.3, 0.1, 0.05},
                   MomentSet{0.9, -0.4, 1.2, -0.2, 0.03}};
    rec.moment_rates = {{0.1, 0, 0, 0, 0}, {-0.5, 0, 0, 0, 0}, {0.2, 0, 0, 0, 0}};
    rec.target_moments = {{1, 0, 0, 1}, {2, 0.5, 0.1, 1.1}, {1.5, -0.25, 0.05, 0.9}};
    rec.cp = {1, 1, 1};
    std::array<double, 5> alpha;
    std::array<double, 10> beta;
    loss_weights(rec, 1.4, alpha, beta);
    CHECK(alpha[0] == doctest::Approx(2.0));       // 1 / max|dmu10|
    CHECK(alpha[1] == 0.0);                        // identically-zero series
    CHECK(beta[0] == 1.0);                         // mu00 == 1
    CHECK(beta[1] == doctest::Approx(1.0 / 1.1));  // mu10
    CHECK(beta[2] == doctest::Approx(1.0 / 0.4));  // mu01, sup of |.|
    CHECK(beta[6] == doctest::Approx(0.5));        // mu30
    CHECK(beta[9] == doctest::Approx(1.0 / 1.1));  // mu_{-1.2,0}
}

TEST_CASE("adam first step moves by ~lr in the gradient sign direction") {
    Hyperparams hp;
    hp.learning_rate = 1e-3;
    AdamOptimizer opt(3, hp);
    std::vector<double> theta = {1.0, -2.0, 0.5};
    opt.step(theta, {0.4, -0.2, 0.0});
    CHECK(theta[0] == doctest::Approx(1.0 - 1e-3).epsilon(1e-4));
    CHECK(theta[1] == doctest::Approx(-2.0 + 1e-3).epsilon(1e-4));
    CHECK(theta[2] == 0.5);
}

TEST_CASE("training runs deterministically and reduces the loss") {
    std::vector<TrainingSeries> records;
    for (int f = 0; f < 2; ++f) {
        const ForcingSignal sig = sample_forcing(std::uint64_t(40 + f));
        EnsembleConfig cfg;
        cfg.n_bubbles = 60;
        cfg.t_end = 0.63;  // 64 samples -> two 32-step windows
        cfg.seed = 100 + f;
        TrajectoryRecord mc = run_ensemble(cfg, sig);
        IntegratorConfig icfg;
        icfg.t_end = cfg.t_end;
        const HybridRun base = hybrid_run(mc.moments.front(), sig, nullptr, icfg);
        records.push_back({to_record(base), std::move(mc)});
    }
    Hyperparams hp;
    hp.epochs = 4;
    hp.learning_rate = 1e-4;
    hp.window = 32;
    hp.batch_size = 2;

    const TrainResult a = train_closure(records, 6, 4, hp, 77);
    const TrainResult b = train_closure(records, 6, 4, hp, 77);
    CHECK(a.model.theta == b.model.theta);
    REQUIRE(a.epoch_loss.size() == 4);
    for (double l : a.epoch_loss) CHECK(std::isfinite(l));
    CHECK(a.epoch_loss.back() < a.epoch_loss.front());

    Hyperparams hp0 = hp;
    hp0.epochs = 0;
    const TrainResult init = train_closure(records, 6, 4, hp0, 77);
    const ClosureModel ref = ClosureModel::init(6, 4, Rng::derive_seed(77, 0));
    CHECK(init.model.theta == ref.theta);
}

TEST_CASE("model save/load round-trips bitwise") {
    ClosureModel m = ClosureModel::init(5, 4, 9);
    pattern_fill(m, 10);
    m.feat_mean = {1, 2, 3, 4, 5, 6};
    m.feat_std = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    const std::string path = "test_model_roundtrip.json";
    save_model(m, path);
    const ClosureModel r = load_model(path);
    CHECK(r.hidden == m.hidden);
    CHECK(r.n_nodes == m.n_nodes);
    CHECK(r.theta == m.theta);
    CHECK(r.feat_mean == m.feat_mean);
    CHECK(r.feat_std == m.feat_std);
    std::remove(path.c_str());
}

TEST_CASE("load_model rejects corrupt or mismatched files") {
    const std::string path = "test_model_corrupt.json";
    {
        std::ofstream out(path);
        out << "{\"format\": \"hqmom-closure\", \"version\": 1, \"hidden\": 4";
    }
    CHECK_THROWS_AS(load_model(path), ModelFormatError);
    {
        std::ofstream out(path);
        out << "{\"format\": \"something-else\"}";
    }
    CHECK_THROWS_AS(load_model(path), ModelFormatError);
    std::remove(path.c_str());
    CHECK_THROWS(load_model(path));
}
