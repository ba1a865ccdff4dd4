// Pipeline driver: sample forcings, build Monte Carlo surrogate truth,
// train the closure, evolve baseline/hybrid moment systems, and report
// error metrics.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hqmom/closure.hpp"
#include "hqmom/errors.hpp"
#include "hqmom/hybrid.hpp"
#include "hqmom/io.hpp"
#include "hqmom/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Exit codes: 0 ok, 2 usage, 3 missing input, 4 malformed config/schema,
// 5 numeric failure, 6 I/O failure.
enum ExitCode { kOk = 0, kUsage = 2, kMissingInput = 3, kBadConfig = 4, kNumeric = 5, kIo = 6 };

std::string require_file(const std::string& path) {
    if (!fs::exists(path)) throw hqmom::IoError("missing input file: " + path);
    return hqmom::read_file(path);
}

std::string index_name(const char* stem, std::size_t i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%03zu.csv", stem, i);
    return buf;
}

struct McConfig {
    hqmom::EnsembleConfig ensemble;
    std::size_t count_train = 0;  // 0 = no split recorded

    static McConfig from_json(const json& j) {
        McConfig c;
        c.ensemble.n_bubbles = j.value("n_bubbles", std::size_t{1000});
        c.ensemble.sigma_r = j.value("sigma_r", 0.05);
        c.ensemble.sigma_rdot = j.value("sigma_rdot", 0.05);
        c.ensemble.t_end = j.value("t_end", 50.0);
        c.ensemble.dt_out = j.value("dt_out", 0.01);
        c.ensemble.params.reynolds = j.value("reynolds", 1e3);
        c.ensemble.params.gamma = j.value("gamma", 1.4);
        c.ensemble.steppers.rel_tol = j.value("rel_tol", 1e-7);
        c.ensemble.steppers.dt_min = j.value("dt_min", 1e-6);
        c.count_train = j.value("count_train", std::size_t{0});
        return c;
    }
    json to_json() const {
        return {{"n_bubbles", ensemble.n_bubbles},
                {"sigma_r", ensemble.sigma_r},
                {"sigma_rdot", ensemble.sigma_rdot},
                {"t_end", ensemble.t_end},
                {"dt_out", ensemble.dt_out},
                {"reynolds", ensemble.params.reynolds},
                {"gamma", ensemble.params.gamma},
                {"rel_tol", ensemble.steppers.rel_tol},
                {"dt_min", ensemble.steppers.dt_min},
                {"count_train", count_train}};
    }
};

void run_forcing_sample(std::size_t count, std::uint64_t seed, const std::string& out,
                        const std::string& rescale, bool deterministic) {
    const auto mode = rescale == "normalize" ? hqmom::AmplitudeRescale::Normalize
                                             : hqmom::AmplitudeRescale::Cap;
    std::vector<hqmom::ForcingSignal> signals;
    signals.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        signals.push_back(hqmom::sample_forcing(hqmom::Rng::derive_seed(seed, i), mode));
    hqmom::atomic_write(out, hqmom::forcing_set_to_json(signals));
    const json cfg = {{"count", count}, {"seed", seed}, {"rescale", rescale}};
    hqmom::atomic_write(out + ".manifest.json",
                        hqmom::make_manifest("forcing sample", cfg.dump(), {}, deterministic));
}

void run_mc(const std::string& forcings_path, const McConfig& cfg, std::uint64_t seed,
            const std::string& out_dir, bool deterministic) {
    const std::string forcings_text = require_file(forcings_path);
    const auto signals = hqmom::forcing_set_from_json(forcings_text);
    fs::create_directories(out_dir);
    // Keep the forcings with the data: train regenerates the baseline input
    // trajectories from them.
    hqmom::atomic_write(fs::path(out_dir) / "forcings.json", forcings_text);

    json seeds = json::array();
    for (std::size_t i = 0; i < signals.size(); ++i) {
        hqmom::EnsembleConfig ecfg = cfg.ensemble;
        ecfg.seed = hqmom::Rng::derive_seed(seed, i);
        seeds.push_back({{"forcing_seed", signals[i].seed}, {"ensemble_seed", ecfg.seed}});
        const hqmom::TrajectoryRecord rec = hqmom::run_ensemble(ecfg, signals[i]);
        hqmom::atomic_write(fs::path(out_dir) / index_name("traj", i),
                            hqmom::trajectory_to_csv(rec));
    }

    json split = json::object();
    if (cfg.count_train > 0 && cfg.count_train < signals.size()) {
        const auto plan = hqmom::plan_dataset(signals.size(), cfg.count_train, seed);
        split = {{"train", plan.train_indices}, {"test", plan.test_indices}};
    }
    json manifest_cfg = cfg.to_json();
    manifest_cfg["master_seed"] = seed;
    manifest_cfg["seeds"] = seeds;
    manifest_cfg["split"] = split;
    hqmom::atomic_write(
        fs::path(out_dir) / "manifest.json",
        hqmom::make_manifest("mc run", manifest_cfg.dump(),
                             {{fs::path(forcings_path).filename().string(),
                               hqmom::content_digest(forcings_text)}},
                             deterministic));
}

std::vector<std::size_t> manifest_split(const json& manifest, const char* key,
                                        std::size_t n_records) {
    std::vector<std::size_t> idx;
    const auto& cfg = manifest.at("config");
    if (cfg.contains("split") && cfg["split"].contains(key)) {
        for (const auto& v : cfg["split"][key]) idx.push_back(v.get<std::size_t>());
    } else if (std::string(key) == "train") {
        for (std::size_t i = 0; i < n_records; ++i) idx.push_back(i);
    }
    return idx;
}

void run_train(const std::string& data_dir, const std::string& hyper_path,
               const std::string& out_path, std::uint64_t seed, bool deterministic) {
    const std::string manifest_text = require_file((fs::path(data_dir) / "manifest.json").string());
    json manifest;
    try {
        manifest = json::parse(manifest_text);
    } catch (const json::exception& e) {
        throw hqmom::SchemaError(std::string("train: bad data manifest: ") + e.what());
    }

    hqmom::Hyperparams hyper;
    int hidden = 32, n_nodes = 4;
    json hyper_json = json::object();
    if (!hyper_path.empty()) {
        hyper_json = json::parse(require_file(hyper_path));
        hyper.epochs = hyper_json.value("epochs", hyper.epochs);
        hyper.learning_rate = hyper_json.value("learning_rate", hyper.learning_rate);
        hyper.batch_size = hyper_json.value("batch_size", hyper.batch_size);
        hyper.dropout = hyper_json.value("dropout", hyper.dropout);
        hyper.recurrent_dropout = hyper_json.value("recurrent_dropout", hyper.recurrent_dropout);
        hyper.window = hyper_json.value("window", hyper.window);
        hyper.lambda = hyper_json.value("lambda", hyper.lambda);
        hyper.out_scale = hyper_json.value("out_scale", hyper.out_scale);
        hidden = hyper_json.value("hidden", hidden);
        n_nodes = hyper_json.value("n_nodes", n_nodes);
    }

    std::size_t n_records = 0;
    while (fs::exists(fs::path(data_dir) / index_name("traj", n_records))) ++n_records;
    if (n_records == 0) throw hqmom::IoError("train: no trajectory records in " + data_dir);

    const auto signals = hqmom::forcing_set_from_json(
        require_file((fs::path(data_dir) / "forcings.json").string()));

    std::vector<hqmom::TrainingSeries> train_series;
    for (const std::size_t i : manifest_split(manifest, "train", n_records)) {
        if (i >= signals.size())
            throw hqmom::SchemaError("train: record " + std::to_string(i) +
                                     " has no matching forcing signal");
        hqmom::TrajectoryRecord mc = hqmom::trajectory_from_csv(
            require_file((fs::path(data_dir) / index_name("traj", i)).string()));
        hqmom::IntegratorConfig icfg;
        icfg.t_end = mc.times.back();
        icfg.n_nodes = n_nodes;
        const hqmom::HybridRun base = hqmom::hybrid_run(mc.moments.front(), signals[i],
                                                        nullptr, icfg);
        train_series.push_back({hqmom::to_record(base), std::move(mc)});
    }

    const hqmom::TrainResult result = hqmom::train_closure(train_series, hidden, n_nodes, hyper, seed);
    hqmom::save_model(result.model, out_path);

    json cfg = hyper_json;
    cfg["hidden"] = hidden;
    cfg["n_nodes"] = n_nodes;
    cfg["seed"] = seed;
    cfg["epoch_loss"] = result.epoch_loss;
    hqmom::atomic_write(out_path + ".manifest.json",
                        hqmom::make_manifest("train", cfg.dump(),
                                             {{"manifest.json",
                                               hqmom::content_digest(manifest_text)}},
                                             deterministic));
}

void run_evolve(const std::string& mode, const std::string& model_path,
                const std::string& forcings_path, const std::string& out_dir, double t_end,
                double tau_tol, double sigma_r, double sigma_rdot, std::size_t n_nodes,
                bool deterministic) {
    const std::string forcings_text = require_file(forcings_path);
    const auto signals = hqmom::forcing_set_from_json(forcings_text);

    std::optional<hqmom::ClosureModel> model;
    if (mode == "hybrid") {
        if (model_path.empty())
            throw hqmom::SchemaError("evolve: --model is required in hybrid mode");
        require_file(model_path);
        model = hqmom::load_model(model_path);
    } else if (mode != "baseline") {
        throw hqmom::SchemaError("evolve: mode must be baseline or hybrid");
    }

    hqmom::IntegratorConfig icfg;
    icfg.t_end = t_end;
    icfg.tau_tol = tau_tol;
    icfg.n_nodes = model ? static_cast<std::size_t>(model->n_nodes) : n_nodes;
    const hqmom::MomentSet m0 = hqmom::gaussian_initial_moments(sigma_r, sigma_rdot);

    fs::create_directories(out_dir);
    std::size_t clamped = 0;
    for (std::size_t i = 0; i < signals.size(); ++i) {
        const hqmom::HybridRun run =
            hqmom::hybrid_run(m0, signals[i], model ? &*model : nullptr, icfg);
        clamped += run.realizability_clamps > 0 ? 1 : 0;
        hqmom::atomic_write(fs::path(out_dir) / index_name(mode.c_str(), i),
                            hqmom::hybrid_run_to_csv(run));
    }

    const json cfg = {{"mode", mode},           {"t_end", t_end},
                      {"tau_tol", tau_tol},     {"n_nodes", icfg.n_nodes},
                      {"dt_max", icfg.dt_max},  {"nn_grid_dt", icfg.nn_grid_dt},
                      {"sigma_r", sigma_r},     {"sigma_rdot", sigma_rdot},
                      {"runs_with_realizability_clamps", clamped}};
    // manifests record input files by name only so artifact trees produced
    // in different directories stay byte-identical
    std::vector<std::pair<std::string, std::string>> digests = {
        {fs::path(forcings_path).filename().string(), hqmom::content_digest(forcings_text)}};
    if (model)
        digests.emplace_back(fs::path(model_path).filename().string(),
                             hqmom::content_digest(hqmom::read_file(model_path)));
    hqmom::atomic_write(fs::path(out_dir) / (mode + "_manifest.json"),
                        hqmom::make_manifest("evolve", cfg.dump(), digests, deterministic));
}

const std::vector<std::string>& moment_names() {
    static const std::vector<std::string> names = {"mu10", "mu01", "mu20", "mu11", "mu02",
                                                   "mu30", "mu21", "mu32", "mu_pbw"};
    return names;
}

std::vector<double> moment_series(const hqmom::TrajectoryRecord& rec, std::size_t c,
                                  std::size_t lo, std::size_t hi) {
    std::vector<double> out;
    out.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i)
        out.push_back(c < 5 ? rec.moments[i].as_array()[c] : rec.target_moments[i][c - 5]);
    return out;
}

void run_report(const std::string& runs_dir, const std::string& mc_dir, const std::string& out_dir,
                const std::string& window, bool deterministic) {
    fs::create_directories(out_dir);
    const std::size_t n_moments = moment_names().size();

    json cases = json::array();
    std::vector<std::vector<double>> eps_q(n_moments), eps_m(n_moments), q_vals(n_moments);

    for (std::size_t i = 0;; ++i) {
        const fs::path mc_path = fs::path(mc_dir) / index_name("traj", i);
        const fs::path base_path = fs::path(runs_dir) / index_name("baseline", i);
        const fs::path ml_path = fs::path(runs_dir) / index_name("hybrid", i);
        if (!fs::exists(mc_path) || !fs::exists(base_path)) break;
        const hqmom::TrajectoryRecord mc = hqmom::trajectory_from_csv(hqmom::read_file(mc_path));
        const hqmom::TrajectoryRecord qb =
            hqmom::trajectory_from_csv(hqmom::read_file(base_path));
        const bool has_ml = fs::exists(ml_path);
        const hqmom::TrajectoryRecord ml =
            has_ml ? hqmom::trajectory_from_csv(hqmom::read_file(ml_path))
                   : hqmom::TrajectoryRecord{};

        const std::size_t n = std::min(mc.size(), qb.size());
        std::size_t lo = 0, hi = n;
        if (!window.empty()) {
            const auto colon = window.find(':');
            if (colon == std::string::npos)
                throw hqmom::SchemaError("report: --window expects start:end");
            const double t0 = hqmom::parse_double(window.substr(0, colon));
            const double t1 = hqmom::parse_double(window.substr(colon + 1));
            const double dt = mc.times[1] - mc.times[0];
            lo = static_cast<std::size_t>(std::max(0.0, std::ceil(t0 / dt)));
            hi = std::min(n, static_cast<std::size_t>(std::floor(t1 / dt)) + 1);
        }

        json entry;
        entry["case"] = i;
        for (std::size_t c = 0; c < n_moments; ++c) {
            const auto mc_s = moment_series(mc, c, lo, hi);
            const double e_q = hqmom::l2_error(moment_series(qb, c, lo, hi), mc_s);
            entry["eps_qbmm"][moment_names()[c]] = e_q;
            eps_q[c].push_back(e_q);
            if (has_ml) {
                const double e_m = hqmom::l2_error(moment_series(ml, c, lo, hi), mc_s);
                entry["eps_ml"][moment_names()[c]] = e_m;
                entry["Q"][moment_names()[c]] = hqmom::improvement_q(e_q, e_m);
                eps_m[c].push_back(e_m);
                q_vals[c].push_back(hqmom::improvement_q(e_q, e_m));
            }
        }
        cases.push_back(entry);

        // Plot data: time series of MC / baseline / hybrid per moment.
        std::string plot = "t";
        for (const auto& name : moment_names())
            plot += "," + name + "_mc," + name + "_qbmm" + (has_ml ? "," + name + "_ml" : "");
        plot += '\n';
        for (std::size_t r = lo; r < hi; ++r) {
            plot += hqmom::format_double(mc.times[r]);
            for (std::size_t c = 0; c < n_moments; ++c) {
                plot += ',' + hqmom::format_double(moment_series(mc, c, r, r + 1)[0]);
                plot += ',' + hqmom::format_double(moment_series(qb, c, r, r + 1)[0]);
                if (has_ml) plot += ',' + hqmom::format_double(moment_series(ml, c, r, r + 1)[0]);
            }
            plot += '\n';
        }
        hqmom::atomic_write(fs::path(out_dir) / index_name("plotdata", i), plot);
    }
    if (cases.empty()) throw hqmom::IoError("report: no matching runs under " + runs_dir);

    json summary;
    summary["cases"] = cases;
    std::string hist_csv = "moment,bin_lo,bin_hi,count\n";
    std::string medians_csv = "moment,median_eps_qbmm,median_eps_ml,C\n";
    for (std::size_t c = 0; c < n_moments; ++c) {
        if (q_vals[c].empty()) continue;
        const double q_min = *std::min_element(q_vals[c].begin(), q_vals[c].end());
        const auto edges = hqmom::uniform_edges(std::min(q_min, 99.0), 100.0, 10);
        const auto counts = hqmom::histogram(q_vals[c], edges);
        for (std::size_t b = 0; b < counts.size(); ++b)
            hist_csv += moment_names()[c] + ',' + hqmom::format_double(edges[b]) + ',' +
                        hqmom::format_double(edges[b + 1]) + ',' + std::to_string(counts[b]) +
                        '\n';
        const double ratio = hqmom::median_ratio_c(eps_m[c], eps_q[c]);
        summary["C"][moment_names()[c]] = ratio;
        std::vector<double> sq = eps_q[c], sm = eps_m[c];
        std::sort(sq.begin(), sq.end());
        std::sort(sm.begin(), sm.end());
        const auto med = [](const std::vector<double>& v) {
            return v.size() % 2 ? v[v.size() / 2]
                                : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
        };
        medians_csv += moment_names()[c] + ',' + hqmom::format_double(med(sq)) + ',' +
                       hqmom::format_double(med(sm)) + ',' + hqmom::format_double(ratio) + '\n';
    }
    hqmom::atomic_write(fs::path(out_dir) / "report.json", summary.dump(2));
    hqmom::atomic_write(fs::path(out_dir) / "histogram_Q.csv", hist_csv);
    hqmom::atomic_write(fs::path(out_dir) / "medians.csv", medians_csv);
    hqmom::atomic_write(fs::path(out_dir) / "manifest.json",
                        hqmom::make_manifest("report", json{{"window", window}}.dump(), {},
                                             deterministic));
}

void run_repro(const std::string& scale, std::uint64_t seed, const std::string& out_dir) {
    if (scale != "desk") throw hqmom::SchemaError("repro: only --scale desk is supported");
    const fs::path out(out_dir);
    fs::create_directories(out);

    run_forcing_sample(8, seed, (out / "forcings.json").string(), "cap", true);

    McConfig mc;
    mc.ensemble.n_bubbles = 50;
    mc.ensemble.t_end = 6.0;
    mc.count_train = 4;
    run_mc((out / "forcings.json").string(), mc, seed, (out / "data").string(), true);

    const json hyper = {{"epochs", 5}, {"hidden", 8}, {"n_nodes", 4}, {"window", 256}};
    hqmom::atomic_write(out / "hyper.json", hyper.dump(2));
    run_train((out / "data").string(), (out / "hyper.json").string(),
              (out / "model.ckpt").string(), seed, true);

    run_evolve("baseline", "", (out / "forcings.json").string(), (out / "runs").string(), 6.0,
               1e-6, mc.ensemble.sigma_r, mc.ensemble.sigma_rdot, 4, true);
    run_evolve("hybrid", (out / "model.ckpt").string(), (out / "forcings.json").string(),
               (out / "runs").string(), 6.0, 1e-6, mc.ensemble.sigma_r, mc.ensemble.sigma_rdot, 4,
               true);
    run_report((out / "runs").string(), (out / "data").string(), (out / "report").string(), "",
               true);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid quadrature moment method pipeline"};
    app.require_subcommand(1);

    // forcing sample
    auto* forcing = app.add_subcommand("forcing", "forcing-set operations");
    auto* fsample = forcing->add_subcommand("sample", "sample a forcing set");
    std::size_t f_count = 200;
    std::uint64_t f_seed = 1;
    std::string f_out = "forcings.json", f_rescale = "cap";
    fsample->add_option("--count", f_count, "number of signals");
    fsample->add_option("--seed", f_seed, "master seed");
    fsample->add_option("--out", f_out, "output JSON path");
    fsample->add_option("--rescale", f_rescale, "amplitude rescale: cap|normalize")
        ->check(CLI::IsMember({"cap", "normalize"}));

    // mc run
    auto* mc = app.add_subcommand("mc", "Monte Carlo surrogate truth");
    auto* mcrun = mc->add_subcommand("run", "run ensembles for a forcing set");
    std::string mc_forcings = "forcings.json", mc_config, mc_out = "data";
    std::uint64_t mc_seed = 1;
    mcrun->add_option("--forcings", mc_forcings, "forcing set JSON");
    mcrun->add_option("--config", mc_config, "ensemble config JSON");
    mcrun->add_option("--out", mc_out, "output directory");
    mcrun->add_option("--seed", mc_seed, "ensemble master seed");

    // train
    auto* train = app.add_subcommand("train", "train the recurrent closure");
    std::string tr_data = "data", tr_hyper, tr_out = "model.ckpt";
    std::uint64_t tr_seed = 1;
    train->add_option("--data", tr_data, "MC data directory");
    train->add_option("--hyper", tr_hyper, "hyperparameter JSON");
    train->add_option("--out", tr_out, "checkpoint path");
    train->add_option("--seed", tr_seed, "training seed");

    // evolve
    auto* evolve = app.add_subcommand("evolve", "evolve the moment system");
    std::string ev_mode = "baseline", ev_model, ev_forcings = "forcings.json", ev_out = "runs";
    double ev_tend = 50.0, ev_tau = 1e-6, ev_sr = 0.05, ev_srd = 0.05;
    std::size_t ev_nodes = 4;
    evolve->add_option("--mode", ev_mode, "baseline|hybrid")
        ->check(CLI::IsMember({"baseline", "hybrid"}));
    evolve->add_option("--model", ev_model, "closure checkpoint (hybrid mode)");
    evolve->add_option("--forcings", ev_forcings, "forcing set JSON");
    evolve->add_option("--out", ev_out, "output directory");
    evolve->add_option("--t-end", ev_tend, "end time (natural periods)");
    evolve->add_option("--tau-tol", ev_tau, "step-doubling tolerance");
    evolve->add_option("--sigma-r", ev_sr, "initial radius std");
    evolve->add_option("--sigma-rdot", ev_srd, "initial velocity std");
    evolve->add_option("--nodes", ev_nodes, "quadrature node count");

    // report
    auto* report = app.add_subcommand("report", "error metrics and plot data");
    std::string rp_runs = "runs", rp_mc = "data", rp_out = "report", rp_window;
    report->add_option("--runs", rp_runs, "evolve output directory");
    report->add_option("--mc", rp_mc, "MC data directory");
    report->add_option("--out", rp_out, "report directory");
    report->add_option("--window", rp_window, "time window start:end");

    // repro
    auto* repro = app.add_subcommand("repro", "deterministic desk-scale pipeline");
    std::string re_scale = "desk", re_out = "repro_out";
    std::uint64_t re_seed = 7;
    repro->add_option("--scale", re_scale, "pipeline scale");
    repro->add_option("--seed", re_seed, "master seed");
    repro->add_option("--out", re_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return kUsage;
    }

    try {
        if (fsample->parsed()) {
            run_forcing_sample(f_count, f_seed, f_out, f_rescale, false);
        } else if (mcrun->parsed()) {
            McConfig cfg;
            if (!mc_config.empty()) cfg = McConfig::from_json(json::parse(require_file(mc_config)));
            run_mc(mc_forcings, cfg, mc_seed, mc_out, false);
        } else if (train->parsed()) {
            run_train(tr_data, tr_hyper, tr_out, tr_seed, false);
        } else if (evolve->parsed()) {
            run_evolve(ev_mode, ev_model, ev_forcings, ev_out, ev_tend, ev_tau, ev_sr, ev_srd,
                       ev_nodes, false);
        } else if (report->parsed()) {
            run_report(rp_runs, rp_mc, rp_out, rp_window, false);
        } else if (repro->parsed()) {
            run_repro(re_scale, re_seed, re_out);
        } else {
            std::cerr << "error: usage: no subcommand action given\n";
            return kUsage;
        }
    } catch (const hqmom::SchemaError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return kBadConfig;
    } catch (const hqmom::ModelFormatError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return kBadConfig;
    } catch (const hqmom::NonRealizableError& e) {
        std::cerr << "error: numeric: " << e.what() << "\n";
        return kNumeric;
    } catch (const hqmom::IntegrationError& e) {
        std::cerr << "error: numeric: " << e.what() << "\n";
        return kNumeric;
    } catch (const hqmom::DomainError& e) {
        std::cerr << "error: numeric: " << e.what() << "\n";
        return kNumeric;
    } catch (const hqmom::IoError& e) {
        const std::string what = e.what();
        if (what.rfind("missing input", 0) == 0) {
            std::cerr << "error: missing-input: " << what << "\n";
            return kMissingInput;
        }
        std::cerr << "error: io: " << what << "\n";
        return kIo;
    } catch (const json::exception& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return kBadConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return kOk;
}
