#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "nlsp/csv.hpp"
#include "nlsp/experiment.hpp"
#include "nlsp/fem.hpp"
#include "nlsp/instance_io.hpp"
#include "nlsp/loss.hpp"
#include "nlsp/mesh.hpp"
#include "nlsp/mlp.hpp"
#include "nlsp/parallel.hpp"
#include "nlsp/qr.hpp"
#include "nlsp/sa.hpp"
#include "nlsp/smoothing.hpp"
#include "nlsp/stats.hpp"
#include "nlsp/stiefel.hpp"
#include "nlsp/svd.hpp"
#include "nlsp/svg.hpp"
#include "nlsp/train.hpp"
#include "nlsp/two_level.hpp"

namespace nlsp {

namespace detail {

class StopWatch {
public:
    StopWatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline std::string instance_dir(const std::string& root, const std::string& split,
                                std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%05zu", index);
    return root + "/" + split + "/inst_" + buf;
}

inline std::string checkpoint_path(const ExperimentConfig& cfg, LossKind kind) {
    return cfg.out_dir + "/model_" + (kind == LossKind::Nlss ? "nlss" : "subspace") + ".ckpt";
}

inline const char* method_color(Method m) {
    switch (m) {
        case Method::Nlss: return "#d62728";
        case Method::Subspace: return "#1f77b4";
        case Method::Svd: return "#2ca02c";
        case Method::Sa: return "#9467bd";
    }
    return "#000000";
}

} // namespace detail

// --- gen --------------------------------------------------------------------

// Deterministic corpus: one directory per instance, disjoint train/test seed
// ranges, a corpus manifest listing every seed. Re-running with the same
// config rewrites identical bytes.
inline void cmd_gen(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
    cfg.validate();
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);

    Manifest corpus = cfg.to_manifest();
    auto build_split = [&](const std::string& split, std::size_t count,
                           const std::function<std::uint64_t(std::size_t)>& seed_of) {
        std::vector<std::string> seeds;
        seeds.resize(count);
        parallel_for(count, [&](std::size_t i) {
            const std::uint64_t seed = seed_of(i);
            try {
                const auto inst =
                    make_instance(cfg.family, cfg.grid_n, cfg.jitter, seed, cfg.fem_options());
                save_instance(inst, detail::instance_dir(cfg.out_dir, split, i));
            } catch (const MeshError& e) {
                throw MeshError(std::string(e.what()) + " (instance seed " +
                                std::to_string(seed) + ")");
            }
            seeds[i] = std::to_string(seed);
        });
        std::string joined;
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            if (i) joined += ",";
            joined += seeds[i];
        }
        corpus.set(split + "_seeds", joined);
    };
    build_split("train", cfg.train_count, [&](std::size_t i) { return cfg.train_seed(i); });
    build_split("test", cfg.test_count, [&](std::size_t i) { return cfg.test_seed(i); });
    corpus.save(cfg.out_dir + "/corpus.txt");
    log << "gen: wrote " << cfg.train_count << " train + " << cfg.test_count
        << " test instances under " << cfg.out_dir << "\n";
}

// --- shared loading ---------------------------------------------------------

struct LoadedInstance {
    PdeInstance pde;
    SmoothedVectorSet smoothed;
};

inline LoadedInstance load_instance_with_vectors(const ExperimentConfig& cfg,
                                                 const std::string& split, std::size_t index) {
    LoadedInstance out;
    out.pde = load_instance(detail::instance_dir(cfg.out_dir, split, index));
    out.smoothed = generate_smoothed_vectors(
        out.pde.matrix, out.pde.mesh.boundary_mask, cfg.k_vectors, cfg.smoothing_sweeps,
        cfg.omega, ExperimentConfig::smoothing_seed(out.pde.seed));
    return out;
}

inline std::uint64_t corpus_digest(const ExperimentConfig& cfg, const std::string& split,
                                   std::size_t count) {
    std::uint64_t h = 14695981039346656037ULL;
    for (std::size_t i = 0; i < count; ++i)
        h = fnv1a_file(detail::instance_dir(cfg.out_dir, split, i) + "/matrix.mtx", h);
    return h;
}

// --- train ------------------------------------------------------------------

// One checkpoint per requested loss kind (NLSS / Subspace in the methods
// list), each trained to full rank K and truncated later, per-epoch loss CSV
// alongside.
inline void cmd_train(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
    cfg.validate();
    std::vector<LossKind> kinds;
    if (cfg.wants(Method::Nlss)) kinds.push_back(LossKind::Nlss);
    if (cfg.wants(Method::Subspace)) kinds.push_back(LossKind::Subspace);
    if (kinds.empty())
        throw ValidationError("train: no learned method (NLSS or Subspace) in methods list");

    std::vector<DenseMatrix> corpus;
    corpus.reserve(cfg.train_count);
    for (std::size_t i = 0; i < cfg.train_count; ++i)
        corpus.push_back(load_instance_with_vectors(cfg, "train", i).smoothed.s);
    const std::uint64_t digest = corpus_digest(cfg, "train", cfg.train_count);

    for (LossKind kind : kinds) {
        TrainConfig tc;
        tc.rank = cfg.train_rank; // 0 = full rank
        tc.epochs = cfg.epochs;
        tc.learning_rate = cfg.learning_rate;
        tc.permutation_augmentation = cfg.permutation_augmentation;
        tc.seed = mix_seed(cfg.seed, kind == LossKind::Nlss ? 0x4e4c5353 : 0x53554253);
        tc.loss = kind;
        tc.hidden = cfg.hidden;
        detail::StopWatch watch;
        auto result = train(corpus, tc);
        log << "train[" << loss_name(kind) << "]: " << cfg.epochs << " epochs in "
            << static_cast<int>(watch.ms() / 1000.0) << " s, final loss "
            << result.epoch_loss.back() << "\n";

        Manifest m = cfg.to_manifest();
        m.set("loss_kind", loss_name(kind));
        m.set("corpus_digest", digest);
        m.set("train_seed", tc.seed);
        result.model.save(detail::checkpoint_path(cfg, kind), m.to_string());

        CsvTable history;
        history.comments = {"per-epoch mean training loss"};
        history.header = {"epoch", "loss"};
        for (std::size_t e = 0; e < result.epoch_loss.size(); ++e)
            history.add_row({csv_cell(e), csv_cell(result.epoch_loss[e])});
        save_csv(history,
                 cfg.out_dir + "/loss_history_" + (kind == LossKind::Nlss ? "nlss" : "subspace") +
                     ".csv");
    }
}

// --- energy -----------------------------------------------------------------

struct EnergyCurve {
    // gap[method][rank index] summarizes (SVD energy - method energy)
    std::vector<Method> methods;
    std::vector<std::size_t> ranks;
    std::vector<std::vector<QuartileSummary>> gap;
};

inline DenseMatrix truncated_orthonormal(const DenseMatrix& full, std::size_t rank) {
    return qr_thin(first_cols(full, rank)).q;
}

inline EnergyCurve compute_energy_curve(const ExperimentConfig& cfg, std::ostream& log) {
    cfg.validate();
    std::vector<Method> methods;
    for (Method m : cfg.methods)
        if (m != Method::Sa) methods.push_back(m); // SA has no tunable rank
    MlpModel nlss_model, subspace_model;
    if (cfg.wants(Method::Nlss)) nlss_model = MlpModel::load(detail::checkpoint_path(cfg, LossKind::Nlss));
    if (cfg.wants(Method::Subspace))
        subspace_model = MlpModel::load(detail::checkpoint_path(cfg, LossKind::Subspace));

    // per instance, per method, per rank energies; instance-level parallelism
    std::vector<std::vector<std::vector<double>>> gaps(
        methods.size(),
        std::vector<std::vector<double>>(cfg.ranks.size(),
                                         std::vector<double>(cfg.test_count, 0.0)));
    parallel_for(cfg.test_count, [&](std::size_t t) {
        const auto loaded = load_instance_with_vectors(cfg, "test", t);
        const auto& s = loaded.smoothed.s;
        const auto svd = svd_oracle(s);
        std::vector<double> svd_energy(cfg.ranks.size());
        for (std::size_t r = 0; r < cfg.ranks.size(); ++r)
            svd_energy[r] =
                captured_energy(truncated_orthonormal(svd.left_vectors, cfg.ranks[r]), s);
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            DenseMatrix full;
            switch (methods[mi]) {
                case Method::Nlss: full = infer_basis(nlss_model, s); break;
                case Method::Subspace: full = infer_basis(subspace_model, s); break;
                case Method::Svd: full = first_cols(svd.left_vectors, cfg.k_vectors); break;
                case Method::Sa: continue;
            }
            for (std::size_t r = 0; r < cfg.ranks.size(); ++r) {
                const double e = captured_energy(truncated_orthonormal(full, cfg.ranks[r]), s);
                gaps[mi][r][t] = svd_energy[r] - e;
            }
        }
    });

    EnergyCurve curve;
    curve.methods = methods;
    curve.ranks = cfg.ranks;
    curve.gap.resize(methods.size());
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        curve.gap[mi].resize(cfg.ranks.size());
        for (std::size_t r = 0; r < cfg.ranks.size(); ++r)
            curve.gap[mi][r] = quartiles(gaps[mi][r]);
    }
    log << "energy: evaluated " << methods.size() << " methods at " << cfg.ranks.size()
        << " ranks over " << cfg.test_count << " test instances\n";
    return curve;
}

inline void cmd_energy(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
    const auto curve = compute_energy_curve(cfg, log);
    CsvTable out;
    out.comments = {"captured-energy gap to the exact SVD basis, per truncation rank",
                    "quantiles: lower interpolation, sorted[floor((n-1) q)]"};
    out.header = {"method", "rank", "gap_median", "gap_q1", "gap_q3"};
    for (std::size_t mi = 0; mi < curve.methods.size(); ++mi)
        for (std::size_t r = 0; r < curve.ranks.size(); ++r)
            out.add_row({method_name(curve.methods[mi]), csv_cell(curve.ranks[r]),
                         csv_cell(curve.gap[mi][r].median), csv_cell(curve.gap[mi][r].q1),
                         csv_cell(curve.gap[mi][r].q3)});
    save_csv(out, cfg.out_dir + "/energy.csv");

    SvgLinePlot plot("Captured-energy gap to SVD", "rank", "SVD energy - method energy");
    for (std::size_t mi = 0; mi < curve.methods.size(); ++mi) {
        SvgSeries s;
        s.label = method_name(curve.methods[mi]);
        s.color = detail::method_color(curve.methods[mi]);
        for (std::size_t r = 0; r < curve.ranks.size(); ++r) {
            s.x.push_back(static_cast<double>(curve.ranks[r]));
            s.y.push_back(curve.gap[mi][r].median);
            s.y_low.push_back(curve.gap[mi][r].q1);
            s.y_high.push_back(curve.gap[mi][r].q3);
        }
        plot.add_series(std::move(s));
    }
    plot.save(cfg.out_dir + "/energy.svg");
    Manifest m = cfg.to_manifest();
    m.save(cfg.out_dir + "/energy_manifest.txt");
}

// --- bench ------------------------------------------------------------------

struct BenchRow {
    std::string method;
    std::size_t coarse_dim = 0;
    std::uint64_t seed = 0;
    std::size_t iterations = 0;
    bool converged = false;
    double smooth_ms = 0.0;
    double inference_ms = 0.0;
    double setup_ms = 0.0;
    double solve_ms = 0.0;
    double total_ms = 0.0;
};

// Times one method at one coarse dimension on one instance: basis
// construction (inference), preconditioner assembly (setup), PCG (solve).
// The smoothed-vector accumulation joins the total whenever the method
// consumes S.
inline BenchRow bench_single(const ExperimentConfig& cfg, const PdeInstance& inst,
                             const SmoothedVectorSet* smoothed, double smooth_ms, Method method,
                             std::size_t rank, const MlpModel* model) {
    BenchRow row;
    row.method = method_name(method);
    row.seed = inst.seed;
    try {
        detail::StopWatch inf_watch;
        DenseMatrix basis;
        switch (method) {
            case Method::Nlss:
            case Method::Subspace:
                basis = first_cols(infer_basis(*model, smoothed->s), rank);
                break;
            case Method::Svd: {
                const auto svd = svd_oracle(smoothed->s);
                basis = first_cols(svd.left_vectors, rank);
                break;
            }
            case Method::Sa:
                basis = sa_prolongator(inst.matrix, cfg.sa_theta, cfg.omega);
                break;
        }
        row.inference_ms = inf_watch.ms();

        detail::StopWatch setup_watch;
        TwoLevelPreconditioner precond(inst.matrix, basis, cfg.omega, cfg.nu1, cfg.nu2);
        row.setup_ms = setup_watch.ms();
        row.coarse_dim = precond.coarse_dim();

        detail::StopWatch solve_watch;
        const auto result = pcg(inst.matrix, inst.rhs, precond, cfg.delta,
                                cfg.max_iters_factor * inst.matrix.dim());
        row.solve_ms = solve_watch.ms();
        row.iterations = result.report.iterations;
        row.converged = result.report.converged;
        const bool uses_smoothed = method != Method::Sa;
        row.smooth_ms = uses_smoothed ? smooth_ms : 0.0;
        row.total_ms = row.smooth_ms + row.inference_ms + row.setup_ms + row.solve_ms;
    } catch (const NumericError&) {
        row.converged = false; // recorded as a failed row, the run continues
    }
    return row;
}

inline std::vector<BenchRow> run_bench(const ExperimentConfig& cfg, std::ostream& log) {
    cfg.validate();
    MlpModel nlss_model, subspace_model;
    if (cfg.wants(Method::Nlss)) nlss_model = MlpModel::load(detail::checkpoint_path(cfg, LossKind::Nlss));
    if (cfg.wants(Method::Subspace))
        subspace_model = MlpModel::load(detail::checkpoint_path(cfg, LossKind::Subspace));

    std::vector<std::vector<BenchRow>> per_instance(cfg.test_count);
    parallel_for(cfg.test_count, [&](std::size_t t) {
        detail::StopWatch smooth_watch;
        const auto loaded = load_instance_with_vectors(cfg, "test", t);
        const double smooth_ms = smooth_watch.ms();
        for (Method method : cfg.methods) {
            if (method == Method::Sa) {
                per_instance[t].push_back(bench_single(cfg, loaded.pde, &loaded.smoothed,
                                                       smooth_ms, method, 0, nullptr));
                continue;
            }
            const MlpModel* model = method == Method::Nlss       ? &nlss_model
                                    : method == Method::Subspace ? &subspace_model
                                                                 : nullptr;
            for (std::size_t rank : cfg.ranks)
                per_instance[t].push_back(
                    bench_single(cfg, loaded.pde, &loaded.smoothed, smooth_ms, method, rank,
                                 model));
        }
    });

    std::vector<BenchRow> rows;
    for (auto& batch : per_instance)
        for (auto& r : batch) rows.push_back(std::move(r));
    log << "bench: " << rows.size() << " solves over " << cfg.test_count << " instances\n";
    return rows;
}

inline void save_bench_results(const ExperimentConfig& cfg, const std::vector<BenchRow>& rows) {
    CsvTable results;
    results.comments = {"one row per instance x method x coarse dimension",
                        "total includes smoothed-vector accumulation when the method uses S"};
    results.header = {"method",     "family",       "N",        "K",
                      "n_c",        "seed",         "iterations", "converged",
                      "inference_ms", "setup_ms",   "solve_ms", "total_ms"};
    for (const auto& r : rows)
        results.add_row({r.method, family_name(cfg.family), csv_cell(cfg.grid_n),
                         csv_cell(cfg.k_vectors), csv_cell(r.coarse_dim), csv_cell(r.seed),
                         csv_cell(r.iterations), csv_cell(r.converged), csv_cell(r.inference_ms),
                         csv_cell(r.setup_ms), csv_cell(r.solve_ms), csv_cell(r.total_ms)});
    save_csv(results, cfg.out_dir + "/results.csv");

    // Aggregate per method x n_c in the tables' layout. SA's coarse dimension
    // is emergent and varies across instances, so SA collapses into a single
    // row carrying its median n_c.
    CsvTable summary;
    summary.comments = {"quantiles: lower interpolation, sorted[floor((n-1) q)]",
                        "SA coarse dimension is emergent; its n_c column is a median"};
    summary.header = {"method",          "n_c",          "iters_median", "solve_ms_median",
                      "total_ms_median", "total_ms_q1",  "total_ms_q3",  "converged_all"};
    std::vector<std::pair<std::string, std::size_t>> groups;
    for (const auto& r : rows) {
        const auto key = std::make_pair(r.method, r.method == "SA" ? 0 : r.coarse_dim);
        bool seen = false;
        for (const auto& g : groups)
            if (g == key) seen = true;
        if (!seen) groups.push_back(key);
    }
    for (const auto& [method, nc] : groups) {
        std::vector<double> iters, solve, total, dims;
        bool all_converged = true;
        for (const auto& r : rows) {
            if (r.method != method || (method != "SA" && r.coarse_dim != nc)) continue;
            iters.push_back(static_cast<double>(r.iterations));
            solve.push_back(r.solve_ms);
            total.push_back(r.total_ms);
            dims.push_back(static_cast<double>(r.coarse_dim));
            all_converged = all_converged && r.converged;
        }
        const auto tq = quartiles(total);
        const std::size_t reported_nc =
            method == "SA" ? static_cast<std::size_t>(median_lower(dims)) : nc;
        summary.add_row({method, csv_cell(reported_nc), csv_cell(median_lower(iters)),
                         csv_cell(median_lower(solve)), csv_cell(tq.median), csv_cell(tq.q1),
                         csv_cell(tq.q3), csv_cell(all_converged)});
    }
    save_csv(summary, cfg.out_dir + "/summary.csv");
    Manifest m = cfg.to_manifest();
    m.save(cfg.out_dir + "/bench_manifest.txt");
}

inline void cmd_bench(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
    save_bench_results(cfg, run_bench(cfg, log));
}

// --- ablate -----------------------------------------------------------------

// Scaling sweep with K = N and r = K/2: a small model per grid size, then
// per-instance phase timings including matrix generation.
inline void cmd_ablate(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
    cfg.validate();
    CsvTable out;
    out.comments = {"K = N, r = K/2; end-to-end includes generation of the system matrix",
                    "mean and sample standard deviation over the instance count"};
    out.header = {"N",          "method",      "solve_ms_mean", "setup_ms_mean",
                  "inference_ms_mean", "end_to_end_ms_mean", "end_to_end_ms_stdev"};

    for (std::size_t n : cfg.ablate_grid) {
        const std::size_t k = n;
        const std::size_t rank = k / 2;
        // quick model for this size
        std::vector<DenseMatrix> corpus;
        for (std::size_t i = 0; i < cfg.ablate_train; ++i) {
            const auto inst = make_instance(cfg.family, n, cfg.jitter,
                                            mix_seed(cfg.seed, 0xab1a7e00 + i), cfg.fem_options());
            corpus.push_back(generate_smoothed_vectors(
                                 inst.matrix, inst.mesh.boundary_mask, k, cfg.smoothing_sweeps,
                                 cfg.omega, ExperimentConfig::smoothing_seed(inst.seed))
                                 .s);
        }
        TrainConfig tc;
        tc.rank = rank;
        tc.epochs = cfg.ablate_epochs;
        tc.learning_rate = cfg.learning_rate;
        tc.seed = mix_seed(cfg.seed, 0xab1a7e);
        tc.loss = LossKind::Nlss;
        tc.hidden = cfg.hidden;
        auto trained = train(corpus, tc);
        log << "ablate: N=" << n << " model trained (" << cfg.ablate_epochs << " epochs)\n";

        struct Phases {
            std::vector<double> solve, setup, inference, total;
        };
        std::vector<Method> methods = {Method::Svd, Method::Sa, Method::Nlss};
        std::vector<Phases> phases(methods.size());

        for (std::size_t i = 0; i < cfg.ablate_instances; ++i) {
            for (std::size_t mi = 0; mi < methods.size(); ++mi) {
                const Method method = methods[mi];
                detail::StopWatch gen_watch;
                const auto inst = make_instance(cfg.family, n, cfg.jitter,
                                                mix_seed(cfg.seed, 0xab1a7e80 + i),
                                                cfg.fem_options());
                const double gen_ms = gen_watch.ms();

                double smooth_ms = 0.0;
                SmoothedVectorSet smoothed;
                if (method != Method::Sa) {
                    detail::StopWatch smooth_watch;
                    smoothed = generate_smoothed_vectors(
                        inst.matrix, inst.mesh.boundary_mask, k, cfg.smoothing_sweeps, cfg.omega,
                        ExperimentConfig::smoothing_seed(inst.seed));
                    smooth_ms = smooth_watch.ms();
                }

                detail::StopWatch inf_watch;
                DenseMatrix basis;
                switch (method) {
                    case Method::Nlss: basis = first_cols(infer_basis(trained.model, smoothed.s), rank); break;
                    case Method::Svd: basis = first_cols(svd_oracle(smoothed.s).left_vectors, rank); break;
                    case Method::Sa: basis = sa_prolongator(inst.matrix, cfg.sa_theta, cfg.omega); break;
                    case Method::Subspace: break;
                }
                const double inference_ms = inf_watch.ms();

                detail::StopWatch setup_watch;
                TwoLevelPreconditioner precond(inst.matrix, basis, cfg.omega, cfg.nu1, cfg.nu2);
                const double setup_ms = setup_watch.ms();

                detail::StopWatch solve_watch;
                const auto result = pcg(inst.matrix, inst.rhs, precond, cfg.delta,
                                        cfg.max_iters_factor * inst.matrix.dim());
                const double solve_ms = solve_watch.ms();
                if (!result.report.converged)
                    log << "ablate: warning, N=" << n << " " << method_name(method)
                        << " did not converge on instance " << i << "\n";

                phases[mi].solve.push_back(solve_ms);
                phases[mi].setup.push_back(setup_ms);
                phases[mi].inference.push_back(inference_ms);
                phases[mi].total.push_back(gen_ms + smooth_ms + inference_ms + setup_ms +
                                           solve_ms);
            }
        }
        for (std::size_t mi = 0; mi < methods.size(); ++mi)
            out.add_row({csv_cell(n), method_name(methods[mi]),
                         csv_cell(mean(phases[mi].solve)), csv_cell(mean(phases[mi].setup)),
                         csv_cell(mean(phases[mi].inference)), csv_cell(mean(phases[mi].total)),
                         csv_cell(stdev(phases[mi].total))});
    }
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    save_csv(out, cfg.out_dir + "/ablate.csv");
    Manifest m = cfg.to_manifest();
    m.save(cfg.out_dir + "/ablate_manifest.txt");
}

// --- verify -----------------------------------------------------------------

// Fast built-in property sweep; one pass/fail line per check.
inline bool cmd_verify(std::ostream& log = std::cout) {
    struct Check {
        std::string name;
        std::function<bool()> run;
    };
    Rng rng(20260808);
    auto random_orthonormal = [&](std::size_t n, std::size_t k) {
        return qr_thin(randn_matrix(n, k, rng)).q;
    };

    std::vector<Check> checks;
    checks.push_back({"spmv matches dense matvec", [&]() {
        auto inst = make_instance(PdeFamily::Diffusion, 6, 0.25, 11);
        const auto dense = inst.matrix.to_dense();
        std::vector<double> x(inst.matrix.dim());
        for (auto& v : x) v = rng.normal();
        const auto y = spmv(inst.matrix, x);
        const auto ref = matvec(dense, x);
        for (std::size_t i = 0; i < y.size(); ++i)
            if (std::abs(y[i] - ref[i]) > 1e-12) return false;
        return true;
    }});
    checks.push_back({"qr_thin reconstructs and is idempotent", [&]() {
        auto m = randn_matrix(60, 12, rng);
        auto f = qr_thin(m);
        if (orthonormality_defect(f.q) > 1e-10) return false;
        auto back = matmul(f.q, f.r);
        double err = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < m.cols(); ++j)
                err += (back(i, j) - m(i, j)) * (back(i, j) - m(i, j));
        if (std::sqrt(err) > 1e-10 * frobenius_norm(m)) return false;
        auto q2 = qr_thin(f.q).q;
        for (std::size_t i = 0; i < q2.rows(); ++i)
            for (std::size_t j = 0; j < q2.cols(); ++j)
                if (std::abs(q2(i, j) - f.q(i, j)) > 1e-12) return false;
        return true;
    }});
    checks.push_back({"svd_oracle reconstructs", [&]() {
        auto s = randn_matrix(50, 14, rng);
        auto f = svd_oracle(s);
        auto back = svd_reconstruct(f);
        double err = 0.0;
        for (std::size_t i = 0; i < s.rows(); ++i)
            for (std::size_t j = 0; j < s.cols(); ++j)
                err += (back(i, j) - s(i, j)) * (back(i, j) - s(i, j));
        return std::sqrt(err) <= 1e-9 * frobenius_norm(s);
    }});
    checks.push_back({"trace inequality on PSD pairs", [&]() {
        for (int t = 0; t < 20; ++t) {
            const std::size_t n = 2 + rng.index(9);
            auto mk = [&]() {
                auto b = randn_matrix(n, n, rng);
                auto g = matmul_tn(b, b);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) g(i, j) /= static_cast<double>(n);
                return g;
            };
            auto a = mk(), b = mk();
            auto fa = svd_oracle(a), fb = svd_oracle(b);
            auto ab = matmul(a, b);
            double trace = 0.0, bound = 0.0;
            for (std::size_t i = 0; i < n; ++i) trace += ab(i, i);
            for (std::size_t i = 0; i < n; ++i)
                bound += fa.singular_values[i] * fb.singular_values[i];
            if (trace > bound + 1e-10) return false;
        }
        return true;
    }});
    checks.push_back({"captured energy invariant under orthogonal mix", [&]() {
        auto p = random_orthonormal(30, 6);
        auto s = randn_matrix(30, 10, rng);
        auto q = random_orthonormal(6, 6);
        return std::abs(captured_energy(matmul(p, q), s) - captured_energy(p, s)) <= 1e-10;
    }});
    checks.push_back({"svd basis maximizes captured energy", [&]() {
        auto s = randn_matrix(24, 9, rng);
        auto f = svd_oracle(s);
        const double best = captured_energy(first_cols(f.left_vectors, 3), s);
        for (int t = 0; t < 50; ++t)
            if (captured_energy(random_orthonormal(24, 3), s) > best + 1e-12) return false;
        return true;
    }});
    checks.push_back({"captured energy complements subspace loss exactly", [&]() {
        auto s = randn_matrix(20, 8, rng);
        auto p = random_orthonormal(20, 5);
        return captured_energy(p, s) == 1.0 - subspace_loss(s, p).loss;
    }});
    checks.push_back({"nlss loss gradient matches finite differences", [&]() {
        auto s = randn_matrix(10, 5, rng);
        auto p_raw = randn_matrix(10, 3, rng);
        auto trace = orthonormalize_differentiable(p_raw);
        auto lv = nlss_loss(s, trace.q);
        auto analytic = orthonormalize_backward(trace, lv.grad);
        const double eps = 1e-5;
        for (std::size_t i = 0; i < 10; ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                DenseMatrix plus = p_raw, minus = p_raw;
                plus(i, j) += eps;
                minus(i, j) -= eps;
                const double fd = (nlss_loss(s, orthonormalize_differentiable(plus).q).loss -
                                   nlss_loss(s, orthonormalize_differentiable(minus).q).loss) /
                                  (2.0 * eps);
                if (std::abs(fd - analytic(i, j)) >
                    1e-4 * std::max({std::abs(fd), std::abs(analytic(i, j)), 1e-4}))
                    return false;
            }
        return true;
    }});
    checks.push_back({"meshes stay Delaunay and nondegenerate", [&]() {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            auto mesh = build_mesh(9, 0.25, seed);
            if (count_delaunay_violations(mesh) != 0) return false;
            if (min_relative_area(mesh) <= 1e-6) return false;
        }
        return true;
    }});
    checks.push_back({"assembled systems are SPD across families", [&]() {
        for (auto family :
             {PdeFamily::Diffusion, PdeFamily::Anisotropic, PdeFamily::ScreenedPoisson}) {
            auto inst = make_instance(family, 6, 0.25, 17);
            if (!inst.matrix.is_symmetric(1e-12)) return false;
            try {
                CholeskyFactor f(inst.matrix.to_dense());
            } catch (const NotSpdError&) {
                return false;
            }
        }
        return true;
    }});
    checks.push_back({"smoothed vectors keep boundary rows zero", [&]() {
        auto inst = make_instance(PdeFamily::Diffusion, 6, 0.25, 19);
        auto sv = generate_smoothed_vectors(inst.matrix, inst.mesh.boundary_mask, 8, 20, 0.66, 3);
        for (std::size_t i = 0; i < sv.s.rows(); ++i)
            if (inst.mesh.boundary_mask[i])
                for (std::size_t j = 0; j < sv.s.cols(); ++j)
                    if (sv.s(i, j) != 0.0) return false;
        return true;
    }});
    checks.push_back({"coarse exactness of the nu=0 cycle", [&]() {
        for (int t = 0; t < 10; ++t) {
            const std::size_t n = 20 + rng.index(40);
            const std::size_t nc = 1 + rng.index(6);
            std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    if (rng.uniform() < 0.1) {
                        const double v = rng.normal();
                        trip.emplace_back(i, j, v);
                        trip.emplace_back(j, i, v);
                    }
            for (std::size_t i = 0; i < n; ++i) trip.emplace_back(i, i, 8.0 + rng.uniform());
            auto a = SparseCsrMatrix::from_triplets(n, std::move(trip));
            auto u = random_orthonormal(n, nc);
            TwoLevelPreconditioner m(a, u, 0.66, 0, 0);
            std::vector<double> y(nc);
            for (auto& v : y) v = rng.normal();
            std::vector<double> uy(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < nc; ++j) uy[i] += m.basis()(i, j) * y[j];
            const auto z = m.apply(a, spmv(a, uy));
            for (std::size_t i = 0; i < n; ++i)
                if (std::abs(z[i] - uy[i]) > 1e-10) return false;
        }
        return true;
    }});
    checks.push_back({"two-level PCG solves a diffusion instance", [&]() {
        auto inst = make_instance(PdeFamily::Diffusion, 9, 0.25, 23);
        auto sv = generate_smoothed_vectors(inst.matrix, inst.mesh.boundary_mask, 16, 10, 0.66, 5);
        auto basis = first_cols(svd_oracle(sv.s).left_vectors, 8);
        TwoLevelPreconditioner m(inst.matrix, basis, 0.66, 5, 5);
        auto res = pcg(inst.matrix, inst.rhs, m, 1e-6, 10 * inst.matrix.dim());
        return res.report.converged && res.report.true_relative_residual <= 1e-5;
    }});
    checks.push_back({"sa aggregation partitions every node", [&]() {
        auto inst = make_instance(PdeFamily::Diffusion, 8, 0.25, 29);
        std::size_t nc = 0;
        auto agg = aggregate_nodes(inst.matrix, 0.25, &nc);
        if (nc == 0) return false;
        for (std::size_t v : agg)
            if (v >= nc) return false;
        return true;
    }});
    checks.push_back({"stiefel descent recovers the leading subspace", [&]() {
        auto u = random_orthonormal(20, 3);
        auto v = random_orthonormal(8, 3);
        const double sigma[3] = {9.0, 5.0, 2.0};
        DenseMatrix s(20, 8, 0.0);
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < 20; ++i)
                for (std::size_t j = 0; j < 8; ++j) s(i, j) += sigma[c] * u(i, c) * v(j, c);
        auto res = stiefel_minimize(s, 3, 2000, 0.9, 7);
        for (std::size_t j = 0; j < 3; ++j) {
            double dot = 0.0;
            for (std::size_t i = 0; i < 20; ++i) dot += res.basis(i, j) * u(i, j);
            if (std::abs(dot) < 0.99) return false;
        }
        return true;
    }});

    bool all = true;
    for (const auto& check : checks) {
        bool ok = false;
        std::string note;
        try {
            ok = check.run();
        } catch (const std::exception& e) {
            ok = false;
            note = std::string(" (") + e.what() + ")";
        }
        log << (ok ? "PASS" : "FAIL") << "  " << check.name << note << "\n";
        all = all && ok;
    }
    log << (all ? "verify: all checks passed" : "verify: FAILURES present") << "\n";
    return all;
}

} // namespace nlsp
