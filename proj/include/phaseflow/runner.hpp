#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <thread>

#include <json.hpp>

#include "phaseflow/config.hpp"
#include "phaseflow/diagnostics.hpp"
#include "phaseflow/evolve.hpp"
#include "phaseflow/field_io.hpp"
#include "phaseflow/langevin.hpp"
#include "phaseflow/states.hpp"
#include "phaseflow/timescales.hpp"
#include "phaseflow/version.hpp"

namespace phaseflow {

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string hex64(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace detail

inline constexpr const char* diagnostics_csv_header =
    "time,norm,q1,p1,q2,p2,qp,energy,negativity,minval,boundary_mass,l1,l2";

inline std::string diagnostics_csv_row(const DiagnosticsRecord& r) {
    using detail::fmt17;
    std::string row = fmt17(r.time);
    for (double v : {r.norm, r.q1, r.p1, r.q2, r.p2, r.qp, r.energy, r.negativity,
                     r.min_value, r.boundary_mass})
        row += "," + fmt17(v);
    row += ",";
    if (r.l1) row += fmt17(*r.l1);
    row += ",";
    if (r.l2) row += fmt17(*r.l2);
    return row;
}

/// Collects emitted files and writes the run manifest: config hash, engine
/// version, and a content hash per artifact.
class RunManifest {
public:
    RunManifest(std::filesystem::path dir, std::string_view config_text)
        : dir_(std::move(dir)), config_hash_(fnv1a64(config_text)) {
        std::filesystem::create_directories(dir_);
    }

    const std::filesystem::path& dir() const { return dir_; }

    void add(const std::filesystem::path& file) { files_.push_back(file); }

    void set_valid(bool v) { valid_ = v; }
    bool valid() const { return valid_; }

    std::filesystem::path write() const {
        nlohmann::json j;
        j["engine"] = "phaseflow";
        j["version"] = version_string;
        j["hash_algorithm"] = "fnv1a64";
        j["config_hash"] = detail::hex64(config_hash_);
        j["valid"] = valid_;
        j["files"] = nlohmann::json::array();
        for (const auto& f : files_) {
            j["files"].push_back({{"path", std::filesystem::relative(f, dir_).string()},
                                  {"hash", detail::hex64(hash_file(f))}});
        }
        const auto path = dir_ / "manifest.json";
        std::ofstream out(path, std::ios::trunc);
        out << j.dump(2) << "\n";
        return path;
    }

private:
    std::filesystem::path dir_;
    std::uint64_t config_hash_;
    std::vector<std::filesystem::path> files_;
    bool valid_ = true;
};

inline Field build_initial_state(const RunConfig& cfg, GridPtr grid) {
    GaussianSpec a{cfg.initial.qa, cfg.initial.pa, cfg.sigma_q_value(), cfg.sigma_p_value()};
    if (cfg.initial.type == InitialConfig::Type::gaussian)
        return gaussian_wigner(a, std::move(grid));
    GaussianSpec b{cfg.initial.qb, cfg.initial.pb, cfg.sigma_q_value(), cfg.sigma_p_value()};
    return cat_state_wigner(a, b, std::move(grid), cfg.model);
}

inline GridPtr build_grid(const RunConfig& cfg) {
    return make_grid(cfg.grid.nq, cfg.grid.np, {cfg.grid.q_min, cfg.grid.q_max},
                     {cfg.grid.p_min, cfg.grid.p_max});
}

/// Boundary-mass guard for production runs; a run whose field accumulates
/// more than this in the outer 10% band is flagged invalid.
inline constexpr double boundary_mass_limit = 1e-6;

struct SingleRunResult {
    std::vector<DiagnosticsRecord> series;
    std::vector<std::filesystem::path> checkpoints;
    bool boundary_ok = true;
};

namespace detail {

inline SingleRunResult run_one_mode(const RunConfig& cfg, EvolveMode mode, Field field,
                                    RunManifest* manifest) {
    const char* tag = mode == EvolveMode::quantum ? "quantum" : "classical";
    StepPlan plan(field.grid_ptr(), cfg.model, cfg.dt_value(), mode);
    const auto schedule = periodic_schedule(0.0, cfg.t_end, cfg.checkpoint_every_value());

    SingleRunResult out;
    std::size_t index = 0;
    CheckpointFn save = {};
    if (manifest) {
        save = [&](const Field& f) {
            char name[64];
            std::snprintf(name, sizeof name, "checkpoint_%s_%04zu.wfps", tag, index++);
            const auto path = manifest->dir() / name;
            write_field(f, cfg.model.hbar, cfg.model.D, path);
            out.checkpoints.push_back(path);
        };
    }
    auto result = evolve(field, cfg.t_end, plan, schedule, save);
    out.series = std::move(result.series);
    for (const auto& rec : out.series)
        if (rec.boundary_mass > boundary_mass_limit) out.boundary_ok = false;
    return out;
}

inline void write_diagnostics_csv(const std::filesystem::path& path,
                                  std::span<const DiagnosticsRecord> series) {
    std::ofstream out(path, std::ios::trunc);
    out << diagnostics_csv_header << "\n";
    for (const auto& r : series) out << diagnostics_csv_row(r) << "\n";
}

} // namespace detail

/// `evolve` subcommand: one mode, checkpoints plus a diagnostics series.
/// Returns false when the boundary-mass guard flagged the run.
inline bool run_evolve(const RunConfig& cfg, const std::string& config_text,
                       std::ostream& log) {
    if (cfg.mode == RunMode::both)
        throw std::invalid_argument("evolve runs one mode; use compare for both");
    const EvolveMode mode =
        cfg.mode == RunMode::quantum ? EvolveMode::quantum : EvolveMode::classical;

    RunManifest manifest(cfg.output_dir, config_text);
    auto grid = build_grid(cfg);
    auto result = detail::run_one_mode(cfg, mode, build_initial_state(cfg, grid), &manifest);

    const auto csv = manifest.dir() /
                     (std::string("diagnostics_") + to_string(cfg.mode) + ".csv");
    detail::write_diagnostics_csv(csv, result.series);
    for (const auto& f : result.checkpoints) manifest.add(f);
    manifest.add(csv);
    manifest.set_valid(result.boundary_ok);
    manifest.write();

    log << "evolve " << to_string(cfg.mode) << ": " << result.series.size()
        << " checkpoints -> " << manifest.dir().string() << "\n";
    if (!result.boundary_ok)
        log << "warning: boundary mass exceeded " << boundary_mass_limit
            << "; run flagged invalid\n";
    return result.boundary_ok;
}

struct CompareResult {
    std::vector<DiagnosticsRecord> quantum;    ///< includes L1/L2 to classical twin
    std::vector<DiagnosticsRecord> classical;  ///< includes the same distances
    bool boundary_ok = true;
};

/// Twin quantum/classical evolution from one shared initial state, advanced
/// window by window so paired distances can be recorded at every checkpoint.
/// The two steppers run concurrently inside each window; they share nothing
/// mutable, so the result is identical to the sequential order.
inline CompareResult run_compare_in_memory(const RunConfig& cfg,
                                           RunManifest* manifest = nullptr) {
    auto grid = build_grid(cfg);
    Field shared = build_initial_state(cfg, grid);
    Field fq = shared;  // the same initial field seeds both evolutions
    Field fc = std::move(shared);

    StepPlan plan_q(grid, cfg.model, cfg.dt_value(), EvolveMode::quantum);
    StepPlan plan_c(grid, cfg.model, cfg.dt_value(), EvolveMode::classical);
    const auto schedule = periodic_schedule(0.0, cfg.t_end, cfg.checkpoint_every_value());

    CompareResult out;
    std::size_t index = 0;
    auto record = [&](double /*t*/) {
        auto rq = make_record(fq, cfg.model, 0.1, &fc);
        auto rc = make_record(fc, cfg.model, 0.1, &fq);
        if (rq.boundary_mass > boundary_mass_limit || rc.boundary_mass > boundary_mass_limit)
            out.boundary_ok = false;
        out.quantum.push_back(std::move(rq));
        out.classical.push_back(std::move(rc));
        if (manifest) {
            char name[64];
            std::snprintf(name, sizeof name, "checkpoint_quantum_%04zu.wfps", index);
            write_field(fq, cfg.model.hbar, cfg.model.D, manifest->dir() / name);
            manifest->add(manifest->dir() / name);
            std::snprintf(name, sizeof name, "checkpoint_classical_%04zu.wfps", index);
            write_field(fc, cfg.model.hbar, cfg.model.D, manifest->dir() / name);
            manifest->add(manifest->dir() / name);
            ++index;
        }
    };

    record(0.0);
    const double dt = cfg.dt_value();
    const auto total_steps = static_cast<std::size_t>(std::llround(cfg.t_end / dt));
    std::vector<std::size_t> marks;
    for (double tc : schedule) {
        const auto idx = static_cast<std::size_t>(std::llround(tc / dt));
        if (idx > 0 && idx <= total_steps) marks.push_back(idx);
    }
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

    std::size_t done = 0;
    for (std::size_t target : marks) {
        const std::size_t count = target - done;
        std::exception_ptr err_q, err_c;
        std::thread tq([&] {
            try {
                for (std::size_t s = 0; s < count; ++s) plan_q.step(fq);
            } catch (...) {
                err_q = std::current_exception();
            }
        });
        try {
            for (std::size_t s = 0; s < count; ++s) plan_c.step(fc);
        } catch (...) {
            err_c = std::current_exception();
        }
        tq.join();
        if (err_q) std::rethrow_exception(err_q);
        if (err_c) std::rethrow_exception(err_c);
        done = target;
        fq.set_time(static_cast<double>(done) * dt);
        fc.set_time(static_cast<double>(done) * dt);
        record(fq.time());
    }
    return out;
}

/// `compare` subcommand: paired checkpoints plus joint diagnostics with the
/// quantum-classical L1/L2 distance columns filled.
inline bool run_compare(const RunConfig& cfg, const std::string& config_text,
                        std::ostream& log) {
    RunManifest manifest(cfg.output_dir, config_text);
    auto result = run_compare_in_memory(cfg, &manifest);

    const auto csv_q = manifest.dir() / "diagnostics_quantum.csv";
    const auto csv_c = manifest.dir() / "diagnostics_classical.csv";
    detail::write_diagnostics_csv(csv_q, result.quantum);
    detail::write_diagnostics_csv(csv_c, result.classical);
    manifest.add(csv_q);
    manifest.add(csv_c);
    manifest.set_valid(result.boundary_ok);
    manifest.write();

    log << "compare: " << result.quantum.size() << " paired checkpoints -> "
        << manifest.dir().string() << "\n";
    if (!result.boundary_ok)
        log << "warning: boundary mass exceeded " << boundary_mass_limit
            << "; run flagged invalid\n";
    return result.boundary_ok;
}

/// `timescales` subcommand: aligned table plus CSV block.
inline void run_timescales(const RunConfig& cfg, std::ostream& out) {
    const auto rep = timescale_report(cfg.model);
    const auto& mp = cfg.model;
    auto row = [&](const char* name, double value, const char* note = "") {
        out << "  " << std::left << std::setw(18) << name << std::right << std::setw(22)
            << detail::fmt17(value);
        if (*note) out << "  " << note;
        out << "\n";
    };
    out << "timescale report (m=" << mp.m << ", hbar=" << mp.hbar << ", D=" << mp.D
        << ", lambda_bar=" << mp.lambda_bar << ", area=" << mp.area
        << ", u0_sq=" << mp.u0_sq << ")\n";
    row("t_star_exact", rep.t_star.exact, "root of l_cl(t) = delta(t)");
    row("t_star_approx", rep.t_star.approx, "closed-form iterate");
    row("x0", rep.t_star.x0);
    row("t_qc", rep.t_qc, "m hbar lambda_bar / D");
    row("folding_onset", rep.folding_onset, "fold-spacing formula valid past this");
    row("l_cl(t_star)", l_classical(rep.t_star.exact, mp));
    row("l_q(t_qc)", l_quantum(rep.t_qc, mp));
    row("delta(t_star)", fold_spacing(rep.t_star.exact, mp));
    out << "  regime: "
        << (rep.regime == TimescaleRegime::transition_after_freezeout
                ? "t_qc >= t_star (transition after classical freeze-out)"
                : "t_qc < t_star (transition before classical freeze-out)")
        << "\n";
    if (rep.t_star.exact < rep.folding_onset)
        out << "  warning: t_star precedes the folding onset; the fold-spacing "
               "estimate is not self-consistent here\n";
    out << "\ncsv:\n";
    out << "t_star_exact,t_star_approx,x0,t_qc,folding_onset,regime\n";
    out << detail::fmt17(rep.t_star.exact) << "," << detail::fmt17(rep.t_star.approx) << ","
        << detail::fmt17(rep.t_star.x0) << "," << detail::fmt17(rep.t_qc) << ","
        << detail::fmt17(rep.folding_onset) << ","
        << (rep.regime == TimescaleRegime::transition_after_freezeout ? "after_freezeout"
                                                                      : "before_freezeout")
        << "\n";
}

/// `langevin` subcommand: ensemble statistics as CSV, optionally with the
/// analytic cumulant comparison table appended.
inline void run_langevin(const RunConfig& cfg, const EnsembleOptions& opt, std::ostream& out,
                         bool check_cumulants) {
    const auto stats = simulate_ensemble(opt, cfg.model);
    out << "time,mean_q,se_mean_q,mean_p,se_mean_p,var_q,se_var_q,var_p,se_var_p"
           ",mean_up,se_mean_up,mean_um,se_mean_um,var_up,se_var_up,var_um,se_var_um"
           ",cov_upum,se_cov_upum,n,aborted\n";
    using detail::fmt17;
    for (std::size_t i = 0; i < stats.times.size(); ++i) {
        out << fmt17(stats.times[i]);
        for (double v : {stats.mean_q[i], stats.se_mean_q[i], stats.mean_p[i],
                         stats.se_mean_p[i], stats.var_q[i], stats.se_var_q[i],
                         stats.var_p[i], stats.se_var_p[i], stats.mean_up[i],
                         stats.se_mean_up[i], stats.mean_um[i], stats.se_mean_um[i],
                         stats.var_up[i], stats.se_var_up[i], stats.var_um[i],
                         stats.se_var_um[i], stats.cov_upum[i], stats.se_cov_upum[i]})
            out << "," << fmt17(v);
        out << "," << stats.n_trajectories << "," << stats.n_aborted << "\n";
    }
    if (check_cumulants) {
        const auto check = cumulant_check(stats, cfg.model);
        out << "\ncumulant check (3 standard errors"
            << (check.sufficient ? "" : "; WARNING: ensemble below 1e3 trajectories")
            << "):\n";
        out << "time,cumulant,observed,expected,stderr,pass\n";
        for (const auto& r : check.rows)
            out << fmt17(r.time) << "," << r.name << "," << fmt17(r.observed) << ","
                << fmt17(r.expected) << "," << fmt17(r.stderr_) << ","
                << (r.pass ? "yes" : "no") << "\n";
        out << (check.all_pass ? "all cumulants within 3 standard errors\n"
                               : "CUMULANT MISMATCH\n");
    }
}

/// `manifold` subcommand: both branches of the unstable manifold as CSV.
inline void run_manifold(const RunConfig& cfg, double t_max, double resolution,
                         std::ostream& out) {
    out << "q,p,arc_time,branch\n";
    using detail::fmt17;
    for (int branch : {+1, -1}) {
        const auto line = trace_unstable_manifold(cfg.model, t_max, resolution, branch);
        for (std::size_t i = 0; i < line.size(); ++i)
            out << fmt17(line.q[i]) << "," << fmt17(line.p[i]) << ","
                << fmt17(line.arc_time[i]) << "," << branch << "\n";
    }
}

/// `slice` subcommand: extract f(q, p ~ p0) from a checkpoint file.
inline void run_slice(const std::filesystem::path& checkpoint, double p0, std::ostream& out) {
    const auto file = read_field(checkpoint);
    out << "q,value\n";
    for (const auto& [q, v] : slice(file.field, p0))
        out << detail::fmt17(q) << "," << detail::fmt17(v) << "\n";
}

} // namespace phaseflow
