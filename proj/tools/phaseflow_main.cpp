#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "phaseflow/runner.hpp"

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct OutputTarget {
    std::string path;  // empty means stdout

    template <typename Fn>
    void with_stream(Fn&& fn) const {
        if (path.empty()) {
            fn(std::cout);
        } else {
            std::ofstream out(path, std::ios::trunc);
            if (!out) throw std::runtime_error("cannot open output file " + path);
            fn(out);
        }
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"phaseflow: quantum Wigner / dual Fokker-Planck phase-space engine"};
    app.require_subcommand(1);

    std::string config_path;
    OutputTarget target;

    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("-c,--config", config_path, "run configuration file")->required();
    };
    auto add_out = [&](CLI::App* cmd) {
        cmd->add_option("-o,--out", target.path, "write output to this file (default stdout)");
    };

    auto* cmd_evolve = app.add_subcommand("evolve", "evolve one mode, write checkpoints");
    add_config(cmd_evolve);

    auto* cmd_compare =
        app.add_subcommand("compare", "twin quantum+classical run with joint diagnostics");
    add_config(cmd_compare);

    auto* cmd_timescales =
        app.add_subcommand("timescales", "print the derived timescale report");
    add_config(cmd_timescales);
    add_out(cmd_timescales);

    auto* cmd_langevin = app.add_subcommand("langevin", "stochastic trajectory ensemble");
    add_config(cmd_langevin);
    add_out(cmd_langevin);
    std::size_t lv_n = 10000;
    double lv_dt = 1e-4, lv_t = 0.5, lv_q0 = 0.0, lv_p0 = 0.0;
    bool lv_check = false;
    cmd_langevin->add_option("-n,--trajectories", lv_n, "ensemble size");
    cmd_langevin->add_option("--dt", lv_dt, "integrator step");
    cmd_langevin->add_option("-T,--t-end", lv_t, "integration horizon");
    cmd_langevin->add_option("--q0", lv_q0, "initial position");
    cmd_langevin->add_option("--p0", lv_p0, "initial momentum");
    cmd_langevin->add_flag("--check-cumulants", lv_check,
                           "append the analytic cumulant comparison");

    auto* cmd_manifold =
        app.add_subcommand("manifold", "trace the unstable manifold of the driven saddle");
    add_config(cmd_manifold);
    add_out(cmd_manifold);
    double mf_periods = 3.0, mf_resolution = 1e-2;
    cmd_manifold->add_option("--periods", mf_periods, "trace horizon in drive periods");
    cmd_manifold->add_option("--resolution", mf_resolution, "maximum vertex spacing");

    auto* cmd_slice = app.add_subcommand("slice", "extract f(q, p~p0) from a checkpoint");
    add_out(cmd_slice);
    std::string field_path;
    double slice_p0 = 0.0;
    cmd_slice->add_option("-f,--field", field_path, "WFPS checkpoint file")->required();
    cmd_slice->add_option("--p0", slice_p0, "momentum of the cut");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_slice->parsed()) {
            target.with_stream([&](std::ostream& out) {
                phaseflow::run_slice(field_path, slice_p0, out);
            });
            return 0;
        }

        const std::string text = read_text_file(config_path);
        const auto parsed = phaseflow::parse_config(text);
        if (!parsed.config) {
            std::cerr << "invalid config " << config_path << ":\n";
            for (const auto& e : parsed.errors) {
                std::cerr << "  ";
                if (e.line > 0) std::cerr << "line " << e.line << ": ";
                std::cerr << e.message << "\n";
            }
            return 1;
        }
        const auto& cfg = *parsed.config;

        if (cmd_evolve->parsed()) {
            return phaseflow::run_evolve(cfg, text, std::cout) ? 0 : 3;
        }
        if (cmd_compare->parsed()) {
            return phaseflow::run_compare(cfg, text, std::cout) ? 0 : 3;
        }
        if (cmd_timescales->parsed()) {
            target.with_stream(
                [&](std::ostream& out) { phaseflow::run_timescales(cfg, out); });
            return 0;
        }
        if (cmd_langevin->parsed()) {
            phaseflow::EnsembleOptions opt;
            opt.n = lv_n;
            opt.dt = lv_dt;
            opt.t_end = lv_t;
            opt.seed = cfg.seed;
            opt.q0 = lv_q0;
            opt.p0 = lv_p0;
            target.with_stream([&](std::ostream& out) {
                phaseflow::run_langevin(cfg, opt, out, lv_check);
            });
            return 0;
        }
        if (cmd_manifold->parsed()) {
            target.with_stream([&](std::ostream& out) {
                phaseflow::run_manifold(cfg, mf_periods * cfg.model.drive_period(),
                                        mf_resolution, out);
            });
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
