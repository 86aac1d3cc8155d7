#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "phaseflow/grid.hpp"
#include "phaseflow/model.hpp"

namespace phaseflow {

enum class RunMode { quantum, classical, both };

inline const char* to_string(RunMode m) {
    switch (m) {
        case RunMode::quantum: return "quantum";
        case RunMode::classical: return "classical";
        default: return "both";
    }
}

struct GridConfig {
    std::size_t nq = 512;
    std::size_t np = 512;
    double q_min = -8.0, q_max = 8.0;
    double p_min = -17.0, p_max = 17.0;
};

struct InitialConfig {
    enum class Type { gaussian, cat };
    Type type = Type::cat;
    // Cat lobes (for gaussian only the first center is used).
    double qa = -1.0, pa = 0.0;
    double qb = 1.0, pb = 0.0;
    std::optional<double> sigma_q;  ///< default sqrt(hbar/2)
    std::optional<double> sigma_p;
};

/// Complete description of one reproducible run; every value is validated
/// before any compute starts, and the record round-trips losslessly through
/// serialize_config / parse_config.
struct RunConfig {
    ModelParams model;
    bool u0_sq_explicit = false;  ///< otherwise u0_sq follows hbar
    GridConfig grid;
    InitialConfig initial;
    RunMode mode = RunMode::both;
    std::optional<double> dt;                ///< default 1e-3 drive periods
    double t_end = 10.0;
    std::optional<double> checkpoint_every;  ///< default one drive period
    std::string output_dir = "out";
    std::uint64_t seed = 1;

    double dt_value() const { return dt ? *dt : 1e-3 * model.drive_period(); }
    double checkpoint_every_value() const {
        return checkpoint_every ? *checkpoint_every : model.drive_period();
    }
    double sigma_q_value() const {
        return initial.sigma_q ? *initial.sigma_q : std::sqrt(0.5 * model.hbar);
    }
    double sigma_p_value() const {
        return initial.sigma_p ? *initial.sigma_p : std::sqrt(0.5 * model.hbar);
    }
};

struct ConfigError {
    int line = 0;  ///< 1-based; 0 when not tied to a specific line
    std::string message;
};

struct ConfigParseResult {
    std::optional<RunConfig> config;  ///< set only when errors is empty
    std::vector<ConfigError> errors;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline bool parse_double(std::string_view s, double& out) {
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc{} && p == end;
}

inline bool parse_u64(std::string_view s, std::uint64_t& out) {
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc{} && p == end;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

/// Parse the sectioned key=value format.  All keys are optional (the
/// defaults are the canonical run); every malformed line, unknown key, type
/// mismatch, and physical-constraint violation is reported, not just the
/// first.
inline ConfigParseResult parse_config(std::string_view text) {
    ConfigParseResult result;
    RunConfig cfg;
    bool u0_seen = false, hbar_seen = false;
    auto fail = [&](int line, std::string msg) {
        result.errors.push_back({line, std::move(msg)});
    };

    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view raw = text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                              : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') {
                fail(line_no, "malformed section header");
                continue;
            }
            section = std::string(detail::trim(line.substr(1, line.size() - 2)));
            if (section != "model" && section != "grid" && section != "initial" &&
                section != "run")
                fail(line_no, "unknown section [" + section + "]");
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            fail(line_no, "expected key = value");
            continue;
        }
        const std::string key{detail::trim(line.substr(0, eq))};
        const std::string_view value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            fail(line_no, "empty key or value");
            continue;
        }

        auto num = [&](double& slot) {
            double v;
            if (!detail::parse_double(value, v))
                fail(line_no, "key '" + key + "' expects a number, got '" +
                                  std::string(value) + "'");
            else
                slot = v;
        };
        auto opt_num = [&](std::optional<double>& slot) {
            double v;
            if (!detail::parse_double(value, v))
                fail(line_no, "key '" + key + "' expects a number, got '" +
                                  std::string(value) + "'");
            else
                slot = v;
        };
        auto count = [&](std::size_t& slot) {
            std::uint64_t v;
            if (!detail::parse_u64(value, v))
                fail(line_no,
                     "key '" + key + "' expects a positive integer, got '" +
                         std::string(value) + "'");
            else
                slot = static_cast<std::size_t>(v);
        };
        auto constraint = [&](bool ok, const char* msg) {
            if (!ok) fail(line_no, "key '" + key + "': " + msg);
        };

        if (section == "model") {
            if (key == "m") {
                num(cfg.model.m);
                constraint(cfg.model.m > 0, "mass must be positive");
            } else if (key == "hbar") {
                num(cfg.model.hbar);
                hbar_seen = true;
                constraint(cfg.model.hbar >= 0, "hbar must be nonnegative");
            } else if (key == "D") {
                num(cfg.model.D);
                constraint(cfg.model.D >= 0, "D must be nonnegative");
            } else if (key == "A") {
                num(cfg.model.A_coef);
            } else if (key == "B") {
                num(cfg.model.B_coef);
            } else if (key == "Lambda") {
                num(cfg.model.Lambda);
            } else if (key == "omega") {
                num(cfg.model.omega);
                constraint(cfg.model.omega > 0, "omega must be positive");
            } else if (key == "lambda_bar") {
                num(cfg.model.lambda_bar);
                constraint(cfg.model.lambda_bar > 0, "lambda_bar must be positive");
            } else if (key == "area") {
                num(cfg.model.area);
                constraint(cfg.model.area > 0, "area must be positive");
            } else if (key == "u0_sq") {
                num(cfg.model.u0_sq);
                u0_seen = true;
                constraint(cfg.model.u0_sq > 0, "u0_sq must be positive");
            } else {
                fail(line_no, "unknown key '" + key + "' in [model]");
            }
        } else if (section == "grid") {
            if (key == "nq") count(cfg.grid.nq);
            else if (key == "np") count(cfg.grid.np);
            else if (key == "q_min") num(cfg.grid.q_min);
            else if (key == "q_max") num(cfg.grid.q_max);
            else if (key == "p_min") num(cfg.grid.p_min);
            else if (key == "p_max") num(cfg.grid.p_max);
            else fail(line_no, "unknown key '" + key + "' in [grid]");
        } else if (section == "initial") {
            if (key == "type") {
                if (value == "gaussian") cfg.initial.type = InitialConfig::Type::gaussian;
                else if (value == "cat") cfg.initial.type = InitialConfig::Type::cat;
                else fail(line_no, "initial type must be 'gaussian' or 'cat'");
            } else if (key == "qa" || key == "q0") num(cfg.initial.qa);
            else if (key == "pa" || key == "p0") num(cfg.initial.pa);
            else if (key == "qb") num(cfg.initial.qb);
            else if (key == "pb") num(cfg.initial.pb);
            else if (key == "sigma_q") opt_num(cfg.initial.sigma_q);
            else if (key == "sigma_p") opt_num(cfg.initial.sigma_p);
            else fail(line_no, "unknown key '" + key + "' in [initial]");
        } else if (section == "run") {
            if (key == "mode") {
                if (value == "quantum") cfg.mode = RunMode::quantum;
                else if (value == "classical") cfg.mode = RunMode::classical;
                else if (value == "both") cfg.mode = RunMode::both;
                else fail(line_no, "mode must be quantum, classical, or both");
            } else if (key == "dt") {
                opt_num(cfg.dt);
                constraint(!cfg.dt || *cfg.dt > 0, "dt must be positive");
            } else if (key == "t_end") {
                num(cfg.t_end);
                constraint(cfg.t_end > 0, "t_end must be positive");
            } else if (key == "checkpoint_every") {
                opt_num(cfg.checkpoint_every);
                constraint(!cfg.checkpoint_every || *cfg.checkpoint_every > 0,
                           "checkpoint_every must be positive");
            } else if (key == "output_dir") {
                cfg.output_dir = std::string(value);
            } else if (key == "seed") {
                std::uint64_t v;
                if (!detail::parse_u64(value, v))
                    fail(line_no, "seed expects a nonnegative integer");
                else
                    cfg.seed = v;
            } else {
                fail(line_no, "unknown key '" + key + "' in [run]");
            }
        } else {
            fail(line_no, "key '" + key + "' appears before any section header");
        }
    }

    if (u0_seen) cfg.u0_sq_explicit = true;
    else if (hbar_seen && cfg.model.hbar > 0) cfg.model.u0_sq = cfg.model.hbar;

    // Cross-field validation.
    if (!detail::is_pow2(cfg.grid.nq) || cfg.grid.nq < 16 ||
        !detail::is_pow2(cfg.grid.np) || cfg.grid.np < 16)
        fail(0, "grid sizes must be powers of two >= 16");
    if (!(cfg.grid.q_max > cfg.grid.q_min) || !(cfg.grid.p_max > cfg.grid.p_min))
        fail(0, "grid bounds must satisfy max > min");
    if (cfg.mode != RunMode::classical && !(cfg.model.hbar > 0))
        fail(0, "quantum evolution requires hbar > 0");
    if (cfg.sigma_q_value() <= 0 || cfg.sigma_p_value() <= 0)
        fail(0, "initial widths must be positive");
    try {
        cfg.model.validate();
    } catch (const std::invalid_argument& e) {
        fail(0, e.what());
    }

    if (result.errors.empty()) result.config = std::move(cfg);
    return result;
}

/// Parse, throwing a single exception that carries every error message.
inline RunConfig parse_config_or_throw(std::string_view text) {
    auto res = parse_config(text);
    if (!res.config) {
        std::ostringstream msg;
        msg << "invalid config (" << res.errors.size() << " error(s)):";
        for (const auto& e : res.errors) {
            msg << "\n  ";
            if (e.line > 0) msg << "line " << e.line << ": ";
            msg << e.message;
        }
        throw std::invalid_argument(msg.str());
    }
    return *std::move(res.config);
}

/// Emit the config in the same sectioned format, 17 significant digits, so
/// that parse(serialize(c)) == c.
inline std::string serialize_config(const RunConfig& cfg) {
    using detail::format_double;
    std::ostringstream out;
    out << "[model]\n";
    out << "m = " << format_double(cfg.model.m) << "\n";
    out << "hbar = " << format_double(cfg.model.hbar) << "\n";
    out << "D = " << format_double(cfg.model.D) << "\n";
    out << "A = " << format_double(cfg.model.A_coef) << "\n";
    out << "B = " << format_double(cfg.model.B_coef) << "\n";
    out << "Lambda = " << format_double(cfg.model.Lambda) << "\n";
    out << "omega = " << format_double(cfg.model.omega) << "\n";
    out << "lambda_bar = " << format_double(cfg.model.lambda_bar) << "\n";
    out << "area = " << format_double(cfg.model.area) << "\n";
    if (cfg.u0_sq_explicit) out << "u0_sq = " << format_double(cfg.model.u0_sq) << "\n";
    out << "\n[grid]\n";
    out << "nq = " << cfg.grid.nq << "\n";
    out << "np = " << cfg.grid.np << "\n";
    out << "q_min = " << format_double(cfg.grid.q_min) << "\n";
    out << "q_max = " << format_double(cfg.grid.q_max) << "\n";
    out << "p_min = " << format_double(cfg.grid.p_min) << "\n";
    out << "p_max = " << format_double(cfg.grid.p_max) << "\n";
    out << "\n[initial]\n";
    out << "type = "
        << (cfg.initial.type == InitialConfig::Type::cat ? "cat" : "gaussian") << "\n";
    out << "qa = " << format_double(cfg.initial.qa) << "\n";
    out << "pa = " << format_double(cfg.initial.pa) << "\n";
    out << "qb = " << format_double(cfg.initial.qb) << "\n";
    out << "pb = " << format_double(cfg.initial.pb) << "\n";
    if (cfg.initial.sigma_q) out << "sigma_q = " << format_double(*cfg.initial.sigma_q) << "\n";
    if (cfg.initial.sigma_p) out << "sigma_p = " << format_double(*cfg.initial.sigma_p) << "\n";
    out << "\n[run]\n";
    out << "mode = " << to_string(cfg.mode) << "\n";
    if (cfg.dt) out << "dt = " << format_double(*cfg.dt) << "\n";
    out << "t_end = " << format_double(cfg.t_end) << "\n";
    if (cfg.checkpoint_every)
        out << "checkpoint_every = " << format_double(*cfg.checkpoint_every) << "\n";
    out << "output_dir = " << cfg.output_dir << "\n";
    out << "seed = " << cfg.seed << "\n";
    return out.str();
}

} // namespace phaseflow
