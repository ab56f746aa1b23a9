// cli.hpp - Command-line front end (run | sweep | preset | validate)
//
// Exit codes: 0 success, 1 validation or integration failure, 2 usage/config error.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stirap/config.hpp"
#include "stirap/errors.hpp"
#include "stirap/propagator.hpp"
#include "stirap/sweep.hpp"
#include "stirap/validate.hpp"

namespace stirap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct UsageError : Error {
    using Error::Error;
};

enum class CommandKind { RUN, SWEEP, PRESET, VALIDATE, HELP };

struct GridSpec {
    double start{0.0};
    double stop{0.0};
    std::size_t points{0};
    bool log{false};
};

struct CliCommand {
    CommandKind kind{CommandKind::HELP};
    std::string config_path;
    std::string out_path;
    sweep::Axis axis{sweep::Axis::ETA};
    GridSpec grid{};
    std::optional<int> rescale_ref;
    std::size_t workers{1};
    std::string preset_name;
    std::string out_dir;
    validate::Level level{validate::Level::QUICK};
    std::string help_text;
};

// "start:stop:points:log" with the last field log|lin.
inline GridSpec parse_grid(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 4) throw UsageError("--grid expects start:stop:points:log|lin");
    GridSpec g;
    try {
        std::size_t used = 0;
        g.start = std::stod(parts[0], &used);
        if (used != parts[0].size()) throw std::invalid_argument("start");
        g.stop = std::stod(parts[1], &used);
        if (used != parts[1].size()) throw std::invalid_argument("stop");
        const long long n = std::stoll(parts[2], &used);
        if (used != parts[2].size() || n < 1) throw std::invalid_argument("points");
        g.points = static_cast<std::size_t>(n);
    } catch (const std::exception&) {
        throw UsageError("--grid: malformed value in '" + text + "'");
    }
    if (parts[3] == "log") g.log = true;
    else if (parts[3] == "lin") g.log = false;
    else throw UsageError("--grid: last field must be log or lin");
    return g;
}

inline CliCommand parse_args(const std::vector<std::string>& args) {
    CLI::App app{"STIRAP with a spin bath: single runs, sweeps, figure presets, self-checks",
                 "stirap"};
    app.require_subcommand(1, 1);

    CliCommand cmd;
    std::string axis = "eta";
    std::string grid;
    std::string level = "quick";
    int rescale = 0;

    auto* run = app.add_subcommand("run", "evolve one configuration, print key=value results");
    run->add_option("--config", cmd.config_path, "JSON run configuration")->required();
    run->add_option("--out", cmd.out_path, "write the snapshot trajectory as CSV");

    auto* sw = app.add_subcommand("sweep", "sweep eta or delta_e and write CSV rows");
    sw->add_option("--config", cmd.config_path, "JSON base configuration")->required();
    sw->add_option("--axis", axis, "eta | delta_e")->required();
    sw->add_option("--grid", grid, "start:stop:points:log|lin")->required();
    auto* rescale_opt =
        sw->add_option("--rescale-ref", rescale, "rescale coupling by sqrt(L_ref / L)");
    sw->add_option("--out", cmd.out_path, "CSV output path")->required();
    sw->add_option("--workers", cmd.workers, "parallel workers")->check(CLI::PositiveNumber);

    auto* pre = app.add_subcommand("preset", "reproduce a figure sweep");
    pre->add_option("--name", cmd.preset_name, "fig3a | fig3b | fig3c | fig4 | fig5")
        ->required()
        ->check(CLI::IsMember(sweep::preset_names()));
    pre->add_option("--out-dir", cmd.out_dir, "directory for the CSV files")->required();
    pre->add_option("--workers", cmd.workers, "parallel workers")->check(CLI::PositiveNumber);

    auto* val = app.add_subcommand("validate", "run the oracle self-check suite");
    val->add_option("--level", level, "quick | full")->check(CLI::IsMember({"quick", "full"}));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        cmd.kind = CommandKind::HELP;
        cmd.help_text = app.help();
        return cmd;
    } catch (const CLI::CallForAllHelp&) {
        cmd.kind = CommandKind::HELP;
        cmd.help_text = app.help("", CLI::AppFormatMode::All);
        return cmd;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    if (run->parsed()) {
        cmd.kind = CommandKind::RUN;
    } else if (sw->parsed()) {
        cmd.kind = CommandKind::SWEEP;
        try {
            cmd.axis = sweep::parse_axis(axis);
        } catch (const InvalidParameter& e) {
            throw UsageError(e.what());
        }
        cmd.grid = parse_grid(grid);
        if (rescale_opt->count() > 0) {
            if (rescale < 1) throw UsageError("--rescale-ref must be a positive integer");
            if (cmd.axis != sweep::Axis::ETA)
                throw UsageError("--rescale-ref only applies to the eta axis");
            cmd.rescale_ref = rescale;
        }
    } else if (pre->parsed()) {
        cmd.kind = CommandKind::PRESET;
    } else if (val->parsed()) {
        cmd.kind = CommandKind::VALIDATE;
        cmd.level = level == "full" ? validate::Level::FULL : validate::Level::QUICK;
    }
    return cmd;
}

inline void print_result(std::ostream& out, const propagator::RunResult& r) {
    auto kv = [&](const char* k, double v) { out << k << '=' << sweep::format_double(v) << '\n'; };
    kv("p_g1", r.p_g1);
    kv("p_g2", r.p_g2);
    kv("p_e", r.p_e);
    kv("purity", r.purity);
    kv("jz_mean", r.jz_mean);
    kv("jz_var", r.jz_var);
    kv("norm_error", r.norm_error);
    kv("max_norm_drift", r.max_norm_drift);
    kv("max_energy_imag", r.max_energy_imag);
    kv("norm_bound", r.norm_bound);
    out << "steps=" << r.integrator.steps << '\n';
    kv("dt", r.integrator.dt);
}

inline void write_trajectory(const propagator::RunResult& r, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f << "t,p_g1,p_g2,p_e,purity,jz_mean,jz_var,norm\n";
    for (const auto& s : r.snapshots) {
        const auto& o = s.obs;
        f << sweep::format_double(s.t);
        for (double v : {o.p_g1, o.p_g2, o.p_e, o.purity, o.jz_mean, o.jz_var, o.norm})
            f << ',' << sweep::format_double(v);
        f << '\n';
    }
    if (!f) throw IoError("write to '" + path.string() + "' failed");
}

inline int report_rows(std::ostream& err, const std::string& label,
                       const std::vector<sweep::SweepRow>& rows) {
    int status = kExitOk;
    for (const auto& r : rows)
        if (r.status == sweep::RowStatus::FAILED) {
            err << label << ": point eta=" << r.eta << " delta_e=" << r.delta_e
                << " failed: " << r.error << '\n';
            status = kExitFailure;
        }
    return status;
}

// An unreadable config file is reported as a config error.
inline RunConfig load_for_cli(const std::string& path) {
    try {
        return config::load_config(path);
    } catch (const IoError& e) {
        throw ConfigError("<file>", e.what());
    }
}

inline int execute(const CliCommand& cmd, std::ostream& out, std::ostream& err) {
    switch (cmd.kind) {
    case CommandKind::HELP:
        out << cmd.help_text;
        return kExitOk;

    case CommandKind::RUN: {
        const RunConfig cfg = load_for_cli(cmd.config_path);
        const propagator::RunResult r = propagator::evolve(cfg);
        print_result(out, r);
        if (!cmd.out_path.empty()) write_trajectory(r, cmd.out_path);
        if (r.norm_error > propagator::kNormTolerance) {
            err << "norm error " << r.norm_error << " above " << propagator::kNormTolerance << '\n';
            return kExitFailure;
        }
        return kExitOk;
    }

    case CommandKind::SWEEP: {
        sweep::SweepSpec spec;
        spec.base = load_for_cli(cmd.config_path);
        spec.axis = cmd.axis;
        try {
            spec.grid = sweep::make_grid(cmd.grid.start, cmd.grid.stop, cmd.grid.points, cmd.grid.log);
            spec.rescale_reference = cmd.rescale_ref;
            spec.output_path = cmd.out_path;
            spec.validate();
        } catch (const InvalidParameter& e) {
            throw UsageError(e.what());
        } catch (const InvalidConfiguration& e) {
            throw UsageError(e.what());
        }
        const auto rows = sweep::run_sweep(spec, cmd.workers);
        sweep::write_csv(rows, spec.output_path);
        return report_rows(err, spec.output_path, rows);
    }

    case CommandKind::PRESET: {
        std::filesystem::create_directories(cmd.out_dir);
        const auto specs = sweep::preset(cmd.preset_name, cmd.out_dir);
        const auto results = sweep::run_sweeps(specs, cmd.workers);
        int status = kExitOk;
        for (std::size_t s = 0; s < specs.size(); ++s) {
            sweep::write_csv(results[s], specs[s].output_path);
            out << specs[s].output_path;
            try {
                out << " knee_eta=" << sweep::format_double(sweep::knee(results[s]));
            } catch (const NoKnee&) {
                out << " knee_eta=none";
            }
            out << '\n';
            if (report_rows(err, specs[s].output_path, results[s]) != kExitOk) status = kExitFailure;
        }
        return status;
    }

    case CommandKind::VALIDATE: {
        validate::Options opt;
        opt.level = cmd.level;
        const validate::Report rep = validate::run(opt);
        for (const auto& c : rep.checks) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.3e (tol %.1e)", c.value, c.tolerance);
            out << (c.passed ? "PASS  " : "FAIL  ") << c.name << "  " << buf << '\n';
        }
        if (!rep.all_passed()) {
            err << "validation failed:";
            for (const auto& c : rep.checks)
                if (!c.passed) err << " [" << c.name << ']';
            err << '\n';
            return kExitFailure;
        }
        return kExitOk;
    }
    }
    return kExitUsage;
}

// Full pipeline with the exit-code contract; args exclude the program name.
inline int main(const std::vector<std::string>& args, std::ostream& out = std::cout,
                std::ostream& err = std::cerr) {
    try {
        return execute(parse_args(args), out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IntegrationFailure& e) {
        err << "integration failure: " << e.what() << '\n';
        return kExitFailure;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

} // namespace stirap::cli
