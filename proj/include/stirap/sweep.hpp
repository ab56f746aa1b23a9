// sweep.hpp - Parameter sweeps over eta or Delta_E, knee extraction, presets and
// CSV persistence.

#pragma once

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "stirap/errors.hpp"
#include "stirap/model.hpp"
#include "stirap/propagator.hpp"

namespace stirap::sweep {

enum class Axis { ETA, DELTA_E };

inline const char* to_string(Axis a) noexcept { return a == Axis::ETA ? "eta" : "delta_e"; }

inline Axis parse_axis(const std::string& s) {
    if (s == "eta") return Axis::ETA;
    if (s == "delta_e") return Axis::DELTA_E;
    throw InvalidParameter("unknown sweep axis '" + s + "' (expected eta or delta_e)");
}

inline constexpr double kDefaultGridStart = 1e-2;
inline constexpr double kDefaultGridStop = 1e3;
inline constexpr std::size_t kDefaultGridPoints = 25;
inline constexpr double kKneeThreshold = 0.5;

inline std::vector<double> make_grid(double start, double stop, std::size_t points, bool log) {
    if (points == 0) throw InvalidParameter("grid needs at least one point");
    if (!std::isfinite(start) || !std::isfinite(stop))
        throw InvalidParameter("grid endpoints must be finite");
    if (log && !(start > 0.0 && stop > 0.0))
        throw InvalidParameter("log grid needs positive endpoints");
    if (points == 1) return {start};
    if (!(stop > start)) throw InvalidParameter("grid must be strictly increasing");
    std::vector<double> grid(points);
    const double a = log ? std::log10(start) : start;
    const double b = log ? std::log10(stop) : stop;
    for (std::size_t i = 0; i < points; ++i) {
        const double u = a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1);
        grid[i] = log ? std::pow(10.0, u) : u;
    }
    // Pin the endpoints exactly.
    grid.front() = start;
    grid.back() = stop;
    return grid;
}

inline std::vector<double> default_grid() {
    return make_grid(kDefaultGridStart, kDefaultGridStop, kDefaultGridPoints, true);
}

struct SweepSpec {
    RunConfig base{};
    Axis axis{Axis::ETA};
    std::vector<double> grid{};
    std::optional<int> rescale_reference{};  // L_ref: coupling used is eta sqrt(L_ref / L)
    std::string output_path{};

    void validate() const {
        if (grid.empty()) throw InvalidParameter("sweep grid is empty");
        for (std::size_t i = 1; i < grid.size(); ++i)
            if (!(grid[i] > grid[i - 1]))
                throw InvalidParameter("sweep grid must be strictly increasing");
        for (double v : grid)
            if (!std::isfinite(v)) throw InvalidParameter("sweep grid value not finite");
        if (axis == Axis::ETA && !is_homogeneous(base.coupling))
            throw InvalidConfiguration("eta axis needs a homogeneous base coupling");
        if (rescale_reference && *rescale_reference < 1)
            throw InvalidParameter("rescale reference L must be >= 1");
        base.validate();
    }

    double rescale_factor() const {
        if (!rescale_reference) return 1.0;
        return std::sqrt(static_cast<double>(*rescale_reference) / base.n_spins);
    }

    // The RunConfig evolved at grid point i.
    RunConfig point(std::size_t i) const {
        RunConfig cfg = base;
        if (axis == Axis::ETA) cfg.coupling = grid.at(i);
        else cfg.delta_e = grid.at(i);
        if (rescale_reference) {
            const double f = rescale_factor();
            if (is_homogeneous(cfg.coupling)) {
                cfg.coupling = std::get<double>(cfg.coupling) * f;
            } else {
                EtaMatrix m = std::get<EtaMatrix>(cfg.coupling);
                for (auto& row : m) row = {row[0] * f, row[1] * f};
                cfg.coupling = std::move(m);
            }
        }
        return cfg;
    }
};

enum class RowStatus { OK, FAILED };

// RunConfig scalars echoed (eta is the nominal, pre-rescale value) plus RunResult
// scalars. Failed points keep the echo and carry NaN results.
struct SweepRow {
    double eta{0.0};
    int n_spins{0};
    double delta_s{0.0};
    double delta_e{0.0};
    double omega0{0.0};
    double tau{0.0};
    double prefactor{0.0};
    double p_g1{0.0};
    double p_g2{0.0};
    double p_e{0.0};
    double purity{0.0};
    double jz_mean{0.0};
    double jz_var{0.0};
    double norm_error{0.0};
    RowStatus status{RowStatus::OK};
    // Not persisted:
    double max_norm_drift{0.0};
    std::string error{};
};

inline SweepRow echo_row(const SweepSpec& spec, std::size_t i) {
    const RunConfig& b = spec.base;
    SweepRow row;
    if (spec.axis == Axis::ETA) row.eta = spec.grid[i];
    else row.eta = is_homogeneous(b.coupling) ? std::get<double>(b.coupling)
                                              : std::numeric_limits<double>::quiet_NaN();
    row.n_spins = b.n_spins;
    row.delta_s = b.delta_s;
    row.delta_e = spec.axis == Axis::DELTA_E ? spec.grid[i] : b.delta_e;
    row.omega0 = b.pulse.omega0;
    row.tau = b.pulse.tau;
    row.prefactor = b.coupling_prefactor;
    return row;
}

inline SweepRow run_point(const SweepSpec& spec, std::size_t i) {
    SweepRow row = echo_row(spec, i);
    try {
        RunConfig cfg = spec.point(i);
        cfg.snapshot_count = 0;
        const propagator::RunResult r = propagator::evolve(cfg);
        row.p_g1 = r.p_g1;
        row.p_g2 = r.p_g2;
        row.p_e = r.p_e;
        row.purity = r.purity;
        row.jz_mean = r.jz_mean;
        row.jz_var = r.jz_var;
        row.norm_error = r.norm_error;
        row.max_norm_drift = r.max_norm_drift;
    } catch (const Error& e) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.p_g1 = row.p_g2 = row.p_e = row.purity = nan;
        row.jz_mean = row.jz_var = row.norm_error = row.max_norm_drift = nan;
        row.status = RowStatus::FAILED;
        row.error = e.what();
    }
    return row;
}

inline std::size_t default_workers() {
    return std::max(1u, std::thread::hardware_concurrency());
}

// Evaluate `count` independent tasks on `workers` threads; results land at their
// own index, so the output order never depends on scheduling.
template <class Fn>
auto parallel_map(std::size_t count, std::size_t workers, Fn&& fn)
    -> std::vector<decltype(fn(std::size_t{0}))> {
    std::vector<decltype(fn(std::size_t{0}))> out(count);
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
    std::atomic<std::size_t> next{0};
    auto drain = [&] {
        for (std::size_t i = next++; i < count; i = next++) out[i] = fn(i);
    };
    if (workers == 1) {
        drain();
        return out;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(drain);
    pool.clear();  // joins
    return out;
}

inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, std::size_t workers = 1) {
    spec.validate();
    return parallel_map(spec.grid.size(), workers,
                        [&](std::size_t i) { return run_point(spec, i); });
}

// Several specs on one shared pool; result[s] holds the rows of specs[s].
inline std::vector<std::vector<SweepRow>> run_sweeps(const std::vector<SweepSpec>& specs,
                                                     std::size_t workers = 1) {
    std::vector<std::pair<std::size_t, std::size_t>> tasks;
    for (std::size_t s = 0; s < specs.size(); ++s) {
        specs[s].validate();
        for (std::size_t i = 0; i < specs[s].grid.size(); ++i) tasks.emplace_back(s, i);
    }
    // Largest spin counts first; they dominate the wall time.
    std::stable_sort(tasks.begin(), tasks.end(), [&](const auto& a, const auto& b) {
        return specs[a.first].base.n_spins > specs[b.first].base.n_spins;
    });
    const std::vector<SweepRow> flat = parallel_map(tasks.size(), workers, [&](std::size_t k) {
        return run_point(specs[tasks[k].first], tasks[k].second);
    });
    std::vector<std::vector<SweepRow>> out(specs.size());
    for (std::size_t s = 0; s < specs.size(); ++s) out[s].resize(specs[s].grid.size());
    for (std::size_t k = 0; k < tasks.size(); ++k) out[tasks[k].first][tasks[k].second] = flat[k];
    return out;
}

inline bool any_failed(const std::vector<SweepRow>& rows) {
    return std::any_of(rows.begin(), rows.end(),
                       [](const SweepRow& r) { return r.status == RowStatus::FAILED; });
}

// Knee: first downward crossing of `threshold` by P(T) = p_g2, interpolated
// linearly in log10(eta).
inline double knee(const std::vector<SweepRow>& rows, double threshold = kKneeThreshold) {
    if (rows.size() < 2) throw NoKnee("knee needs at least two rows");
    if (!(rows.front().p_g2 >= threshold) || !(rows.back().p_g2 <= threshold))
        throw NoKnee("efficiency does not fall through the threshold across the grid");
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        const SweepRow& a = rows[i];
        const SweepRow& b = rows[i + 1];
        if (a.p_g2 >= threshold && b.p_g2 < threshold) {
            if (!(a.eta > 0.0) || !(b.eta > 0.0)) throw NoKnee("knee needs positive eta values");
            const double frac = (threshold - a.p_g2) / (b.p_g2 - a.p_g2);
            const double la = std::log10(a.eta);
            const double lb = std::log10(b.eta);
            return std::pow(10.0, la + frac * (lb - la));
        }
    }
    // Only reachable when the last row sits exactly on the threshold.
    return rows.back().eta;
}

// Sign changes of Delta P between adjacent rows; > 1 flags a non-monotone curve.
inline std::size_t monotonicity_breaks(const std::vector<SweepRow>& rows) {
    std::size_t breaks = 0;
    int last = 0;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        const double d = rows[i + 1].p_g2 - rows[i].p_g2;
        const int sign = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
        if (sign != 0 && last != 0 && sign != last) ++breaks;
        if (sign != 0) last = sign;
    }
    return breaks;
}

// Parameters shared by every figure preset.
inline RunConfig figure_base() {
    RunConfig cfg;
    cfg.pulse = {100.0, 0.1, 1.0};
    cfg.delta_s = 1.0;
    cfg.delta_e = 1.0;
    cfg.n_spins = 10;
    cfg.coupling = 0.0;
    cfg.model_kind = ModelKind::COLLECTIVE;
    return cfg;
}

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"fig3a", "fig3b", "fig3c", "fig4", "fig5"};
    return names;
}

inline std::string format_number(double v);

// fig3a/b/c: L in {10, 20, 40}, same runs, different observables of interest.
// fig4: as fig3 with the sqrt(10/L) rescaling. fig5: L = 10, Delta_E in {1, 50, 100, 500}.
inline std::vector<SweepSpec> preset(const std::string& name,
                                     const std::filesystem::path& out_dir = {}) {
    const bool fig3 = name == "fig3a" || name == "fig3b" || name == "fig3c";
    std::vector<SweepSpec> specs;
    if (fig3 || name == "fig4") {
        for (int L : {10, 20, 40}) {
            SweepSpec s;
            s.base = figure_base();
            s.base.n_spins = L;
            s.axis = Axis::ETA;
            s.grid = default_grid();
            if (name == "fig4") s.rescale_reference = 10;
            s.output_path = (out_dir / (name + "_L" + std::to_string(L) + ".csv")).string();
            specs.push_back(std::move(s));
        }
    } else if (name == "fig5") {
        for (double de : {1.0, 50.0, 100.0, 500.0}) {
            SweepSpec s;
            s.base = figure_base();
            s.base.delta_e = de;
            s.axis = Axis::ETA;
            s.grid = default_grid();
            s.output_path =
                (out_dir / (name + "_dE" + format_number(de) + ".csv")).string();
            specs.push_back(std::move(s));
        }
    } else {
        throw InvalidParameter("unknown preset '" + name + "'");
    }
    return specs;
}

// ------------------------------- CSV ---------------------------------------

inline constexpr const char* kCsvHeader =
    "eta,L,delta_s,delta_e,omega0,tau,prefactor,p_g1,p_g2,p_e,purity,jz_mean,jz_var,"
    "norm_error,status";

// 17 significant digits; round-trips every double through strtod.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Short form for file names (1, 50, 0.5).
inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline std::string csv_line(const SweepRow& r) {
    std::string s = format_double(r.eta);
    s += ',' + std::to_string(r.n_spins);
    for (double v : {r.delta_s, r.delta_e, r.omega0, r.tau, r.prefactor, r.p_g1, r.p_g2, r.p_e,
                     r.purity, r.jz_mean, r.jz_var, r.norm_error})
        s += ',' + format_double(v);
    s += r.status == RowStatus::OK ? ",ok" : ",failed";
    return s;
}

inline std::string to_csv(const std::vector<SweepRow>& rows) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const SweepRow& r : rows) {
        out += csv_line(r);
        out += '\n';
    }
    return out;
}

inline void write_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing: " + std::strerror(errno));
    f << to_csv(rows);
    f.flush();
    if (!f) throw IoError("write to '" + path.string() + "' failed");
}

namespace detail {

inline double parse_double(const std::string& s, const std::string& context) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        throw IoError(context + ": malformed number '" + s + "'");
    return v;
}

} // namespace detail

inline std::vector<SweepRow> read_csv(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "' for reading");
    std::string line;
    if (!std::getline(f, line) || line != kCsvHeader)
        throw IoError("'" + path.string() + "': missing or unexpected CSV header");
    std::vector<SweepRow> rows;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        const std::string ctx = path.string() + ":" + std::to_string(lineno);
        if (cells.size() != 15) throw IoError(ctx + ": expected 15 columns");
        SweepRow r;
        r.eta = detail::parse_double(cells[0], ctx);
        r.n_spins = std::stoi(cells[1]);
        double* fields[] = {&r.delta_s, &r.delta_e, &r.omega0, &r.tau,    &r.prefactor, &r.p_g1,
                            &r.p_g2,    &r.p_e,     &r.purity, &r.jz_mean, &r.jz_var,  &r.norm_error};
        for (std::size_t k = 0; k < 12; ++k) *fields[k] = detail::parse_double(cells[2 + k], ctx);
        if (cells[14] == "ok") r.status = RowStatus::OK;
        else if (cells[14] == "failed") r.status = RowStatus::FAILED;
        else throw IoError(ctx + ": unknown status '" + cells[14] + "'");
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace stirap::sweep
