#pragma once
// Subcommand implementations behind the cvqn tool: skr, sweep, compare, simulate, bounds.
// Each writes human-readable text to one stream and CSV to another.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cvqn/bounds.hpp"
#include "cvqn/errors.hpp"
#include "cvqn/format.hpp"
#include "cvqn/network.hpp"
#include "cvqn/scenario_io.hpp"
#include "cvqn/security.hpp"
#include "cvqn/simulator.hpp"

namespace cvqn {

inline constexpr const char* kScenarioDirEnv = "CVQN_SCENARIO_DIR";
inline constexpr const char* kDefaultScenarioName = "default.json";

/// Resolves a scenario argument. A missing argument means default.json; relative
/// paths that do not exist are looked up in $CVQN_SCENARIO_DIR, then `fallback_dir`.
inline std::string resolve_scenario_path(const std::optional<std::string>& arg, const std::string& fallback_dir = "") {
    namespace fs = std::filesystem;
    const std::string name = arg.value_or(kDefaultScenarioName);
    if (arg && fs::exists(name)) return name;
    if (fs::path(name).is_absolute()) return name;
    std::vector<std::string> dirs;
    if (const char* env = std::getenv(kScenarioDirEnv); env && *env) dirs.emplace_back(env);
    if (!fallback_dir.empty()) dirs.push_back(fallback_dir);
    for (const auto& d : dirs) {
        const fs::path p = fs::path(d) / name;
        if (fs::exists(p)) return p.string();
    }
    return name;  // load_scenario reports the I/O error
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
    return out;
}

// plob of the mean fiber transmittance; +inf for a lossless channel.
inline double plob_or_inf(const NetworkScenario& s) {
    try {
        return mean_plob(s);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::InfiniteCapacity) return std::numeric_limits<double>::infinity();
        throw;
    }
}

// ---------------------------------------------------------------------------
// skr

inline std::string skr_report(const NetworkScenario& s, const SecurityResult& r) {
    std::string out;
    out += "users " + std::to_string(s.n_users) + ", scheme " + std::string(to_string(s.scheme)) + ", regime " +
           std::string(to_string(s.regime.regime)) + ", isolation " + std::string(to_string(s.isolation.kind));
    if (s.isolation.kind != IsolationKind::perfect) out += " " + table_number(s.isolation.isolation_db) + " dB";
    out += "\n\n";

    TextTable t({"user", "I_AB", "chi_BE", "key_bits", "key_bps", "clamped"});
    const double per_symbol_to_bps = s.rep_rate_hz * r.key_fraction / r.multiplex_divisor;
    for (int j = 0; j < s.n_users; ++j) {
        const auto i = static_cast<std::size_t>(j);
        t.add({std::to_string(j), table_number(r.per_user_mi[i]),
               r.per_user_authoritative ? table_number(r.chi_be_per_user[i]) : "joint",
               table_number(r.per_user_key[i]), table_number(r.per_user_key[i] * per_symbol_to_bps),
               r.clamped[i] ? "yes" : "no"});
    }
    out += t.str() + "\n";

    TextTable totals({"quantity", "value"});
    totals.add({"chi_BE (network)", table_number(r.chi_be_total)});
    totals.add({"chi_BE (sum of links)", table_number(r.chi_be_links)});
    totals.add({"delta per user", table_number(r.delta)});
    totals.add({"raw bits/symbol", table_number(r.raw_bits_per_symbol)});
    totals.add({"total bits/symbol", table_number(r.total_bits_per_symbol)});
    totals.add({"key fraction", table_number(r.key_fraction)});
    totals.add({"multiplex divisor", table_number(r.multiplex_divisor)});
    totals.add({"total SKR (bps)", table_number(r.total_skr_bps)});
    totals.add({"clamped users", std::to_string(r.clamped_count())});
    out += totals.str() + "\n";

    out += "@result total_skr_bps=" + csv_number(r.total_skr_bps) +
           " total_bits_per_symbol=" + csv_number(r.total_bits_per_symbol) +
           " normalized_key=" + csv_number(r.normalized_key()) + " chi_be=" + csv_number(r.chi_be_total) +
           " delta=" + csv_number(r.delta) + " clamped_count=" + std::to_string(r.clamped_count()) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// sweep

enum class SweepAxis { distance, n_users, isolation_db };

inline SweepAxis parse_axis(const std::string& name) {
    if (name == "distance" || name == "distance_km") return SweepAxis::distance;
    if (name == "n_users") return SweepAxis::n_users;
    if (name == "isolation_db" || name == "isolation") return SweepAxis::isolation_db;
    throw Error(ErrorKind::InvalidParameter, "unknown sweep axis '" + name + "' (distance, n_users, isolation_db)");
}

inline std::string_view axis_column(SweepAxis a) {
    switch (a) {
        case SweepAxis::distance: return "distance_km";
        case SweepAxis::n_users: return "n_users";
        case SweepAxis::isolation_db: return "isolation_db";
    }
    return "?";
}

struct SweepRow {
    double value = 0.0;
    int n_users = 0;
    double per_user_bits_per_symbol = 0.0;
    double total_bits_per_symbol = 0.0;  // per channel use, comparable with plob_n
    double total_skr_bps = 0.0;
    double plob = 0.0;
    double plob_n = 0.0;
    int clamped_count = 0;
    bool physical = true;
};

/// `steps` evenly spaced points from `from` to `to` inclusive. For n_users the
/// points are rounded to integers and duplicates dropped.
inline std::vector<double> sweep_points(SweepAxis axis, double from, double to, int steps) {
    if (!std::isfinite(from) || !std::isfinite(to)) throw Error(ErrorKind::InvalidRange, "range must be finite");
    if (from > to) throw Error(ErrorKind::InvalidRange, "reversed range: from > to");
    if (steps < 1) throw Error(ErrorKind::InvalidRange, "steps must be >= 1");
    if (steps == 1 && from != to) throw Error(ErrorKind::InvalidRange, "a single step needs from == to");
    std::vector<double> pts;
    for (int k = 0; k < steps; ++k) {
        double v = steps == 1 ? from : from + (to - from) * k / (steps - 1);
        if (k == steps - 1) v = to;
        if (axis == SweepAxis::n_users) {
            v = std::round(v);
            if (v < 1) throw Error(ErrorKind::InvalidRange, "n_users must be >= 1");
            if (!pts.empty() && pts.back() == v) continue;
        }
        pts.push_back(v);
    }
    if (axis == SweepAxis::distance && from < 0) throw Error(ErrorKind::InvalidRange, "distance must be >= 0");
    if (axis == SweepAxis::isolation_db && to > 0) throw Error(ErrorKind::InvalidRange, "isolation_db must be <= 0");
    return pts;
}

inline NetworkScenario sweep_scenario(const NetworkScenario& base, SweepAxis axis, double v) {
    NetworkScenario s = base;
    switch (axis) {
        case SweepAxis::distance:
            for (auto& ch : s.channels) ch.distance_km = v;
            break;
        case SweepAxis::n_users:
            s = resized(base, static_cast<int>(v));
            break;
        case SweepAxis::isolation_db:
            s.isolation = IsolationModel::decay(v);
            break;
    }
    return s;
}

/// Evaluates the key at each point. Points whose network state is unphysical
/// are kept as zero-key rows flagged `physical = false`.
inline std::vector<SweepRow> run_sweep(const NetworkScenario& base, SweepAxis axis, double from, double to, int steps) {
    base.validate();
    std::vector<SweepRow> rows;
    for (double v : sweep_points(axis, from, to, steps)) {
        const NetworkScenario s = sweep_scenario(base, axis, v);
        SweepRow row;
        row.value = v;
        row.n_users = s.n_users;
        row.plob = plob_or_inf(s);
        row.plob_n = s.n_users * row.plob;
        try {
            const SecurityResult r = network_skr(s);
            row.total_bits_per_symbol = r.normalized_key();
            row.per_user_bits_per_symbol = row.total_bits_per_symbol / s.n_users;
            row.total_skr_bps = r.total_skr_bps;
            row.clamped_count = r.clamped_count();
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::UnphysicalChannel) throw;
            row.physical = false;
            row.clamped_count = s.n_users;
        }
        rows.push_back(row);
    }
    return rows;
}

inline void write_sweep_csv(std::ostream& out, SweepAxis axis, const std::vector<SweepRow>& rows) {
    out << "# cvqn sweep v1; bits per channel use; status unphysical marks states outside the physical set\n";
    out << csv_line({std::string(axis_column(axis)), "per_user_bits_per_symbol", "total_bits_per_symbol",
                     "total_skr_bps", "plob", "plob_n", "clamped_count", "status"});
    for (const auto& r : rows)
        out << csv_line({csv_number(r.value), csv_number(r.per_user_bits_per_symbol), csv_number(r.total_bits_per_symbol),
                         csv_number(r.total_skr_bps), csv_number(r.plob), csv_number(r.plob_n),
                         std::to_string(r.clamped_count), r.physical ? "ok" : "unphysical"});
}

// ---------------------------------------------------------------------------
// compare

inline void write_compare_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
    out << "# cvqn compare v1; total_bits_per_symbol is per channel use\n";
    out << csv_line({"n_users", "scheme", "distance_km", "total_bits_per_symbol", "total_skr_bps", "plob", "plob_n"});
    for (const auto& r : rows)
        out << csv_line({std::to_string(r.n_users), std::string(to_string(r.scheme)), csv_number(r.distance_km),
                         csv_number(r.total_bits_per_symbol), csv_number(r.total_skr_bps), csv_number(r.plob),
                         csv_number(r.plob_n)});
}

inline std::vector<ComparisonRow> run_compare(const NetworkScenario& base, int n_max) {
    if (n_max < 1) throw Error(ErrorKind::InvalidRange, "n_max must be >= 1");
    std::vector<int> ns;
    for (int n = 1; n <= n_max; ++n) ns.push_back(n);
    return compare_schemes(base, ns);
}

inline std::string compare_report(const std::vector<ComparisonRow>& rows) {
    TextTable t({"N", "scheme", "bits/use", "SKR_bps", "PLOB", "PLOB-N"});
    for (const auto& r : rows)
        t.add({std::to_string(r.n_users), std::string(to_string(r.scheme)), table_number(r.total_bits_per_symbol),
               table_number(r.total_skr_bps), table_number(r.plob), table_number(r.plob_n)});
    return t.str();
}

// ---------------------------------------------------------------------------
// simulate

inline void write_estimates_csv(std::ostream& out, const NetworkScenario& s, const EndToEndResult& r) {
    out << "# cvqn simulate v1; n_symbols=" << r.n_symbols << "; seed=" << r.seed << "\n";
    out << csv_line({"user", "t_model", "t_hat", "eps_model", "eps_hat", "n_pe", "mi_estimated", "key_estimated",
                     "key_analytic"});
    for (int j = 0; j < s.n_users; ++j) {
        const auto i = static_cast<std::size_t>(j);
        const auto link = effective_link(s, j);
        const auto& e = r.channels[i];
        out << csv_line({std::to_string(j), csv_number(link.transmittance), csv_number(e.t_hat),
                         csv_number(link.excess_noise), csv_number(e.eps_hat), csv_number(e.n_pe),
                         csv_number(r.estimated.per_user_mi[i]), csv_number(r.estimated.per_user_key[i]),
                         csv_number(r.analytic.per_user_key[i])});
    }
}

inline void write_records_csv(std::ostream& out, const QuadratureRecords& rec) {
    out << "# cvqn records v1; seed=" << rec.rng_seed << "\n";
    out << csv_line({"symbol", "user", "x_a", "p_a", "x_b", "p_b"});
    for (std::uint64_t k = 0; k < rec.n_symbols; ++k)
        for (std::size_t j = 0; j < rec.users.size(); ++j) {
            const auto& u = rec.users[j];
            out << csv_line({std::to_string(k), std::to_string(j), csv_number(u.x_a[k]), csv_number(u.p_a[k]),
                             csv_number(u.x_b[k]), csv_number(u.p_b[k])});
        }
}

inline std::string simulate_report(const NetworkScenario& s, const EndToEndResult& r) {
    std::string out = "n_symbols " + std::to_string(r.n_symbols) + ", seed " + std::to_string(r.seed) + "\n\n";
    TextTable t({"user", "T_model", "T_hat", "eps_model", "eps_hat"});
    for (int j = 0; j < s.n_users; ++j) {
        const auto link = effective_link(s, j);
        const auto& e = r.channels[static_cast<std::size_t>(j)];
        t.add({std::to_string(j), table_number(link.transmittance), table_number(e.t_hat),
               table_number(link.excess_noise), table_number(e.eps_hat)});
    }
    out += t.str() + "\n";
    TextTable cmp({"", "analytic", "estimated"});
    cmp.add({"total bits/symbol", table_number(r.analytic.total_bits_per_symbol),
             table_number(r.estimated.total_bits_per_symbol)});
    cmp.add({"total SKR (bps)", table_number(r.analytic.total_skr_bps), table_number(r.estimated.total_skr_bps)});
    cmp.add({"clamped users", std::to_string(r.analytic.clamped_count()), std::to_string(r.estimated.clamped_count())});
    out += cmp.str();
    out += "relative gap " + table_number(r.relative_gap()) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// bounds

struct BoundsRow {
    double transmittance;
    double plob;
    double plob_n;
};

inline BoundsRow bounds_at(double t, int n_users) { return {t, plob(t), plob_n(t, n_users)}; }

}  // namespace cvqn
