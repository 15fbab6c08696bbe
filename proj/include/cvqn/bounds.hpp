#pragma once
// Repeaterless capacity bounds and the cross-scheme comparison table.

#include <cmath>
#include <span>
#include <vector>

#include "cvqn/errors.hpp"
#include "cvqn/network.hpp"
#include "cvqn/security.hpp"

namespace cvqn {

/// Point-to-point repeaterless secret-key capacity, -log2(1 - T) bits per channel use.
inline double plob(double t) {
    if (!(t > 0.0)) throw Error(ErrorKind::InvalidParameter, "transmittance must be > 0");
    if (t >= 1.0) throw Error(ErrorKind::InfiniteCapacity, "a lossless channel has unbounded capacity");
    return -std::log1p(-t) / std::log(2.0);
}

inline double plob_n(double t, int n_users) {
    if (n_users < 1) throw Error(ErrorKind::InvalidParameter, "n_users must be >= 1");
    return n_users * plob(t);
}

/// Mean per-user bound over the fiber-only transmittances (detector excluded).
inline double mean_plob(const NetworkScenario& s) {
    double sum = 0.0;
    for (const auto& ch : s.channels) sum += plob(ch.fiber_transmittance());
    return sum / s.n_users;
}

struct ComparisonRow {
    int n_users = 0;
    Scheme scheme = Scheme::frequency;
    double distance_km = 0.0;
    double total_bits_per_symbol = 0.0;  // key per channel use, F_m k_n divided out
    double total_skr_bps = 0.0;
    double plob = 0.0;
    double plob_n = 0.0;
};

inline constexpr Scheme kAllSchemes[] = {Scheme::frequency, Scheme::temporal, Scheme::splitter};

inline ComparisonRow compare_row(const NetworkScenario& base, int n, Scheme scheme) {
    NetworkScenario s = resized(base, n);
    s.scheme = scheme;
    const SecurityResult r = network_skr(s);
    ComparisonRow row;
    row.n_users = n;
    row.scheme = scheme;
    row.distance_km = s.channels[0].distance_km;
    row.total_bits_per_symbol = r.normalized_key();
    row.total_skr_bps = r.total_skr_bps;
    row.plob = mean_plob(s);
    row.plob_n = n * row.plob;
    return row;
}

/// One row per (N, scheme), N-major, schemes in {frequency, temporal, splitter} order.
inline std::vector<ComparisonRow> compare_schemes(const NetworkScenario& base, std::span<const int> n_values) {
    base.validate();
    std::vector<ComparisonRow> rows;
    rows.reserve(n_values.size() * 3);
    for (int n : n_values)
        for (Scheme scheme : kAllSchemes) rows.push_back(compare_row(base, n, scheme));
    return rows;
}

}  // namespace cvqn
