#pragma once
/*
 * Monte-Carlo prepare-and-measure simulation.
 *
 * Per symbol k and user i, Alice draws x_A, p_A ~ N(0, V_mod,i). Bob j's
 * heterodyne outcome on each quadrature is
 *
 *   x_B,j = sqrt(eta_j / 2) * sum_i M_ji x_A,i + sigma_j n
 *   sigma_j^2 = eta_j T_j eps_j / 2 + 1 + v_el,j
 *
 * where M is the network's amplitude-mixing matrix. The field noise behind a
 * passive interferometer is I + diag(T eps) (input vacuum plus admitted vacuum
 * plus excess), so after the heterodyne split every user's noise is independent
 * and a shot-noise-only input reads unit variance.
 *
 * Randomness: one Philox block per (symbol, user, quadrature), stream
 * 2 * user + quadrature, giving Alice's symbol and Bob's noise draw.
 * Statistics are summed per fixed block of symbols and merged in block order,
 * so results do not depend on the number of worker threads.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <thread>
#include <vector>

#include "cvqn/errors.hpp"
#include "cvqn/network.hpp"
#include "cvqn/philox.hpp"
#include "cvqn/security.hpp"

namespace cvqn {

struct QuadratureRecords {
    struct User {
        std::vector<double> x_a, p_a, x_b, p_b;
    };
    std::vector<User> users;
    std::uint64_t n_symbols = 0;
    std::uint64_t rng_seed = 0;
};

struct EstimatedChannel {
    double t_hat = 0.0;    // transmittance seen by the user
    double eps_hat = 0.0;  // excess noise at the channel input, SNU, before clamping
    double n_pe = 0.0;     // samples used (both quadratures pooled)
};

/// Per-user zero-mean second moments, both quadratures pooled.
struct UserMoments {
    double sum_ab = 0.0;
    double sum_aa = 0.0;
    double sum_bb = 0.0;

    UserMoments& operator+=(const UserMoments& o) {
        sum_ab += o.sum_ab;
        sum_aa += o.sum_aa;
        sum_bb += o.sum_bb;
        return *this;
    }
};

struct SimulationStats {
    std::vector<UserMoments> users;
    std::uint64_t n_symbols = 0;
    std::uint64_t rng_seed = 0;

    double samples() const { return 2.0 * static_cast<double>(n_symbols); }
};

inline constexpr std::uint64_t kStatsBlock = 4096;

namespace detail {

// Everything needed to generate symbols, precomputed once per run.
struct SymbolModel {
    int n = 0;
    std::vector<double> sd_a;     // sqrt(V_mod)
    std::vector<double> sd_b;     // sigma_j
    std::vector<double> gain;     // sqrt(eta_j / 2)
    // Sparse rows of M: (source, weight) pairs with non-negligible weight.
    std::vector<std::vector<std::pair<int, double>>> rows;
};

inline SymbolModel make_symbol_model(const NetworkScenario& s) {
    s.validate();
    // The analytic state must exist for the simulated one to be meaningful.
    (void)build_eb_covariance(s);

    SymbolModel m;
    m.n = s.n_users;
    const Matrix mix = mixing_matrix(s);
    for (int j = 0; j < s.n_users; ++j) {
        const auto& ch = s.channels[static_cast<std::size_t>(j)];
        const double t = s.effective_transmittance(j);
        m.sd_a.push_back(std::sqrt(s.mod_variance_snu[static_cast<std::size_t>(j)]));
        m.sd_b.push_back(std::sqrt(ch.det_efficiency * t * ch.excess_noise_snu / 2.0 + 1.0 +
                                   ch.det_electronic_noise_snu));
        m.gain.push_back(std::sqrt(ch.det_efficiency / 2.0));
        std::vector<std::pair<int, double>> row;
        for (int i = 0; i < s.n_users; ++i)
            if (mix(j, i) > 1e-150) row.emplace_back(i, mix(j, i));
        m.rows.push_back(std::move(row));
    }
    return m;
}

// Fills a[2n] (Alice) and b[2n] (Bob) for symbol k, interleaved (x, p) per user.
inline void draw_symbol(const SymbolModel& m, std::uint64_t seed, std::uint64_t k, double* a, double* noise,
                        double* b) {
    for (int i = 0; i < m.n; ++i)
        for (int q = 0; q < 2; ++q) {
            const auto g = gaussian_pair(seed, k, static_cast<std::uint32_t>(2 * i + q));
            a[2 * i + q] = m.sd_a[static_cast<std::size_t>(i)] * g[0];
            noise[2 * i + q] = g[1];
        }
    for (int j = 0; j < m.n; ++j) {
        const auto idx = static_cast<std::size_t>(j);
        for (int q = 0; q < 2; ++q) {
            double field = 0.0;
            for (const auto& [i, w] : m.rows[idx]) field += w * a[2 * i + q];
            b[2 * j + q] = m.gain[idx] * field + m.sd_b[idx] * noise[2 * j + q];
        }
    }
}

inline std::vector<UserMoments> block_moments(const SymbolModel& m, std::uint64_t seed, std::uint64_t begin,
                                              std::uint64_t end) {
    std::vector<UserMoments> out(static_cast<std::size_t>(m.n));
    std::vector<double> a(2 * m.n), noise(2 * m.n), b(2 * m.n);
    for (std::uint64_t k = begin; k < end; ++k) {
        draw_symbol(m, seed, k, a.data(), noise.data(), b.data());
        for (int j = 0; j < m.n; ++j)
            for (int q = 0; q < 2; ++q) {
                const double x = a[2 * j + q], y = b[2 * j + q];
                auto& u = out[static_cast<std::size_t>(j)];
                u.sum_ab += x * y;
                u.sum_aa += x * x;
                u.sum_bb += y * y;
            }
    }
    return out;
}

}  // namespace detail

/// Materialises every symbol. Memory grows as 4 N n_symbols doubles.
inline QuadratureRecords simulate(const NetworkScenario& s, std::uint64_t n_symbols, std::uint64_t seed) {
    if (n_symbols < 1) throw Error(ErrorKind::InvalidParameter, "n_symbols must be >= 1");
    const auto model = detail::make_symbol_model(s);
    QuadratureRecords rec;
    rec.n_symbols = n_symbols;
    rec.rng_seed = seed;
    rec.users.resize(static_cast<std::size_t>(s.n_users));
    for (auto& u : rec.users) {
        u.x_a.resize(n_symbols);
        u.p_a.resize(n_symbols);
        u.x_b.resize(n_symbols);
        u.p_b.resize(n_symbols);
    }
    std::vector<double> a(2 * s.n_users), noise(2 * s.n_users), b(2 * s.n_users);
    for (std::uint64_t k = 0; k < n_symbols; ++k) {
        detail::draw_symbol(model, seed, k, a.data(), noise.data(), b.data());
        for (int j = 0; j < s.n_users; ++j) {
            auto& u = rec.users[static_cast<std::size_t>(j)];
            u.x_a[k] = a[2 * j];
            u.p_a[k] = a[2 * j + 1];
            u.x_b[k] = b[2 * j];
            u.p_b[k] = b[2 * j + 1];
        }
    }
    return rec;
}

/// Moments of a recorded run, summed block by block as in simulate_statistics.
inline SimulationStats statistics_of(const QuadratureRecords& rec) {
    SimulationStats st;
    st.n_symbols = rec.n_symbols;
    st.rng_seed = rec.rng_seed;
    st.users.resize(rec.users.size());
    for (std::size_t j = 0; j < rec.users.size(); ++j) {
        const auto& u = rec.users[j];
        if (u.x_a.size() != rec.n_symbols || u.p_a.size() != rec.n_symbols || u.x_b.size() != rec.n_symbols ||
            u.p_b.size() != rec.n_symbols)
            throw Error(ErrorKind::InvalidParameter, "record arrays must all have n_symbols entries");
        for (std::uint64_t begin = 0; begin < rec.n_symbols; begin += kStatsBlock) {
            const std::uint64_t end = std::min(begin + kStatsBlock, rec.n_symbols);
            UserMoments blk;
            for (std::uint64_t k = begin; k < end; ++k) {
                blk.sum_ab += u.x_a[k] * u.x_b[k];
                blk.sum_aa += u.x_a[k] * u.x_a[k];
                blk.sum_bb += u.x_b[k] * u.x_b[k];
                blk.sum_ab += u.p_a[k] * u.p_b[k];
                blk.sum_aa += u.p_a[k] * u.p_a[k];
                blk.sum_bb += u.p_b[k] * u.p_b[k];
            }
            st.users[j] += blk;
        }
    }
    return st;
}

/// Streams the simulation without storing symbols. `workers` threads split the
/// blocks; the result is bit-identical for any worker count.
inline SimulationStats simulate_statistics(const NetworkScenario& s, std::uint64_t n_symbols, std::uint64_t seed,
                                           unsigned workers = 1) {
    if (n_symbols < 1) throw Error(ErrorKind::InvalidParameter, "n_symbols must be >= 1");
    const auto model = detail::make_symbol_model(s);
    const std::uint64_t n_blocks = (n_symbols + kStatsBlock - 1) / kStatsBlock;
    std::vector<std::vector<UserMoments>> blocks(n_blocks);

    auto run = [&](std::uint64_t first, std::uint64_t stride) {
        for (std::uint64_t blk = first; blk < n_blocks; blk += stride)
            blocks[blk] = detail::block_moments(model, seed, blk * kStatsBlock,
                                                std::min((blk + 1) * kStatsBlock, n_symbols));
    };
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::min<std::uint64_t>(n_blocks, 256))));
    if (workers == 1) {
        run(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
        for (auto& t : pool) t.join();
    }

    SimulationStats st;
    st.n_symbols = n_symbols;
    st.rng_seed = seed;
    st.users.resize(static_cast<std::size_t>(s.n_users));
    // Per user, each block's partial sum is added in block order, matching statistics_of.
    for (const auto& blk : blocks)
        for (std::size_t j = 0; j < st.users.size(); ++j) st.users[j] += blk[j];
    return st;
}

/// Known-V_mod moment estimators of each user's channel.
inline std::vector<EstimatedChannel> estimate(const SimulationStats& st, const NetworkScenario& s) {
    s.validate();
    if (st.users.size() != static_cast<std::size_t>(s.n_users))
        throw Error(ErrorKind::InvalidParameter, "statistics cover " + std::to_string(st.users.size()) +
                                                     " users, scenario has " + std::to_string(s.n_users));
    if (static_cast<double>(st.n_symbols) < kMinEstimationSamples)
        throw Error(ErrorKind::BlockTooSmall, "estimation needs at least 1e3 symbols");

    const double m = st.samples();
    std::vector<EstimatedChannel> out;
    for (int j = 0; j < s.n_users; ++j) {
        const auto idx = static_cast<std::size_t>(j);
        const auto& ch = s.channels[idx];
        const double v_mod = s.mod_variance_snu[idx];
        if (!(v_mod > 0.0))
            throw Error(ErrorKind::InvalidParameter, "user " + std::to_string(j) + " is not modulated");
        const double t = st.users[idx].sum_ab / (m * v_mod);
        if (!(t > 0.0))
            throw Error(ErrorKind::ChannelInverted,
                        "user " + std::to_string(j) + ": estimated gain " + std::to_string(t) + " is not positive");
        const double var_b = st.users[idx].sum_bb / m;
        EstimatedChannel e;
        e.t_hat = 2.0 * t * t / ch.det_efficiency;
        e.eps_hat = (var_b - t * t * v_mod - (1.0 + ch.det_electronic_noise_snu)) / (t * t);
        e.n_pe = m;
        out.push_back(e);
    }
    return out;
}

inline std::vector<EstimatedChannel> estimate(const QuadratureRecords& rec, const NetworkScenario& s) {
    return estimate(statistics_of(rec), s);
}

/// Scenario with every user's channel replaced by its estimate. Crosstalk is
/// already folded into the estimates, so isolation becomes perfect.
inline NetworkScenario estimated_scenario(const NetworkScenario& s, const std::vector<EstimatedChannel>& est) {
    NetworkScenario out = s;
    out.isolation = IsolationModel::perfect();
    for (int j = 0; j < s.n_users; ++j) {
        const auto idx = static_cast<std::size_t>(j);
        out.channels[idx].transmittance_override = std::min(est[idx].t_hat, 1.0);
        out.channels[idx].excess_noise_snu = std::max(est[idx].eps_hat, 0.0);
    }
    return out;
}

struct EndToEndResult {
    SecurityResult analytic;
    SecurityResult estimated;
    std::vector<EstimatedChannel> channels;
    std::uint64_t n_symbols = 0;
    std::uint64_t seed = 0;

    double relative_gap() const {
        const double a = analytic.total_skr_bps;
        return a != 0.0 ? (estimated.total_skr_bps - a) / a : 0.0;
    }
};

inline EndToEndResult end_to_end_skr(const NetworkScenario& s, std::uint64_t n_symbols, std::uint64_t seed,
                                     unsigned workers = 1) {
    EndToEndResult r;
    r.n_symbols = n_symbols;
    r.seed = seed;
    r.analytic = network_skr(s);
    r.channels = estimate(simulate_statistics(s, n_symbols, seed, workers), s);
    r.estimated = network_skr(estimated_scenario(s, r.channels));
    return r;
}

}  // namespace cvqn
