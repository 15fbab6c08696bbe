#pragma once
/*
 * Network secret key rate.
 *
 *   K = (F_m k_n / N_t) (sum_i beta_i I_AB^i - chi_BE - Delta)
 *
 * chi_BE is the network Holevo bound S(AB) - S(AFG | B2), evaluated on the full
 * entanglement-based state so that crosstalk between users is accounted for.
 * Delta collects finite-size and composable deductions.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "cvqn/errors.hpp"
#include "cvqn/gaussian.hpp"
#include "cvqn/network.hpp"

namespace cvqn {

// ---------------------------------------------------------------------------
// Mutual information

/// Per-user link as seen by the legitimate parties: crosstalk from other users
/// is folded into the excess noise, and only the diagonal coupling counts as signal.
struct EffectiveLink {
    double transmittance;  // zeta_jj * T_j
    double excess_noise;   // (eps_j + sum_{u != j} zeta_ju V_mod,u) / zeta_jj
};

inline EffectiveLink effective_link(const NetworkScenario& s, int j) {
    const Matrix zeta = build_zeta(s.n_users, s.isolation);
    const double own = zeta(j, j);
    double leak = 0.0;
    for (int u = 0; u < s.n_users; ++u)
        if (u != j) leak += zeta(j, u) * s.mod_variance_snu[static_cast<std::size_t>(u)];
    return {own * s.effective_transmittance(j),
            (s.channels[static_cast<std::size_t>(j)].excess_noise_snu + leak) / own};
}

/// Shannon information of a Gaussian-modulated heterodyne link, bits per symbol.
inline double heterodyne_mutual_information(double v, double t, double eps, double eta, double v_el) {
    const double chi_tot = chi_line(t, eps) + chi_heterodyne(eta, v_el) / t;
    return std::log2((v + chi_tot) / (1.0 + chi_tot));
}

inline std::vector<double> mutual_information_vector(const NetworkScenario& s) {
    s.validate();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(s.n_users));
    for (int j = 0; j < s.n_users; ++j) {
        const auto link = effective_link(s, j);
        const auto& ch = s.channels[static_cast<std::size_t>(j)];
        out.push_back(heterodyne_mutual_information(s.alice_variance(j), link.transmittance, link.excess_noise,
                                                    ch.det_efficiency, ch.det_electronic_noise_snu));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Holevo bound

struct HolevoBreakdown {
    double entropy_ab = 0.0;           // S(A B1), 2N symplectic eigenvalues
    double entropy_conditional = 0.0;  // S(A F G | B2), 3N symplectic eigenvalues
    double chi = 0.0;
};

inline HolevoBreakdown holevo_breakdown(const NetworkScenario& s) {
    const GaussianState ab = build_eb_covariance(s);
    const GaussianState abfg = apply_detection(ab, s.channels);
    std::vector<int> measured(static_cast<std::size_t>(s.n_users));
    std::iota(measured.begin(), measured.end(), s.n_users);
    const GaussianState afg = condition_on_heterodyne(abfg, measured);

    HolevoBreakdown out;
    out.entropy_ab = von_neumann_entropy(ab);
    out.entropy_conditional = von_neumann_entropy(afg);
    out.chi = out.entropy_ab - out.entropy_conditional;
    return out;
}

/// Holevo information available to the eavesdropper on the whole network, bits per symbol.
inline double holevo_n(const NetworkScenario& s) { return holevo_breakdown(s).chi; }

/// Sum over users of the single-link bound on each effective link, leakage counted as noise.
/// Coincides with holevo_n under perfect isolation.
inline double holevo_links(const NetworkScenario& s) {
    double sum = 0.0;
    for (int j = 0; j < s.n_users; ++j) {
        const auto link = effective_link(s, j);
        NetworkScenario one = s;
        const auto idx = static_cast<std::size_t>(j);
        one.n_users = 1;
        one.mod_variance_snu = {s.mod_variance_snu[idx]};
        one.beta = {s.beta[idx]};
        one.channels = {s.channels[idx]};
        one.channels[0].transmittance_override = link.transmittance;
        one.channels[0].excess_noise_snu = link.excess_noise;
        one.isolation = IsolationModel::perfect();
        sum += holevo_n(one);
    }
    return sum;
}

/// One user of `s` as a standalone single-link network with the same effective channel.
inline NetworkScenario single_user_view(const NetworkScenario& s, int j) {
    NetworkScenario one = s;
    const auto idx = static_cast<std::size_t>(j);
    one.n_users = 1;
    one.mod_variance_snu = {s.mod_variance_snu[idx]};
    one.beta = {s.beta[idx]};
    one.channels = {s.channels[idx]};
    one.channels[0].transmittance_override = s.effective_transmittance(j);
    one.isolation = IsolationModel::perfect();
    return one;
}

// ---------------------------------------------------------------------------
// Finite-size and composable deductions

/// All constants of the Delta deductions live here.
///   finite size:  a * sqrt(log2(c_fs / eps_smooth) / n_key) + b / n_key * log2(1 / eps_pa)
///   composable:   a * sqrt(log2(c_comp / eps_smooth) / n_key) + b / n_key * log2(1 / eps_pa)
///                 + d / n_key * log2(2 / eps_cor)
struct DeltaConstants {
    double aep = 7.0;
    double pa = 2.0;
    double smooth_numerator_finite = 2.0;
    double smooth_numerator_composable = 8.0;
    double correctness = 1.0;
};

inline constexpr DeltaConstants kDeltaConstants{};

struct DeltaCorrection {
    double delta = 0.0;            // bits per symbol and user
    double key_fraction = 1.0;     // share of the block left for the key
    bool worst_case = false;       // channel parameters must be pessimistically shifted
};

inline DeltaCorrection delta_correction(const RegimeParams& p, const DeltaConstants& k = kDeltaConstants) {
    p.validate();
    if (p.regime == Regime::asymptotic) return {};

    const double n_key = p.n_key();
    if (n_key < 1.0) throw Error(ErrorKind::BlockTooSmall, "no symbols left for the key");
    const double pa_term = k.pa / n_key * std::log2(1.0 / p.eps_pa);
    DeltaCorrection out;
    out.key_fraction = 1.0 - p.pe_fraction;
    switch (p.regime) {
        case Regime::finite_size:
            out.delta = k.aep * std::sqrt(std::log2(k.smooth_numerator_finite / p.eps_smooth) / n_key) + pa_term;
            out.worst_case = true;
            break;
        case Regime::composable:
        case Regime::composable_finite_size:
            out.delta = k.aep * std::sqrt(std::log2(k.smooth_numerator_composable / p.eps_smooth) / n_key) +
                        pa_term + k.correctness / n_key * std::log2(2.0 / p.eps_cor);
            out.worst_case = p.regime == Regime::composable_finite_size;
            break;
        case Regime::asymptotic:
            break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Parameter-estimation confidence intervals

inline constexpr double kMinEstimationSamples = 1e3;

struct WorstCaseEstimate {
    double transmittance;
    double excess_noise;
    bool clamped = false;  // shifted values left the physical range
};

/// Pessimistic channel parameters at confidence 1 - eps_pe.
///
/// Model per heterodyne quadrature: y = t x + z with t = sqrt(eta T / 2),
/// Var(x) = v_mod and Var(z) = sigma^2 = eta T eps / 2 + 1 + v_el. Both
/// quadratures are pooled (m = 2 n_pe). The known-variance moment estimator
/// t = <x y> / v_mod and the noise estimate have
///   sd(t) = sqrt((sigma^2 + 2 t^2 v_mod) / (m v_mod)),  sd(sigma^2) = sigma^2 sqrt(2 / m),
/// and are shifted by z = sqrt(2) erfc^-1(2 eps_pe) standard deviations.
inline WorstCaseEstimate worst_case_params(double t_hat, double eps_hat, double n_pe, double eps_pe, double v_mod,
                                           double eta = 1.0, double v_el = 0.0) {
    if (n_pe < kMinEstimationSamples)
        throw Error(ErrorKind::BlockTooSmall, "parameter estimation needs at least 1e3 samples");
    if (!(eps_pe > 0.0 && eps_pe < 1.0)) throw Error(ErrorKind::InvalidParameter, "eps_pe must lie in (0, 1)");
    if (!(t_hat > 0.0 && t_hat <= 1.0)) throw Error(ErrorKind::InvalidParameter, "t_hat must lie in (0, 1]");
    if (!(eta > 0.0 && eta <= 1.0)) throw Error(ErrorKind::InvalidParameter, "eta must lie in (0, 1]");
    if (v_mod <= 0.0) return {t_hat, std::max(eps_hat, 0.0), false};

    const double z = std::sqrt(2.0) * boost::math::erfc_inv(2.0 * std::min(eps_pe, 0.5));
    const double m = 2.0 * n_pe;
    const double gain = std::sqrt(eta * t_hat / 2.0);
    const double sigma2 = eta * t_hat * eps_hat / 2.0 + 1.0 + v_el;

    WorstCaseEstimate out{};
    const double gain_low = gain - z * std::sqrt((sigma2 + 2.0 * gain * gain * v_mod) / (m * v_mod));
    const double sigma2_high = sigma2 + z * sigma2 * std::sqrt(2.0 / m);
    if (gain_low <= 0.0) {
        out.transmittance = std::numeric_limits<double>::min();
        out.clamped = true;
    } else {
        out.transmittance = 2.0 * gain_low * gain_low / eta;
    }
    out.excess_noise = 2.0 * (sigma2_high - 1.0 - v_el) / (eta * out.transmittance);
    if (out.excess_noise < 0.0) {
        out.excess_noise = 0.0;
        out.clamped = true;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Network key rate

/// N_t: frequency multiplexing shares nothing; time multiplexing divides the
/// repetition rate among N users; the splitter's 1/N enters through T instead.
inline double multiplex_divisor(const NetworkScenario& s) {
    if (s.multiplex_divisor_override) return *s.multiplex_divisor_override;
    return s.scheme == Scheme::temporal ? static_cast<double>(s.n_users) : 1.0;
}

struct SecurityResult {
    std::vector<double> per_user_mi;       // bits/symbol
    double chi_be_total = 0.0;             // bits/symbol, whole network
    double chi_be_links = 0.0;             // sum of single-link bounds on the effective links
    std::vector<double> chi_be_per_user;   // only for perfect isolation
    double delta = 0.0;                    // bits/symbol per user
    std::vector<double> per_user_key;      // bits/symbol, clamped at 0
    std::vector<bool> clamped;
    bool per_user_authoritative = true;    // false when crosstalk couples the users
    double raw_bits_per_symbol = 0.0;      // sum beta I - chi - N Delta, before clamping
    double total_bits_per_symbol = 0.0;    // after clamping
    double regime_key_fraction = 1.0;      // share of the block left for the key
    double key_fraction = 1.0;             // k_n times the regime's key share
    double multiplex_divisor = 1.0;
    double total_skr_bps = 0.0;
    bool worst_case_applied = false;
    bool estimate_clamped = false;
    std::vector<ChannelParams> evaluated_channels;  // after any worst-case shift

    /// Key per channel use, i.e. the rate with F_m k_n divided out.
    double normalized_key() const { return total_bits_per_symbol * regime_key_fraction / multiplex_divisor; }
    int clamped_count() const { return static_cast<int>(std::count(clamped.begin(), clamped.end(), true)); }
};

/// Replaces every channel by its worst-case estimate at the regime's PE block size.
inline NetworkScenario with_worst_case_channels(const NetworkScenario& s, bool* any_clamped = nullptr) {
    NetworkScenario out = s;
    bool clamped = false;
    for (int j = 0; j < s.n_users; ++j) {
        const auto idx = static_cast<std::size_t>(j);
        const auto& ch = s.channels[idx];
        const auto wc = worst_case_params(s.effective_transmittance(j), ch.excess_noise_snu, s.regime.n_pe(),
                                          s.regime.eps_pe, s.mod_variance_snu[idx], ch.det_efficiency,
                                          ch.det_electronic_noise_snu);
        out.channels[idx].transmittance_override = wc.transmittance;
        out.channels[idx].excess_noise_snu = wc.excess_noise;
        clamped = clamped || wc.clamped;
    }
    if (any_clamped) *any_clamped = clamped;
    return out;
}

inline SecurityResult network_skr(const NetworkScenario& scenario) {
    scenario.validate();
    const DeltaCorrection dc = delta_correction(scenario.regime);

    SecurityResult r;
    NetworkScenario s = scenario;
    if (dc.worst_case) {
        s = with_worst_case_channels(scenario, &r.estimate_clamped);
        r.worst_case_applied = true;
    }
    r.evaluated_channels = s.channels;

    const int n = s.n_users;
    r.per_user_mi = mutual_information_vector(s);
    r.chi_be_total = holevo_n(s);
    r.delta = dc.delta;
    r.regime_key_fraction = dc.key_fraction;
    r.key_fraction = s.keep_fraction * dc.key_fraction;
    r.multiplex_divisor = multiplex_divisor(s);
    r.per_user_authoritative = s.isolation.kind == IsolationKind::perfect || n == 1;
    r.chi_be_links = r.per_user_authoritative ? 0.0 : holevo_links(s);

    double signal = 0.0;
    for (int i = 0; i < n; ++i) signal += s.beta[static_cast<std::size_t>(i)] * r.per_user_mi[static_cast<std::size_t>(i)];
    r.raw_bits_per_symbol = signal - r.chi_be_total - n * dc.delta;

    r.per_user_key.assign(static_cast<std::size_t>(n), 0.0);
    r.clamped.assign(static_cast<std::size_t>(n), false);
    if (r.per_user_authoritative) {
        for (int i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            const double chi_i = n == 1 ? r.chi_be_total : holevo_n(single_user_view(s, i));
            r.chi_be_per_user.push_back(chi_i);
            r.chi_be_links += chi_i;
            const double key = s.beta[idx] * r.per_user_mi[idx] - chi_i - dc.delta;
            r.clamped[idx] = key < 0.0;
            r.per_user_key[idx] = std::max(key, 0.0);
            r.total_bits_per_symbol += r.per_user_key[idx];
        }
    } else {
        // Crosstalk makes the Holevo term a joint quantity; per-user shares are
        // proportional to each user's reconciled information.
        const double total = std::max(r.raw_bits_per_symbol, 0.0);
        r.total_bits_per_symbol = total;
        for (int i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            const double share = signal > 0.0 ? s.beta[idx] * r.per_user_mi[idx] / signal : 0.0;
            r.per_user_key[idx] = total * share;
            r.clamped[idx] = r.raw_bits_per_symbol < 0.0;
        }
    }
    r.total_skr_bps = s.rep_rate_hz * r.key_fraction / r.multiplex_divisor * r.total_bits_per_symbol;
    return r;
}

}  // namespace cvqn
