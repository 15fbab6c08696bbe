#pragma once
/*
 * Entanglement-based description of an N-user polychromatic network.
 *
 * Mode layout of the network state
 *   A_1..A_N            Alice's retained EPR halves
 *   B_1..B_N            the halves received by each user after crosstalk and loss
 * and, after detector coupling,
 *   A_1..A_N, B2_1..B2_N, F_1..F_N, G_1..G_N
 *
 * Crosstalk is an amplitude-mixing map: user j receives sqrt(zeta[j][i] * T_j)
 * of source mode i. zeta is row-stochastic. The added noise is the vacuum a
 * passive interferometer with that transfer matrix lets in, plus T_j eps_j.
 */

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cvqn/errors.hpp"
#include "cvqn/gaussian.hpp"

namespace cvqn {

inline constexpr double kDefaultAttenuationDbPerKm = 0.2;

/// Fiber transmittance 10^(-alpha * L / 10).
inline double transmittance(double distance_km, double attenuation_db_per_km) {
    if (!(distance_km >= 0.0) || !(attenuation_db_per_km >= 0.0))
        throw Error(ErrorKind::InvalidParameter, "distance and attenuation must be non-negative");
    return std::pow(10.0, -attenuation_db_per_km * distance_km / 10.0);
}

/// Channel-added noise referred to the input: 1/T - 1 + eps.
inline double chi_line(double t, double eps) {
    if (!(t > 0.0) || t > 1.0) throw Error(ErrorKind::InvalidParameter, "transmittance must lie in (0, 1]");
    if (!(eps >= 0.0)) throw Error(ErrorKind::InvalidParameter, "excess noise must be non-negative");
    return 1.0 / t - 1.0 + eps;
}

/// Noise added by a heterodyne detector of efficiency eta and electronic noise v_el,
/// referred to the detector input.
inline double chi_heterodyne(double eta, double v_el) { return (1.0 + (1.0 - eta) + 2.0 * v_el) / eta; }

struct ChannelParams {
    double distance_km = 0.0;
    double attenuation_db_per_km = kDefaultAttenuationDbPerKm;
    double excess_noise_snu = 0.0;
    double det_efficiency = 1.0;
    double det_electronic_noise_snu = 0.0;
    // Replaces the fiber model, e.g. for channels characterised by parameter estimation.
    // The value is taken as the complete transmittance seen by the user.
    std::optional<double> transmittance_override;

    double fiber_transmittance() const {
        if (transmittance_override) return *transmittance_override;
        return cvqn::transmittance(distance_km, attenuation_db_per_km);
    }

    bool ideal_detector() const { return det_efficiency == 1.0; }

    /// Variance of the EPR pair that dilates the detector noise, 1 + 2 v_el / (1 - eta).
    double detector_noise_variance() const {
        if (ideal_detector()) return 1.0;
        return 1.0 + 2.0 * det_electronic_noise_snu / (1.0 - det_efficiency);
    }

    void validate() const {
        if (!(distance_km >= 0.0)) throw Error(ErrorKind::InvalidParameter, "distance_km must be >= 0");
        if (!(attenuation_db_per_km >= 0.0))
            throw Error(ErrorKind::InvalidParameter, "attenuation_db_per_km must be >= 0");
        if (!(excess_noise_snu >= 0.0)) throw Error(ErrorKind::InvalidParameter, "excess_noise_snu must be >= 0");
        if (!(det_efficiency > 0.0 && det_efficiency <= 1.0))
            throw Error(ErrorKind::InvalidParameter, "det_efficiency must lie in (0, 1]");
        if (!(det_electronic_noise_snu >= 0.0))
            throw Error(ErrorKind::InvalidParameter, "det_electronic_noise_snu must be >= 0");
        if (ideal_detector() && det_electronic_noise_snu > 0.0)
            throw Error(ErrorKind::InvalidParameter,
                        "electronic noise requires det_efficiency < 1 (the ideal detector is noiseless)");
        if (transmittance_override && !(*transmittance_override > 0.0 && *transmittance_override <= 1.0))
            throw Error(ErrorKind::InvalidParameter, "transmittance override must lie in (0, 1]");
    }
};

enum class IsolationKind { perfect, nearest_neighbor_decay };

struct IsolationModel {
    IsolationKind kind = IsolationKind::perfect;
    double isolation_db = -50.0;

    static IsolationModel perfect() { return {}; }
    static IsolationModel decay(double db) { return {IsolationKind::nearest_neighbor_decay, db}; }
};

enum class Scheme { frequency, temporal, splitter };
enum class Regime { asymptotic, finite_size, composable, composable_finite_size };

constexpr std::string_view to_string(IsolationKind k) {
    return k == IsolationKind::perfect ? "perfect" : "nearest_neighbor_decay";
}
constexpr std::string_view to_string(Scheme s) {
    switch (s) {
        case Scheme::frequency: return "frequency";
        case Scheme::temporal: return "temporal";
        case Scheme::splitter: return "splitter";
    }
    return "?";
}
constexpr std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::asymptotic: return "asymptotic";
        case Regime::finite_size: return "finite_size";
        case Regime::composable: return "composable";
        case Regime::composable_finite_size: return "composable_finite_size";
    }
    return "?";
}

inline constexpr double kMinFiniteBlock = 1e4;

struct RegimeParams {
    Regime regime = Regime::asymptotic;
    double n_block = 1e10;  // symbols per user
    double eps_pe = 1e-10;
    double eps_smooth = 1e-10;
    double eps_pa = 1e-10;
    double eps_cor = 1e-10;
    double pe_fraction = 0.5;

    double n_key() const { return (1.0 - pe_fraction) * n_block; }
    double n_pe() const { return pe_fraction * n_block; }

    void validate() const {
        auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
        if (!in_unit(eps_pe) || !in_unit(eps_smooth) || !in_unit(eps_pa) || !in_unit(eps_cor))
            throw Error(ErrorKind::InvalidParameter, "security parameters eps_* must lie in (0, 1)");
        if (!in_unit(pe_fraction)) throw Error(ErrorKind::InvalidParameter, "pe_fraction must lie in (0, 1)");
        if (!(n_block > 0.0)) throw Error(ErrorKind::InvalidParameter, "n_block must be positive");
        if (regime != Regime::asymptotic && n_block < kMinFiniteBlock)
            throw Error(ErrorKind::BlockTooSmall,
                        "n_block = " + std::to_string(n_block) + " is below the 1e4 minimum for finite regimes");
    }
};

struct NetworkScenario {
    int n_users = 1;
    std::vector<double> mod_variance_snu;
    std::vector<ChannelParams> channels;
    IsolationModel isolation;
    std::vector<double> beta;
    double rep_rate_hz = 1e9;
    double keep_fraction = 1.0;
    Scheme scheme = Scheme::frequency;
    RegimeParams regime;
    // Replaces the per-scheme multiplexing divisor N_t when set.
    std::optional<double> multiplex_divisor_override;

    /// Every user shares the same parameters.
    static NetworkScenario uniform(int n_users, double mod_variance, const ChannelParams& channel, double beta,
                                   double rep_rate_hz = 1e9, double keep_fraction = 1.0) {
        NetworkScenario s;
        s.n_users = n_users;
        s.mod_variance_snu.assign(static_cast<std::size_t>(std::max(n_users, 0)), mod_variance);
        s.channels.assign(static_cast<std::size_t>(std::max(n_users, 0)), channel);
        s.beta.assign(static_cast<std::size_t>(std::max(n_users, 0)), beta);
        s.rep_rate_hz = rep_rate_hz;
        s.keep_fraction = keep_fraction;
        return s;
    }

    double alice_variance(int i) const { return mod_variance_snu[static_cast<std::size_t>(i)] + 1.0; }

    /// Transmittance seen by user j, including the 1/N split of a power-splitter network.
    double effective_transmittance(int j) const {
        const auto& ch = channels[static_cast<std::size_t>(j)];
        if (ch.transmittance_override) return *ch.transmittance_override;
        const double t = ch.fiber_transmittance();
        return scheme == Scheme::splitter ? t / n_users : t;
    }

    double chi_line_of(int j) const {
        return chi_line(effective_transmittance(j), channels[static_cast<std::size_t>(j)].excess_noise_snu);
    }

    void validate() const {
        if (n_users < 1) throw Error(ErrorKind::InvalidParameter, "n_users must be >= 1");
        const auto n = static_cast<std::size_t>(n_users);
        if (mod_variance_snu.size() != n || channels.size() != n || beta.size() != n)
            throw Error(ErrorKind::InvalidParameter, "per-user lists must all have length n_users = " +
                                                         std::to_string(n_users));
        for (std::size_t i = 0; i < n; ++i) {
            if (!(mod_variance_snu[i] >= 0.0))
                throw Error(ErrorKind::InvalidParameter, "mod_variance_snu[" + std::to_string(i) + "] must be >= 0");
            if (!(beta[i] > 0.0 && beta[i] <= 1.0))
                throw Error(ErrorKind::InvalidParameter, "beta[" + std::to_string(i) + "] must lie in (0, 1]");
            channels[i].validate();
        }
        if (isolation.kind == IsolationKind::nearest_neighbor_decay && !(isolation.isolation_db <= 0.0))
            throw Error(ErrorKind::InvalidParameter, "isolation_db must be <= 0");
        if (!(rep_rate_hz > 0.0)) throw Error(ErrorKind::InvalidParameter, "rep_rate_hz must be > 0");
        if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
            throw Error(ErrorKind::InvalidParameter, "keep_fraction must lie in (0, 1]");
        if (multiplex_divisor_override && !(*multiplex_divisor_override > 0.0))
            throw Error(ErrorKind::InvalidParameter, "multiplexing divisor must be > 0");
        regime.validate();
    }
};

/// Copy of `base` with `n` users, every user taking the parameters of user 0.
inline NetworkScenario resized(const NetworkScenario& base, int n) {
    if (n < 1) throw Error(ErrorKind::InvalidParameter, "n_users must be >= 1");
    NetworkScenario s = base;
    s.n_users = n;
    s.mod_variance_snu.assign(static_cast<std::size_t>(n), base.mod_variance_snu.at(0));
    s.channels.assign(static_cast<std::size_t>(n), base.channels.at(0));
    s.beta.assign(static_cast<std::size_t>(n), base.beta.at(0));
    return s;
}

/// Crosstalk weights: zeta(j, i) is the energy fraction user j receives from source mode i.
inline Matrix build_zeta(int n, const IsolationModel& isolation) {
    if (n < 1) throw Error(ErrorKind::InvalidParameter, "N must be >= 1");
    if (isolation.kind == IsolationKind::perfect) return Matrix::Identity(n, n);
    if (!(isolation.isolation_db <= 0.0))
        throw Error(ErrorKind::InvalidParameter, "isolation_db must be <= 0 (got " +
                                                     std::to_string(isolation.isolation_db) + ")");
    Matrix zeta(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) zeta(j, i) = std::pow(10.0, isolation.isolation_db * std::abs(i - j) / 10.0);
        zeta.row(j) /= zeta.row(j).sum();
    }
    return zeta;
}

/// Amplitude-mixing matrix M(j, i) = sqrt(zeta(j, i) * T_j).
inline Matrix mixing_matrix(const NetworkScenario& s) {
    const Matrix zeta = build_zeta(s.n_users, s.isolation);
    Matrix m(s.n_users, s.n_users);
    for (int j = 0; j < s.n_users; ++j) {
        const double t = s.effective_transmittance(j);
        for (int i = 0; i < s.n_users; ++i) m(j, i) = std::sqrt(zeta(j, i) * t);
    }
    return m;
}

/// Per-quadrature noise added by the network, I - M M^T + diag(T_j eps_j).
///
/// This is the vacuum admitted by a passive interferometer with transfer
/// matrix M plus the excess noise. Its diagonal is T_j chi_line_j, and it keeps
/// the vacuum parts of different users uncorrelated.
inline Matrix channel_noise(const NetworkScenario& s, const Matrix& m) {
    Matrix y = Matrix::Identity(s.n_users, s.n_users) - m * m.transpose();
    for (int j = 0; j < s.n_users; ++j) {
        const double t = s.effective_transmittance(j);
        y(j, j) = t * s.chi_line_of(j);
    }
    return 0.5 * (y + y.transpose());
}

namespace detail {

inline std::string describe_channel(const NetworkScenario& s) {
    std::ostringstream os;
    os << "isolation " << to_string(s.isolation.kind);
    if (s.isolation.kind != IsolationKind::perfect) os << " " << s.isolation.isolation_db << " dB";
    os << "; T = [";
    for (int j = 0; j < s.n_users; ++j) os << (j ? ", " : "") << s.effective_transmittance(j);
    os << "]; eps = [";
    for (int j = 0; j < s.n_users; ++j) os << (j ? ", " : "") << s.channels[static_cast<std::size_t>(j)].excess_noise_snu;
    os << "]";
    return os.str();
}

// Embeds a per-quadrature N x N matrix into 2N x 2N with the identity on each quadrature.
inline Matrix kron_identity2(const Matrix& m) {
    Matrix out = Matrix::Zero(2 * m.rows(), 2 * m.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            out(2 * r, 2 * c) = m(r, c);
            out(2 * r + 1, 2 * c + 1) = m(r, c);
        }
    return out;
}

}  // namespace detail

/// Covariance of A_1..A_N, B_1..B_N.
///
/// N EPR pairs of variance V_i are prepared and the B halves are sent through
/// the mixing map M with added noise channel_noise(). Blocks:
///   A_i        V_i I
///   A_i, B_j   sqrt(zeta_ji T_j (V_i^2 - 1)) Z
///   B_j        T_j (sum_u zeta_ju V_u + chi_line_j) I
///   B_j, B_k   sum_i M_ji M_ki (V_i - 1) I
/// Strong crosstalk at low loss makes M expand some input and the state unphysical.
inline GaussianState build_eb_covariance(const NetworkScenario& s) {
    s.validate();
    const int n = s.n_users;
    Matrix cov = Matrix::Zero(4 * n, 4 * n);
    for (int i = 0; i < n; ++i) {
        const double v = s.alice_variance(i);
        const double c = std::sqrt(v * v - 1.0);
        cov.block<2, 2>(2 * i, 2 * i) = v * Eigen::Matrix2d::Identity();
        cov.block<2, 2>(2 * (n + i), 2 * (n + i)) = v * Eigen::Matrix2d::Identity();
        cov.block<2, 2>(2 * i, 2 * (n + i)) = c * pauli_z();
        cov.block<2, 2>(2 * (n + i), 2 * i) = c * pauli_z();
    }
    // The input is a product of EPR pairs, physical by construction.
    const GaussianState source(Vector::Zero(4 * n), cov);

    const Matrix m = mixing_matrix(s);
    Matrix map = Matrix::Identity(4 * n, 4 * n);
    map.bottomRightCorner(2 * n, 2 * n) = detail::kron_identity2(m);
    Matrix noise = Matrix::Zero(4 * n, 4 * n);
    noise.bottomRightCorner(2 * n, 2 * n) = detail::kron_identity2(channel_noise(s, m));
    try {
        return apply_gaussian_map(source, map, noise, Vector::Zero(4 * n));
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::UnphysicalChannel) throw;
        throw Error(ErrorKind::UnphysicalChannel,
                    "network state is unphysical for " + detail::describe_channel(s) + " (" + e.what() + ")");
    }
}

/// Couples each B_j to a heterodyne detector of efficiency eta_j.
///
/// The detector is a beam splitter of transmittance eta_j mixing B_j with one
/// arm F0_j of an EPR pair (F0_j, G_j) of variance v_d = 1 + 2 v_el / (1 - eta_j):
///   B2_j = sqrt(eta) B_j + sqrt(1 - eta) F0_j,  F_j = -sqrt(1 - eta) B_j + sqrt(eta) F0_j.
/// An ideal detector (eta = 1) leaves B_j untouched and (F_j, G_j) as vacuum.
/// Output order: A_1..A_N, B2_1..B2_N, F_1..F_N, G_1..G_N.
inline GaussianState apply_detection(const GaussianState& state, std::span<const ChannelParams> channels) {
    const int n = static_cast<int>(channels.size());
    if (n < 1 || state.n_modes() != 2 * n)
        throw Error(ErrorKind::IndexError, "detection expects a 2N-mode state for N = " + std::to_string(n) +
                                               " channels (got " + std::to_string(state.n_modes()) + " modes)");
    for (const auto& ch : channels) {
        if (!(ch.det_efficiency > 0.0 && ch.det_efficiency <= 1.0))
            throw Error(ErrorKind::InvalidParameter, "det_efficiency must lie in (0, 1]");
        ch.validate();
    }

    const int total = 4 * n;
    Matrix cov = Matrix::Zero(2 * total, 2 * total);
    cov.topLeftCorner(4 * n, 4 * n) = state.cov();
    for (int j = 0; j < n; ++j) {
        const double vd = channels[static_cast<std::size_t>(j)].detector_noise_variance();
        const double c = std::sqrt(vd * vd - 1.0);
        const int f = 2 * n + j, g = 3 * n + j;
        cov.block<2, 2>(2 * f, 2 * f) = vd * Eigen::Matrix2d::Identity();
        cov.block<2, 2>(2 * g, 2 * g) = vd * Eigen::Matrix2d::Identity();
        cov.block<2, 2>(2 * f, 2 * g) = c * pauli_z();
        cov.block<2, 2>(2 * g, 2 * f) = c * pauli_z();
    }
    Vector mean = Vector::Zero(2 * total);
    mean.head(4 * n) = state.mean();
    const GaussianState joint(mean, cov);

    Matrix s = Matrix::Identity(2 * total, 2 * total);
    for (int j = 0; j < n; ++j) {
        const double eta = channels[static_cast<std::size_t>(j)].det_efficiency;
        const double a = std::sqrt(eta), b = std::sqrt(1.0 - eta);
        const int bm = n + j, f = 2 * n + j;
        for (int q = 0; q < 2; ++q) {
            s(2 * bm + q, 2 * bm + q) = a;
            s(2 * bm + q, 2 * f + q) = b;
            s(2 * f + q, 2 * bm + q) = -b;
            s(2 * f + q, 2 * f + q) = a;
        }
    }
    return apply_gaussian_map(joint, s, Matrix::Zero(2 * total, 2 * total), Vector::Zero(2 * total));
}

}  // namespace cvqn
