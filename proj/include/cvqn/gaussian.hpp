#pragma once
/*
 * Gaussian-state algebra in shot-noise units.
 *
 * Conventions
 *   - vacuum quadrature variance is 1
 *   - quadratures are interleaved: (x1, p1, x2, p2, ...)
 *   - the symplectic form is block-diagonal with [[0, 1], [-1, 0]] per mode
 *
 * A Gaussian state is carried as (mean, cov). Physical states satisfy
 * cov + i*Omega >= 0, equivalently every symplectic eigenvalue is >= 1.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cvqn/errors.hpp"

namespace cvqn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kPhysicalityTolerance = 1e-9;
inline constexpr double kPairMismatchWarning = 1e-8;

namespace detail {

inline bool is_symmetric(const Matrix& m) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= kSymmetryTolerance * scale;
}

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace detail

/// Omega for n modes, interleaved ordering.
inline Matrix symplectic_form(int n_modes) {
    Matrix omega = Matrix::Zero(2 * n_modes, 2 * n_modes);
    for (int k = 0; k < n_modes; ++k) {
        omega(2 * k, 2 * k + 1) = 1.0;
        omega(2 * k + 1, 2 * k) = -1.0;
    }
    return omega;
}

/// Pauli-Z in quadrature space, diag(1, -1).
inline Eigen::Matrix2d pauli_z() { return Eigen::Vector2d(1.0, -1.0).asDiagonal(); }

struct SymplecticSpectrum {
    std::vector<double> values;  // descending
    double pair_mismatch = 0.0;  // largest | |lambda_+| - |lambda_-| | seen while pairing
};

/// Symplectic spectrum of a symmetric positive-definite matrix.
///
/// The spectrum of i*Omega*cov is {+-lambda_k}. It is evaluated through the
/// similar Hermitian matrix i*cov^(1/2)*Omega*cov^(1/2), whose eigenvalues are
/// real and come out of a self-adjoint solver in +- pairs.
inline SymplecticSpectrum symplectic_spectrum(const Matrix& cov) {
    if (cov.rows() != cov.cols() || cov.rows() % 2 != 0 || cov.rows() == 0)
        throw Error(ErrorKind::InvalidCovariance,
                    "covariance must be square with even, non-zero dimension (got " +
                        std::to_string(cov.rows()) + "x" + std::to_string(cov.cols()) + ")");
    if (!detail::is_symmetric(cov))
        throw Error(ErrorKind::InvalidCovariance, "covariance is not symmetric");

    const Matrix sym = detail::symmetrized(cov);
    Eigen::SelfAdjointEigenSolver<Matrix> root_solver(sym);
    if (root_solver.info() != Eigen::Success)
        throw Error(ErrorKind::InvalidCovariance, "eigen-decomposition failed");
    const Vector d = root_solver.eigenvalues();
    if (d.minCoeff() <= 0.0)
        throw Error(ErrorKind::InvalidCovariance, "covariance is not positive definite");

    const Matrix& u = root_solver.eigenvectors();
    const Matrix root = u * d.cwiseSqrt().asDiagonal() * u.transpose();
    const int dim = static_cast<int>(cov.rows());
    const Matrix k = root * symplectic_form(dim / 2) * root;

    const Eigen::MatrixXcd h = std::complex<double>(0.0, 1.0) * k.cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::InvalidCovariance, "symplectic eigen-decomposition failed");
    const Vector ev = solver.eigenvalues();  // ascending

    SymplecticSpectrum out;
    const int n = dim / 2;
    out.values.reserve(n);
    for (int j = 0; j < n; ++j) {
        const double pos = ev(dim - 1 - j);
        const double neg = -ev(j);
        out.pair_mismatch = std::max(out.pair_mismatch, std::abs(pos - neg));
        out.values.push_back(0.5 * (pos + neg));
    }
    return out;
}

inline std::vector<double> symplectic_eigenvalues(const Matrix& cov) {
    return symplectic_spectrum(cov).values;
}

/// Smallest symplectic eigenvalue; the state is physical when this is >= 1 - 1e-9.
/// Returns -inf for matrices that are not positive definite.
inline double physicality_margin(const Matrix& cov) {
    Eigen::LLT<Matrix> llt(detail::symmetrized(cov));
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    try {
        return symplectic_spectrum(cov).values.back();
    } catch (const Error&) {
        return -std::numeric_limits<double>::infinity();
    }
}

class GaussianState {
public:
    /// Validates shape, symmetry and the uncertainty relation.
    GaussianState(Vector mean, Matrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
        validate_shape();
        if (!detail::is_symmetric(cov_))
            throw Error(ErrorKind::InvalidCovariance, "covariance is not symmetric");
        cov_ = detail::symmetrized(cov_);
        const double margin = physicality_margin(cov_);
        if (margin < 1.0 - kPhysicalityTolerance)
            throw Error(ErrorKind::InvalidCovariance,
                        "uncertainty relation violated (smallest symplectic eigenvalue " +
                            std::to_string(margin) + ")");
    }

    explicit GaussianState(const Matrix& cov) : GaussianState(Vector::Zero(cov.rows()), cov) {}

    static GaussianState vacuum(int n_modes) {
        return GaussianState(Matrix::Identity(2 * n_modes, 2 * n_modes));
    }

    /// Thermal state with the given per-mode variances.
    static GaussianState thermal(std::span<const double> variances) {
        const auto n = static_cast<Eigen::Index>(variances.size());
        Matrix cov = Matrix::Zero(2 * n, 2 * n);
        for (Eigen::Index k = 0; k < n; ++k) cov(2 * k, 2 * k) = cov(2 * k + 1, 2 * k + 1) = variances[k];
        return GaussianState(std::move(cov));
    }

    int n_modes() const { return static_cast<int>(cov_.rows() / 2); }
    const Vector& mean() const { return mean_; }
    const Matrix& cov() const { return cov_; }

    /// 2x2 covariance block between modes a and b.
    Eigen::Matrix2d block(int a, int b) const { return cov_.block<2, 2>(2 * a, 2 * b); }

private:
    struct Unchecked {};
    GaussianState(Vector mean, Matrix cov, Unchecked) : mean_(std::move(mean)), cov_(std::move(cov)) {
        validate_shape();
    }

    void validate_shape() const {
        if (cov_.rows() == 0 || cov_.rows() != cov_.cols() || cov_.rows() % 2 != 0)
            throw Error(ErrorKind::InvalidCovariance, "covariance must be 2M x 2M with M >= 1");
        if (mean_.size() != cov_.rows())
            throw Error(ErrorKind::InvalidCovariance, "mean length does not match covariance");
    }

    friend GaussianState apply_gaussian_map(const GaussianState&, const Matrix&, const Matrix&,
                                            const Vector&);

    Vector mean_;
    Matrix cov_;
};

/// Two-mode squeezed vacuum of variance v: [[v I, sqrt(v^2-1) Z], [sqrt(v^2-1) Z, v I]].
inline GaussianState epr_state(double v) {
    if (!(v >= 1.0))
        throw Error(ErrorKind::InvalidVariance, "EPR variance must be >= 1 (got " + std::to_string(v) + ")");
    Matrix cov = Matrix::Zero(4, 4);
    const double c = std::sqrt(v * v - 1.0);
    cov.block<2, 2>(0, 0) = v * Eigen::Matrix2d::Identity();
    cov.block<2, 2>(2, 2) = v * Eigen::Matrix2d::Identity();
    cov.block<2, 2>(0, 2) = c * pauli_z();
    cov.block<2, 2>(2, 0) = c * pauli_z();
    return GaussianState(std::move(cov));
}

/// Bosonic entropy of a single mode with symplectic eigenvalue lambda, in bits.
inline double g_entropy(double lambda) {
    if (!(lambda >= 1.0 - kPhysicalityTolerance))
        throw Error(ErrorKind::UnphysicalEigenvalue,
                    "symplectic eigenvalue " + std::to_string(lambda) + " below 1");
    if (lambda <= 1.0) return 0.0;
    const double plus = 0.5 * (lambda + 1.0);
    const double minus = 0.5 * (lambda - 1.0);
    return plus * std::log2(plus) - minus * std::log2(minus);
}

inline double entropy_of_spectrum(std::span<const double> spectrum) {
    double s = 0.0;
    for (double lambda : spectrum) s += g_entropy(lambda);
    return s;
}

inline double von_neumann_entropy(const GaussianState& state) {
    const auto spectrum = symplectic_eigenvalues(state.cov());
    return entropy_of_spectrum(spectrum);
}

/// Reduced state on the listed modes, in the listed order.
inline GaussianState extract_modes(const GaussianState& state, std::span<const int> indices) {
    const int n = state.n_modes();
    if (indices.empty()) throw Error(ErrorKind::IndexError, "no modes selected");
    std::vector<bool> seen(n, false);
    for (int idx : indices) {
        if (idx < 0 || idx >= n)
            throw Error(ErrorKind::IndexError,
                        "mode index " + std::to_string(idx) + " out of range [0, " + std::to_string(n) + ")");
        if (seen[idx]) throw Error(ErrorKind::IndexError, "duplicate mode index " + std::to_string(idx));
        seen[idx] = true;
    }
    const auto m = static_cast<Eigen::Index>(indices.size());
    Vector mean(2 * m);
    Matrix cov(2 * m, 2 * m);
    for (Eigen::Index a = 0; a < m; ++a) {
        mean.segment<2>(2 * a) = state.mean().segment<2>(2 * indices[a]);
        for (Eigen::Index b = 0; b < m; ++b)
            cov.block<2, 2>(2 * a, 2 * b) = state.block(indices[a], indices[b]);
    }
    return GaussianState(std::move(mean), std::move(cov));
}

inline GaussianState extract_modes(const GaussianState& state, std::initializer_list<int> indices) {
    return extract_modes(state, std::span<const int>(indices.begin(), indices.size()));
}

/// Block-diagonal (tensor product) combination of two states.
inline GaussianState direct_sum(const GaussianState& a, const GaussianState& b) {
    const auto na = a.cov().rows(), nb = b.cov().rows();
    Vector mean(na + nb);
    mean << a.mean(), b.mean();
    Matrix cov = Matrix::Zero(na + nb, na + nb);
    cov.topLeftCorner(na, na) = a.cov();
    cov.bottomRightCorner(nb, nb) = b.cov();
    return GaussianState(std::move(mean), std::move(cov));
}

/// mean -> S mean + d, cov -> S cov S^T + Y.
///
/// The output must satisfy the uncertainty relation; a violation means the
/// (S, Y) pair is not a valid Gaussian channel for this input.
inline GaussianState apply_gaussian_map(const GaussianState& state, const Matrix& s, const Matrix& y,
                                        const Vector& d) {
    const auto in_dim = state.cov().rows();
    if (s.cols() != in_dim || s.rows() % 2 != 0 || s.rows() == 0)
        throw Error(ErrorKind::IndexError, "map matrix has shape " + std::to_string(s.rows()) + "x" +
                                               std::to_string(s.cols()) + ", input dimension is " +
                                               std::to_string(in_dim));
    if (y.rows() != s.rows() || y.cols() != s.rows() || d.size() != s.rows())
        throw Error(ErrorKind::IndexError, "noise matrix or displacement has inconsistent dimension");
    if (!detail::is_symmetric(y)) throw Error(ErrorKind::InvalidParameter, "noise matrix is not symmetric");

    Vector mean = s * state.mean() + d;
    Matrix cov = detail::symmetrized(s * state.cov() * s.transpose() + y);
    const double margin = physicality_margin(cov);
    if (margin < 1.0 - kPhysicalityTolerance)
        throw Error(ErrorKind::UnphysicalChannel,
                    "output violates the uncertainty relation (smallest symplectic eigenvalue " +
                        std::to_string(margin) + ")");
    return GaussianState(std::move(mean), std::move(cov), GaussianState::Unchecked{});
}

/// State of the kept modes after heterodyne detection of `measured`.
///
/// cov' = A - C (B + I)^-1 C^T with A the kept block, B the measured block and C
/// their cross-covariance. The covariance does not depend on the outcome; the
/// returned mean is zero.
inline GaussianState condition_on_heterodyne(const GaussianState& state, std::span<const int> measured) {
    const int n = state.n_modes();
    std::vector<bool> is_measured(n, false);
    for (int idx : measured) {
        if (idx < 0 || idx >= n)
            throw Error(ErrorKind::IndexError, "measured mode " + std::to_string(idx) + " out of range");
        if (is_measured[idx]) throw Error(ErrorKind::IndexError, "duplicate measured mode " + std::to_string(idx));
        is_measured[idx] = true;
    }
    std::vector<int> kept;
    for (int k = 0; k < n; ++k)
        if (!is_measured[k]) kept.push_back(k);
    if (kept.empty()) throw Error(ErrorKind::IndexError, "every mode is measured; nothing is kept");

    const auto nk = static_cast<Eigen::Index>(kept.size());
    const auto nm = static_cast<Eigen::Index>(measured.size());
    Matrix a(2 * nk, 2 * nk), b(2 * nm, 2 * nm), c(2 * nk, 2 * nm);
    for (Eigen::Index i = 0; i < nk; ++i)
        for (Eigen::Index j = 0; j < nk; ++j) a.block<2, 2>(2 * i, 2 * j) = state.block(kept[i], kept[j]);
    for (Eigen::Index i = 0; i < nm; ++i)
        for (Eigen::Index j = 0; j < nm; ++j) b.block<2, 2>(2 * i, 2 * j) = state.block(measured[i], measured[j]);
    for (Eigen::Index i = 0; i < nk; ++i)
        for (Eigen::Index j = 0; j < nm; ++j) c.block<2, 2>(2 * i, 2 * j) = state.block(kept[i], measured[j]);

    if (nm == 0) return extract_modes(state, kept);

    b += Matrix::Identity(2 * nm, 2 * nm);
    Eigen::LLT<Matrix> llt(b);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorKind::InvalidCovariance, "measured block plus vacuum is not positive definite");
    const Matrix gain_t = llt.solve(c.transpose());
    Matrix cov = a - c * gain_t;
    return GaussianState(Vector::Zero(2 * nk), detail::symmetrized(cov));
}

inline GaussianState condition_on_heterodyne(const GaussianState& state, std::initializer_list<int> measured) {
    return condition_on_heterodyne(state, std::span<const int>(measured.begin(), measured.size()));
}

}  // namespace cvqn
