#pragma once
// Random physical states with a known Williamson form, Psi = S diag(nu) S^T.

#include <algorithm>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Mat = Eigen::MatrixXd;

// Passive (orthogonal symplectic) transform from a Haar-ish random unitary.
inline Mat random_passive(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    Eigen::MatrixXcd z(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) z(r, c) = {gauss(rng), gauss(rng)};
    const Eigen::MatrixXcd u = Eigen::HouseholderQR<Eigen::MatrixXcd>(z).householderQ();
    Mat o = Mat::Zero(2 * n, 2 * n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const double re = u(r, c).real(), im = u(r, c).imag();
            o(2 * r, 2 * c) = re;
            o(2 * r, 2 * c + 1) = -im;
            o(2 * r + 1, 2 * c) = im;
            o(2 * r + 1, 2 * c + 1) = re;
        }
    return o;
}

inline Mat random_symplectic(int n, std::mt19937_64& rng, double max_squeeze_db = 10.0) {
    std::uniform_real_distribution<double> db(-max_squeeze_db, max_squeeze_db);
    Mat squeeze = Mat::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
        const double r = std::pow(10.0, db(rng) / 20.0);
        squeeze(2 * k, 2 * k) = r;
        squeeze(2 * k + 1, 2 * k + 1) = 1.0 / r;
    }
    return random_passive(n, rng) * squeeze * random_passive(n, rng);
}

struct KnownState {
    Mat cov;
    std::vector<double> nu;  // descending
};

inline KnownState random_known_state(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    KnownState s;
    Mat d = Mat::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
        // Mix of pure modes and mixed modes up to nu = 30.
        const double nu = unit(rng) < 0.2 ? 1.0 : 1.0 + 29.0 * unit(rng) * unit(rng);
        s.nu.push_back(nu);
        d(2 * k, 2 * k) = nu;
        d(2 * k + 1, 2 * k + 1) = nu;
    }
    const Mat sym = random_symplectic(n, rng);
    s.cov = sym * d * sym.transpose();
    s.cov = 0.5 * (s.cov + s.cov.transpose());
    std::sort(s.nu.begin(), s.nu.end(), std::greater<>());
    return s;
}

// Symplectic eigenvalues from the general (non-symmetric) spectrum of Omega Psi:
// eigenvalues come in pairs +/- i nu.
inline std::vector<double> spectrum_via_omega_psi(const Mat& cov) {
    const int n = static_cast<int>(cov.rows()) / 2;
    Mat omega = Mat::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
        omega(2 * k, 2 * k + 1) = 1.0;
        omega(2 * k + 1, 2 * k) = -1.0;
    }
    Eigen::EigenSolver<Mat> es(omega * cov, false);
    std::vector<double> mags;
    for (int i = 0; i < 2 * n; ++i) mags.push_back(std::abs(es.eigenvalues()(i).imag()));
    std::sort(mags.begin(), mags.end(), std::greater<>());
    std::vector<double> out;
    for (int k = 0; k < n; ++k) out.push_back(0.5 * (mags[2 * k] + mags[2 * k + 1]));
    return out;
}

inline bool is_symplectic(const Mat& s, double tol = 1e-9) {
    const int n = static_cast<int>(s.rows()) / 2;
    Mat omega = Mat::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
        omega(2 * k, 2 * k + 1) = 1.0;
        omega(2 * k + 1, 2 * k) = -1.0;
    }
    return (s * omega * s.transpose() - omega).cwiseAbs().maxCoeff() < tol;
}

}  // namespace oracle
