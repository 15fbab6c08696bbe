#pragma once
// Closed-form Holevo bound of one Gaussian-modulated heterodyne link with a
// trusted noisy detector (reverse reconciliation). Independent of the library's
// covariance-matrix machinery.

#include <cmath>

namespace oracle {

inline double g_bits(double nu) {
    if (nu <= 1.0) return 0.0;
    const double a = (nu + 1.0) / 2.0, b = (nu - 1.0) / 2.0;
    return a * std::log2(a) - b * std::log2(b);
}

struct LinkParams {
    double v;      // Alice's EPR variance, V_mod + 1
    double t;      // channel transmittance
    double eps;    // excess noise, SNU at the channel input
    double eta;    // detector efficiency
    double v_el;   // electronic noise, SNU
};

inline double single_link_holevo(const LinkParams& p) {
    const double v = p.v, t = p.t;
    const double chi_line = 1.0 / t - 1.0 + p.eps;
    const double chi_het = (2.0 - p.eta + 2.0 * p.v_el) / p.eta;
    const double chi_tot = chi_line + chi_het / t;

    const double a = v * v * (1.0 - 2.0 * t) + 2.0 * t + t * t * (v + chi_line) * (v + chi_line);
    const double b = t * t * (v * chi_line + 1.0) * (v * chi_line + 1.0);
    const double c = (a * chi_het * chi_het + b + 1.0 + 2.0 * chi_het * (v * std::sqrt(b) + t * (v + chi_line)) +
                      2.0 * t * (v * v - 1.0)) /
                     (t * t * (v + chi_tot) * (v + chi_tot));
    const double d = std::pow((v + std::sqrt(b) * chi_het) / (t * (v + chi_tot)), 2);

    auto pair = [](double x, double y, double sign) { return std::sqrt(0.5 * (x + sign * std::sqrt(x * x - 4.0 * y))); };
    const double l1 = pair(a, b, +1), l2 = pair(a, b, -1);
    const double l3 = pair(c, d, +1), l4 = pair(c, d, -1);
    return g_bits(l1) + g_bits(l2) - g_bits(l3) - g_bits(l4);
}

inline double single_link_mutual_information(const LinkParams& p) {
    const double chi_line = 1.0 / p.t - 1.0 + p.eps;
    const double chi_tot = chi_line + (2.0 - p.eta + 2.0 * p.v_el) / (p.eta * p.t);
    return std::log2((p.v + chi_tot) / (1.0 + chi_tot));
}

}  // namespace oracle
