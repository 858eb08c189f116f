#pragma once

// Real, orthonormal spherical harmonics on the unit sphere.
//
//   Y_l0      = Pbar_l0(cos t)
//   Y_lm, m>0 = sqrt(2) Pbar_lm(cos t) cos(m phi)
//   Y_lm, m<0 = sqrt(2) Pbar_l|m|(cos t) sin(|m| phi)
//
// Pbar_lm already carries sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!), no Condon-Shortley phase.

#include <cmath>
#include <numbers>
#include <vector>

#include "hgp/error.hpp"

namespace hgp::sph {

inline constexpr int kMaxDegree = 100;

/// Triangular table of normalized associated Legendre values, index l*(l+1)/2 + m.
class LegendreTable {
public:
    explicit LegendreTable(int l_max) : l_max_(l_max), values_(static_cast<std::size_t>((l_max + 1) * (l_max + 2) / 2)) {
        if (l_max < 0 || l_max > kMaxDegree) throw InvalidArgument("spherical harmonic degree out of range [0, 100]");
    }

    /// Fill for colatitude t; stable upward recursion in l for each fixed m.
    void evaluate(double colatitude) {
        const double x = std::cos(colatitude);
        const double s = std::sin(colatitude);
        double pmm = 0.5 / std::sqrt(std::numbers::pi);  // Pbar_00 = 1/sqrt(4 pi)
        for (int m = 0; m <= l_max_; ++m) {
            if (m > 0) pmm *= std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
            at(m, m) = pmm;
            if (m == l_max_) break;
            double p_lm2 = pmm;
            double p_lm1 = std::sqrt(2.0 * m + 3.0) * x * pmm;
            at(m + 1, m) = p_lm1;
            for (int l = m + 2; l <= l_max_; ++l) {
                const double ll = static_cast<double>(l);
                const double mm = static_cast<double>(m);
                const double a = std::sqrt((4.0 * ll * ll - 1.0) / (ll * ll - mm * mm));
                const double b = std::sqrt(((ll - 1.0) * (ll - 1.0) - mm * mm) / (4.0 * (ll - 1.0) * (ll - 1.0) - 1.0));
                const double p = a * (x * p_lm1 - b * p_lm2);
                at(l, m) = p;
                p_lm2 = p_lm1;
                p_lm1 = p;
            }
        }
    }

    [[nodiscard]] double operator()(int l, int m) const { return values_[index(l, m)]; }
    [[nodiscard]] int l_max() const { return l_max_; }

private:
    static std::size_t index(int l, int m) { return static_cast<std::size_t>(l * (l + 1) / 2 + m); }
    double& at(int l, int m) { return values_[index(l, m)]; }

    int l_max_;
    std::vector<double> values_;
};

/// Real harmonic Y_lm from a filled table and the longitude.
inline double real_harmonic(const LegendreTable& table, int l, int m, double longitude) {
    if (m == 0) return table(l, 0);
    const int am = m < 0 ? -m : m;
    const double trig = m > 0 ? std::cos(am * longitude) : std::sin(am * longitude);
    return std::numbers::sqrt2 * table(l, am) * trig;
}

}  // namespace hgp::sph
