#pragma once

// Internal helpers for trigonometric synthesis on equispaced grids.
// A sum over modes k = 1..N collapses exactly onto residues r = k mod m,
// because cos/sin(2 pi k i/m) only depend on k mod m at grid points.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace circlechaos::detail {

struct TrigTable {
    int m;
    std::vector<double> cos_v, sin_v;

    explicit TrigTable(int m_) : m(m_), cos_v(m_), sin_v(m_) {
        for (int r = 0; r < m_; ++r) {
            double th = 2.0 * std::numbers::pi * r / m_;
            cos_v[r] = std::cos(th);
            sin_v[r] = std::sin(th);
        }
    }
};

// Fold amplitude arrays (indexed k = 1..N) into per-residue accumulators.
inline void fold_modes(const std::vector<double>& a, const std::vector<double>& b, int m,
                       std::vector<double>& abar, std::vector<double>& bbar) {
    abar.assign(m, 0.0);
    bbar.assign(m, 0.0);
    const std::size_t n = a.size();
    for (std::size_t k1 = 0; k1 < n; ++k1) {
        int r = static_cast<int>((k1 + 1) % static_cast<std::size_t>(m));
        abar[r] += a[k1];
        bbar[r] += b[k1];
    }
}

// out[i] = c0 + sum_r abar[r] cos(2 pi r i/m) + bbar[r] sin(2 pi r i/m).
inline void synth_folded(const TrigTable& t, double c0, const std::vector<double>& abar,
                         const std::vector<double>& bbar, std::vector<double>& out) {
    const int m = t.m;
    out.assign(m, c0);
    for (int i = 0; i < m; ++i) {
        double acc = 0.0;
        int idx = 0;
        for (int r = 0; r < m; ++r) {
            acc += abar[r] * t.cos_v[idx] + bbar[r] * t.sin_v[idx];
            idx += i;
            if (idx >= m) idx -= m;
        }
        out[i] += acc;
    }
}

// Folded synthesis for complex one-sided spectra: given c(q) for q = 1..Q of a
// real function f(x) = 2 Re sum_q c(q) e^{2 pi i q x}, sample f on the m-grid.
inline void synth_onesided(const TrigTable& t, const std::vector<std::complex<double>>& coef,
                           std::vector<double>& out) {
    const int m = t.m;
    std::vector<double> abar(m, 0.0), bbar(m, 0.0);
    for (std::size_t q1 = 0; q1 < coef.size(); ++q1) {
        int r = static_cast<int>((q1 + 1) % static_cast<std::size_t>(m));
        abar[r] += 2.0 * coef[q1].real();
        bbar[r] -= 2.0 * coef[q1].imag();
    }
    synth_folded(t, 0.0, abar, bbar, out);
}

}  // namespace circlechaos::detail
