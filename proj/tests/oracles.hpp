#pragma once

// Reference implementations used only by the tests. They are written
// independently of the library kernels: dense matrices built from closed-form
// gate definitions, analytic phase-estimation statistics, direct enumeration.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "qrisk/qsim.hpp"

namespace oracle {

using C = std::complex<double>;
using Vec = std::vector<C>;
using Mat = std::vector<Vec>;  // row-major, m[r][c]

inline constexpr double kPi = std::numbers::pi;

inline std::array<std::array<C, 2>, 2> closed_form(const qrisk::qsim::GateOp& g) {
    using K = qrisk::qsim::GateKind;
    const C i{0.0, 1.0};
    const double s2 = 1.0 / std::sqrt(2.0);
    switch (g.kind) {
        case K::H: return {{{s2, s2}, {s2, -s2}}};
        case K::X: return {{{0.0, 1.0}, {1.0, 0.0}}};
        case K::Z: return {{{1.0, 0.0}, {0.0, -1.0}}};
        case K::Ry: {
            const double t = g.params[0];
            return {{{std::cos(t / 2), -std::sin(t / 2)}, {std::sin(t / 2), std::cos(t / 2)}}};
        }
        case K::U2: {
            const double phi = g.params[0], lam = g.params[1];
            return {{{s2, -s2 * std::exp(i * lam)}, {s2 * std::exp(i * phi), s2 * std::exp(i * (lam + phi))}}};
        }
        case K::U3: {
            const double th = g.params[0], phi = g.params[1], lam = g.params[2];
            return {{{std::cos(th / 2), -std::exp(i * lam) * std::sin(th / 2)},
                     {std::exp(i * phi) * std::sin(th / 2), std::exp(i * (lam + phi)) * std::cos(th / 2)}}};
        }
        default: throw std::logic_error("not a single-qubit kind");
    }
}

/// Image of basis vector |j> under the gate, as a sparse list written into `out`.
inline void apply_to_basis(const qrisk::qsim::GateOp& g, std::uint64_t j, C amp, Vec& out) {
    using K = qrisk::qsim::GateKind;
    for (int c : g.controls) {
        if (!((j >> c) & 1)) {
            out[j] += amp;
            return;
        }
    }
    if (g.kind == K::Swap) {
        const int a = g.targets[0], b = g.targets[1];
        const std::uint64_t ba = (j >> a) & 1, bb = (j >> b) & 1;
        std::uint64_t k = j & ~((std::uint64_t{1} << a) | (std::uint64_t{1} << b));
        k |= (ba << b) | (bb << a);
        out[k] += amp;
        return;
    }
    if (g.kind == K::Permutation) {
        std::uint64_t v = 0;
        for (std::size_t t = 0; t < g.targets.size(); ++t) v |= ((j >> g.targets[t]) & 1) << t;
        const std::uint64_t w = g.table[v];
        std::uint64_t k = j;
        for (std::size_t t = 0; t < g.targets.size(); ++t) {
            k &= ~(std::uint64_t{1} << g.targets[t]);
            k |= ((w >> t) & 1) << g.targets[t];
        }
        out[k] += amp;
        return;
    }
    const auto m = closed_form(g);
    const int t = g.targets[0];
    const std::uint64_t b = (j >> t) & 1;
    const std::uint64_t j0 = j & ~(std::uint64_t{1} << t);
    out[j0] += m[0][b] * amp;
    out[j0 | (std::uint64_t{1} << t)] += m[1][b] * amp;
}

inline Vec apply_gate(const Vec& v, const qrisk::qsim::GateOp& g) {
    Vec out(v.size());
    for (std::uint64_t j = 0; j < v.size(); ++j) {
        if (v[j] != C{}) apply_to_basis(g, j, v[j], out);
    }
    return out;
}

inline Vec apply_circuit(Vec v, const qrisk::qsim::Circuit& c) {
    for (const auto& g : c.gates()) v = apply_gate(v, g);
    const C ph = std::exp(C{0.0, c.global_phase()});
    for (auto& a : v) a *= ph;
    return v;
}

inline Vec basis(std::size_t dim, std::uint64_t j) {
    Vec v(dim);
    v[j] = 1.0;
    return v;
}

/// Column k is the image of |k>.
inline Mat unitary(const qrisk::qsim::Circuit& c) {
    const std::size_t dim = std::size_t{1} << c.num_qubits();
    Mat u(dim, Vec(dim));
    for (std::size_t k = 0; k < dim; ++k) {
        const Vec col = apply_circuit(basis(dim, k), c);
        for (std::size_t r = 0; r < dim; ++r) u[r][k] = col[r];
    }
    return u;
}

inline Mat mul(const Mat& a, const Mat& b) {
    const std::size_t n = a.size(), k = b.size(), m = b[0].size();
    Mat r(n, Vec(m));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l)
            for (std::size_t j = 0; j < m; ++j) r[i][j] += a[i][l] * b[l][j];
    return r;
}

inline Mat adjoint(const Mat& a) {
    Mat r(a[0].size(), Vec(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[0].size(); ++j) r[j][i] = std::conj(a[i][j]);
    return r;
}

inline Mat identity(std::size_t n) {
    Mat r(n, Vec(n));
    for (std::size_t i = 0; i < n; ++i) r[i][i] = 1.0;
    return r;
}

inline double max_diff(const Mat& a, const Mat& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[0].size(); ++j) d = std::max(d, std::abs(a[i][j] - b[i][j]));
    return d;
}

inline double max_diff(const Vec& a, const Vec& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

/// Rescales `a` by the phase that makes its first entry of magnitude > 1e-9 real positive.
inline Mat fix_phase(Mat a) {
    for (std::size_t j = 0; j < a[0].size(); ++j) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (std::abs(a[i][j]) > 1e-9) {
                const C ph = std::abs(a[i][j]) / a[i][j];
                for (auto& row : a)
                    for (auto& x : row) x *= ph;
                return a;
            }
        }
    }
    return a;
}

/// Analytic phase-estimation outcome law for a = sin^2(theta):
/// P(y) = F(theta/pi - y/M)/2 + F(-theta/pi - y/M)/2, F(d) = |sin(M pi d) / (M sin(pi d))|^2.
inline std::vector<double> qpe_distribution(double theta, int m) {
    const std::uint64_t M = std::uint64_t{1} << m;
    auto F = [&](double d) {
        const double s = std::sin(kPi * d);
        if (std::abs(s) < 1e-14) return 1.0;
        const double r = std::sin(static_cast<double>(M) * kPi * d) / (static_cast<double>(M) * s);
        return r * r;
    };
    std::vector<double> p(M);
    for (std::uint64_t y = 0; y < M; ++y) {
        const double frac = static_cast<double>(y) / static_cast<double>(M);
        p[y] = 0.5 * F(theta / kPi - frac) + 0.5 * F(-theta / kPi - frac);
    }
    return p;
}

inline std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t n, double zero_prob = 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> p(n);
    double s = 0.0;
    for (auto& x : p) {
        x = u(rng) < zero_prob ? 0.0 : u(rng);
        s += x;
    }
    if (s == 0.0) {
        p[0] = 1.0;
        s = 1.0;
    }
    for (auto& x : p) x /= s;
    return p;
}

/// Smallest l with sum_{i<=l} p_i >= level (with a 1e-12 tolerance on the sum).
inline std::size_t quantile_index(const std::vector<double>& p, double level) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (acc >= level - 1e-12) return i;
    }
    return p.size() - 1;
}

}  // namespace oracle
