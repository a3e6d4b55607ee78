#include "qrisk/ae.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace qrisk::ae {

using qsim::Circuit;

namespace {

std::uint64_t checked_M(int m) {
    if (m < 1 || m > 30) throw std::invalid_argument("m must lie in [1, 30]");
    return std::uint64_t{1} << m;
}

AEResult from_pooled(const std::map<std::uint64_t, double>& pooled, int m) {
    if (pooled.empty()) throw std::invalid_argument("no outcomes to estimate from");
    // Keys are canonical y <= M/2, so a smaller key is a smaller estimate.
    auto best = pooled.begin();
    for (auto it = pooled.begin(); it != pooled.end(); ++it) {
        if (it->second > best->second) best = it;
    }
    AEResult r;
    r.m = m;
    r.M = checked_M(m);
    r.modal_y = best->first;
    r.estimate = estimate_of(r.modal_y, m);
    r.interval = error_interval(r.modal_y, m);
    r.half_width = std::max(r.estimate - r.interval.low, r.interval.high - r.estimate);
    return r;
}

std::uint64_t canonical(std::uint64_t y, std::uint64_t M) { return std::min(y, (M - y) % M); }

}  // namespace

double estimate_of(std::uint64_t y, int m) {
    const std::uint64_t M = checked_M(m);
    if (y >= M) throw std::out_of_range("measured value exceeds 2^m - 1");
    const double s = std::sin(static_cast<double>(y) * std::numbers::pi / static_cast<double>(M));
    return s * s;
}

double standard_bound(int m) {
    const double M = static_cast<double>(checked_M(m));
    return std::numbers::pi / M + std::numbers::pi * std::numbers::pi / (M * M);
}

Interval error_interval(std::uint64_t y, int m) {
    const std::uint64_t M = checked_M(m);
    if (y >= M) throw std::out_of_range("measured value exceeds 2^m - 1");
    const double pi = std::numbers::pi;
    const double lo = (static_cast<double>(y) - 1.0) * pi / static_cast<double>(M);
    const double hi = (static_cast<double>(y) + 1.0) * pi / static_cast<double>(M);
    auto s2 = [](double t) {
        const double s = std::sin(t);
        return s * s;
    };
    double a = std::min(s2(lo), s2(hi));
    double b = std::max(s2(lo), s2(hi));
    // Interior extrema of sin^2: zeros at multiples of pi, peaks at pi/2 + k pi.
    for (double z : {0.0, pi}) {
        if (lo <= z && z <= hi) a = 0.0;
    }
    if (lo <= pi / 2 && pi / 2 <= hi) b = 1.0;
    return {std::clamp(a, 0.0, 1.0), std::clamp(b, 0.0, 1.0)};
}

AEResult estimate_from_counts(const qsim::CountsMap& counts, int m) {
    const std::uint64_t M = checked_M(m);
    std::map<std::uint64_t, double> pooled;
    std::uint64_t total = 0;
    for (const auto& [y, n] : counts.counts) {
        if (y >= M) throw std::invalid_argument("count key exceeds 2^m - 1");
        if (n == 0) continue;
        pooled[canonical(y, M)] += static_cast<double>(n);
        total += n;
    }
    if (total == 0) throw std::invalid_argument("empty counts");
    AEResult r = from_pooled(pooled, m);
    r.counts = counts;
    r.shots = total;
    return r;
}

AEResult estimate_from_probabilities(const std::vector<double>& probabilities, int m) {
    const std::uint64_t M = checked_M(m);
    if (probabilities.size() != M) throw std::invalid_argument("distribution length must be 2^m");
    std::map<std::uint64_t, double> pooled;
    for (std::uint64_t y = 0; y < M; ++y) pooled[canonical(y, M)] += probabilities[y];
    AEResult r = from_pooled(pooled, m);
    r.probabilities = probabilities;
    return r;
}

std::vector<double> outcome_distribution(const circuits::AEProblem& problem, Route route) {
    problem.validate();
    const std::uint64_t M = checked_M(problem.m);
    if (route == Route::FullCircuit) {
        const Circuit c = circuits::amplitude_estimation_circuit(problem);
        qsim::QuantumState s(c.num_qubits());
        qsim::apply_in_place(s, c);
        return qsim::measure_probabilities(s, c.reg("evaluation").qubits());
    }
    qsim::QuantumState psi(problem.a.num_qubits());
    qsim::apply_in_place(psi, problem.a);
    Circuit q(problem.a.num_qubits());
    if (problem.bare_rotation) {
        q.add(qsim::ry(2.0 * *problem.bare_rotation, problem.objective));
    } else {
        q = circuits::grover_operator(problem);
    }
    const std::size_t dim = psi.size();
    // acc[k][w] = sum_y exp(-2 pi i y k / M) (Q^y A|0>)[w]
    std::vector<std::vector<qsim::Complex>> acc(M, std::vector<qsim::Complex>(dim));
    for (std::uint64_t y = 0; y < M; ++y) {
        const auto amps = psi.amplitudes();
        for (std::uint64_t k = 0; k < M; ++k) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>((y * k) % M) / static_cast<double>(M);
            const qsim::Complex w = std::polar(1.0, ang);
            auto& row = acc[k];
            for (std::size_t i = 0; i < dim; ++i) row[i] += w * amps[i];
        }
        if (y + 1 < M) qsim::apply_in_place(psi, q);
    }
    std::vector<double> p(M, 0.0);
    const double norm = 1.0 / (static_cast<double>(M) * static_cast<double>(M));
    for (std::uint64_t k = 0; k < M; ++k) {
        double s = 0.0;
        for (const auto& v : acc[k]) s += std::norm(v);
        p[k] = s * norm;
    }
    return p;
}

AEResult run_ae(const circuits::AEProblem& problem, std::uint64_t shots, std::uint64_t seed, Route route) {
    if (shots == 0) throw std::invalid_argument("shots must be >= 1");
    const auto p = outcome_distribution(problem, route);
    std::vector<int> eval(problem.m);
    std::iota(eval.begin(), eval.end(), problem.a.num_qubits());
    const auto counts = qsim::sample_from_probabilities(p, eval, shots, seed);
    AEResult r = estimate_from_counts(counts, problem.m);
    r.seed = seed;
    r.probabilities = p;
    return r;
}

}  // namespace qrisk::ae
