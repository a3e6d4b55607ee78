// Monte-Carlo wave-function simulation of amplitude damping.
//
// Each trajectory evolves an unnormalized state. After every CNOT all qubits
// see one damping step, implemented as the no-jump operator
// diag((1-p)^{popcount(i)/2}); a jump happens when the squared norm would drop
// below a uniform threshold r, in which case the jump pattern is sampled from
// the pre-step state and r is redrawn.

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

#include "qrisk/qsim.hpp"

namespace qrisk::qsim {

double NoiseModel::relaxation_probability() const { return -std::expm1(-gamma * t_cnot); }

void NoiseModel::validate() const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be finite and >= 0");
    if (!(t_cnot > 0.0) || !std::isfinite(t_cnot)) throw std::invalid_argument("t_cnot must be > 0");
    if (!std::isfinite(crosstalk)) throw std::invalid_argument("crosstalk must be finite");
    if (trajectories < 1) throw std::invalid_argument("trajectories must be >= 1");
}

std::array<std::array<Complex, 4>, 2> crosstalk_cnot_blocks(double alpha) {
    const Complex i{0.0, 1.0};
    const double norm = std::sqrt(1.0 + alpha * alpha);
    const double phi = std::numbers::pi * norm / 4;
    const double nx = 1.0 / norm, nz = alpha / norm;
    const double c = std::cos(phi), s = std::sin(phi);
    // G(sign) = cos(phi) I - sign * i sin(phi) (nx X + nz Z)
    auto g = [&](double sign) -> std::array<Complex, 4> {
        return {c - sign * i * s * nz, -sign * i * s * nx, -sign * i * s * nx, c + sign * i * s * nz};
    };
    const double r = std::numbers::sqrt2 / 2;
    const std::array<Complex, 4> rx = {r, i * r, i * r, r};  // Rx(-pi/2)
    auto mul = [](const std::array<Complex, 4>& a, const std::array<Complex, 4>& b) -> std::array<Complex, 4> {
        return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
                a[2] * b[1] + a[3] * b[3]};
    };
    auto v0 = mul(rx, g(+1.0));
    auto v1 = mul(rx, g(-1.0));
    for (auto& e : v1) e *= -i;
    return {v0, v1};
}

namespace {

struct TrajectoryContext {
    const Circuit& circuit;
    std::span<const int> measured;
    double p;
    bool use_crosstalk;
    std::array<std::array<Complex, 4>, 2> blocks;
    std::vector<double> keep;  // keep[k] = (1-p)^{k/2}
};

void apply_crosstalk_cnot(std::span<Complex> a, int control, int target,
                          const std::array<std::array<Complex, 4>, 2>& blocks) {
    const std::uint64_t cb = std::uint64_t{1} << control, tb = std::uint64_t{1} << target;
    for (std::uint64_t i = 0; i < a.size(); ++i) {
        if (i & tb) continue;
        const auto& m = blocks[(i & cb) ? 1 : 0];
        const Complex x0 = a[i], x1 = a[i | tb];
        a[i] = m[0] * x0 + m[1] * x1;
        a[i | tb] = m[2] * x0 + m[3] * x1;
    }
}

std::vector<double> run_trajectory(const TrajectoryContext& ctx, std::uint64_t seed) {
    const int n = ctx.circuit.num_qubits();
    QuantumState state(n);
    auto amps = state.mutable_amplitudes();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double norm2 = 1.0;
    double r = unif(rng);
    const double p = ctx.p;

    auto damping_step = [&] {
        double next = 0.0;
        for (std::uint64_t i = 0; i < amps.size(); ++i) next += std::norm(amps[i]) * ctx.keep[2 * std::popcount(i)];
        if (next >= r) {
            for (std::uint64_t i = 0; i < amps.size(); ++i) amps[i] *= ctx.keep[std::popcount(i)];
            norm2 = next;
            if (norm2 < 1e-150) {
                const double f = 1.0 / std::sqrt(norm2);
                for (auto& a : amps) a *= f;
                r /= norm2;
                norm2 = 1.0;
            }
            return;
        }
        // A jump occurred during this step; `amps` still holds the pre-step state.
        double total = 0.0;
        for (std::uint64_t i = 0; i < amps.size(); ++i) {
            total += std::norm(amps[i]) * (1.0 - ctx.keep[2 * std::popcount(i)]);
        }
        double pick = unif(rng) * total;
        std::uint64_t src = 0;
        for (std::uint64_t i = 0; i < amps.size(); ++i) {
            const double w = std::norm(amps[i]) * (1.0 - ctx.keep[2 * std::popcount(i)]);
            if (w <= 0.0) continue;
            src = i;
            pick -= w;
            if (pick < 0.0) break;
        }
        // Jump pattern among the excited qubits of `src`, conditioned on being
        // non-empty: the first jumper is drawn from the truncated geometric law,
        // later ones independently with probability p.
        std::vector<int> ones;
        for (int q = 0; q < n; ++q) {
            if ((src >> q) & 1) ones.push_back(q);
        }
        const int k = static_cast<int>(ones.size());
        const double none = ctx.keep[2 * k];
        const double u = unif(rng) * (1.0 - none);
        int first = static_cast<int>(std::floor(std::log1p(-u) / std::log1p(-p)));
        first = std::clamp(first, 0, k - 1);
        std::uint64_t jump = std::uint64_t{1} << ones[first];
        for (int j = first + 1; j < k; ++j) {
            if (unif(rng) < p) jump |= std::uint64_t{1} << ones[j];
        }
        for (std::uint64_t i = 0; i < amps.size(); ++i) {
            if (i & jump) continue;
            amps[i] = amps[i | jump] * ctx.keep[std::popcount(i)];
        }
        double s = 0.0;
        for (std::uint64_t i = 0; i < amps.size(); ++i) {
            if (i & jump) amps[i] = 0.0;
            s += std::norm(amps[i]);
        }
        const double f = 1.0 / std::sqrt(s);
        for (auto& a : amps) a *= f;
        norm2 = 1.0;
        r = unif(rng);
    };

    for (const auto& g : ctx.circuit.gates()) {
        if (is_cnot(g)) {
            if (ctx.use_crosstalk) {
                apply_crosstalk_cnot(amps, g.controls[0], g.targets[0], ctx.blocks);
            } else {
                apply_gate(state, g);
            }
            if (p > 0.0) damping_step();
        } else {
            apply_gate(state, g);
        }
    }
    auto probs = measure_probabilities(state, ctx.measured);
    for (auto& v : probs) v /= norm2;
    return probs;
}

}  // namespace

NoisyResult run_noisy(const Circuit& circuit, const NoiseModel& noise, std::span<const int> measured) {
    noise.validate();
    for (const auto& g : circuit.gates()) {
        const bool single = g.kind != GateKind::Swap && g.kind != GateKind::Permutation && g.controls.empty();
        if (!single && !is_cnot(g)) {
            throw std::invalid_argument("run_noisy accepts single-qubit gates and CNOTs only; got " +
                                        std::string(gate_name(g.kind)) + " with " +
                                        std::to_string(g.controls.size()) + " controls");
        }
    }
    TrajectoryContext ctx{circuit, measured, noise.relaxation_probability(), noise.crosstalk != 0.0,
                          crosstalk_cnot_blocks(noise.crosstalk), {}};
    const int n = circuit.num_qubits();
    ctx.keep.resize(2 * n + 1);
    for (int k = 0; k <= 2 * n; ++k) ctx.keep[k] = std::pow(1.0 - ctx.p, 0.5 * k);

    const int runs = ctx.p > 0.0 ? noise.trajectories : 1;
    std::vector<std::vector<double>> results(runs);
    const int workers =
        std::max(1, std::min<int>(runs, static_cast<int>(std::thread::hardware_concurrency())));
    {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (int t = w; t < runs; t += workers) results[t] = run_trajectory(ctx, derive_seed(noise.seed, t));
            });
        }
    }
    NoisyResult out;
    out.trajectories_run = runs;
    const std::size_t dim = results[0].size();
    out.probabilities.assign(dim, 0.0);
    out.standard_errors.assign(dim, 0.0);
    for (const auto& r : results) {
        for (std::size_t k = 0; k < dim; ++k) out.probabilities[k] += r[k];
    }
    for (auto& v : out.probabilities) v /= runs;
    if (runs > 1) {
        for (const auto& r : results) {
            for (std::size_t k = 0; k < dim; ++k) {
                const double d = r[k] - out.probabilities[k];
                out.standard_errors[k] += d * d;
            }
        }
        for (auto& v : out.standard_errors) v = std::sqrt(v / (runs - 1) / runs);
    }
    return out;
}

}  // namespace qrisk::qsim
