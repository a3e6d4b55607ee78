#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "qrisk/qsim.hpp"

using namespace qrisk::qsim;

namespace {

oracle::Vec to_vec(const QuantumState& s) { return {s.amplitudes().begin(), s.amplitudes().end()}; }

GateOp random_gate(std::mt19937_64& rng, int n, bool allow_perm = true) {
    std::uniform_real_distribution<double> ang(-2 * oracle::kPi, 2 * oracle::kPi);
    std::vector<int> qs(n);
    std::iota(qs.begin(), qs.end(), 0);
    std::shuffle(qs.begin(), qs.end(), rng);
    int kind = static_cast<int>(rng() % (allow_perm ? 8 : 7));
    if (kind == 6 && n < 2) kind = 1;
    const int max_controls = std::min(3, n - (kind == 6 ? 2 : 1));
    const int k = max_controls > 0 ? static_cast<int>(rng() % (max_controls + 1)) : 0;
    GateOp g;
    switch (kind) {
        case 0: g = h(qs[0]); break;
        case 1: g = x(qs[0]); break;
        case 2: g = z(qs[0]); break;
        case 3: g = ry(ang(rng), qs[0]); break;
        case 4: g = u2(ang(rng), ang(rng), qs[0]); break;
        case 5: g = u3(ang(rng), ang(rng), ang(rng), qs[0]); break;
        case 6: g = swap(qs[0], qs[1]); break;
        default: {
            const int t = std::min(n, 2);
            std::vector<std::uint64_t> table(std::size_t{1} << t);
            std::iota(table.begin(), table.end(), 0);
            std::shuffle(table.begin(), table.end(), rng);
            g = permutation({qs.begin(), qs.begin() + t}, table);
            const int kk = std::min<int>(k, n - t);
            for (int i = 0; i < kk; ++i) g.controls.push_back(qs[t + i]);
            return g;
        }
    }
    const int used = kind == 6 ? 2 : 1;
    for (int i = 0; i < k; ++i) g.controls.push_back(qs[used + i]);
    return g;
}

}  // namespace

TEST(QuantumState, HadamardOnZero) {
    Circuit c(1);
    c.add(h(0));
    const auto s = apply_circuit(QuantumState(1), c);
    EXPECT_NEAR(s[0].real(), 1 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(s[1].real(), 1 / std::sqrt(2.0), 1e-15);
}

TEST(QuantumState, BernoulliLoadingRotation) {
    Circuit c(1);
    c.add(ry(2 * std::asin(std::sqrt(0.3)), 0));
    const auto s = apply_circuit(QuantumState(1), c);
    EXPECT_NEAR(s[0].real(), std::sqrt(0.7), 1e-15);
    EXPECT_NEAR(s[1].real(), std::sqrt(0.3), 1e-15);
}

TEST(QuantumState, EmptyCircuitIsIdentity) {
    std::mt19937_64 rng(1);
    std::vector<Complex> v(8);
    std::normal_distribution<double> g;
    double s = 0;
    for (auto& a : v) {
        a = {g(rng), g(rng)};
        s += std::norm(a);
    }
    for (auto& a : v) a /= std::sqrt(s);
    const auto st = QuantumState::from_amplitudes(v);
    const auto out = apply_circuit(st, Circuit(3));
    EXPECT_EQ(to_vec(out), to_vec(st));
}

TEST(QuantumState, RejectsBadInput) {
    EXPECT_THROW(QuantumState::from_amplitudes({1.0, 0.0, 0.0}), std::invalid_argument);
    EXPECT_THROW(QuantumState::from_amplitudes({1.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(QuantumState::basis(2, 4), std::out_of_range);
    QuantumState s(2);
    EXPECT_THROW(apply_in_place(s, Circuit(3)), std::invalid_argument);
}

TEST(CircuitValidation, IndexAndStructureErrors) {
    Circuit c(3);
    EXPECT_THROW(c.add(x(3)), std::out_of_range);
    EXPECT_THROW(c.add(cnot(1, 1)), std::invalid_argument);
    EXPECT_THROW(c.add(permutation({0, 1}, {0, 1, 1, 2})), std::invalid_argument);
    EXPECT_THROW(c.add(permutation({0}, {0, 1, 2, 3})), std::invalid_argument);
    EXPECT_THROW(c.add({GateKind::Ry, {0}, {}, {}, {}}), std::invalid_argument);
    c.add_register("state", 0, 2);
    EXPECT_THROW(c.add_register("other", 1, 2), std::invalid_argument);
    EXPECT_THROW(c.add_register("wide", 2, 2), std::out_of_range);
    EXPECT_THROW(c.reg("missing"), std::out_of_range);
    EXPECT_EQ(c.reg("state").qubits(), (std::vector<int>{0, 1}));
}

TEST(Measurement, MarginalsOfKnownState) {
    Circuit c(1);
    c.add(h(0));
    auto p = measure_probabilities(apply_circuit(QuantumState(1), c), std::vector<int>{0});
    EXPECT_NEAR(p[0], 0.5, 1e-15);
    EXPECT_NEAR(p[1], 0.5, 1e-15);

    auto s = QuantumState::from_amplitudes({std::sqrt(0.7), 0.0, 0.0, std::sqrt(0.3)});
    p = measure_probabilities(s, std::vector<int>{1});
    EXPECT_NEAR(p[0], 0.7, 1e-15);
    EXPECT_NEAR(p[1], 0.3, 1e-15);

    // |0>_q1 (x) (sqrt(.2)|0> + sqrt(.8)|1>)_q0 measured on q1
    s = QuantumState::from_amplitudes({std::sqrt(0.2), std::sqrt(0.8), 0.0, 0.0});
    p = measure_probabilities(s, std::vector<int>{1});
    EXPECT_NEAR(p[0], 1.0, 1e-15);
    EXPECT_THROW(measure_probabilities(s, std::vector<int>{0, 0}), std::invalid_argument);
    EXPECT_THROW(measure_probabilities(s, std::vector<int>{2}), std::out_of_range);
}

TEST(Measurement, NonContiguousOrderFollowsQubitList) {
    // |q2 q1 q0> = |1 0 1>: listing [2, 0] gives key bit0 = q2, bit1 = q0.
    const auto s = QuantumState::basis(3, 0b101);
    auto p = measure_probabilities(s, std::vector<int>{2, 1});
    EXPECT_EQ(p[0b01], 1.0);
    p = measure_probabilities(s, std::vector<int>{1, 0});
    EXPECT_EQ(p[0b10], 1.0);
}

TEST(Sampling, PointMassAndDeterminism) {
    const auto s = QuantumState::basis(3, 5);
    const std::vector<int> all{0, 1, 2};
    auto c = sample_counts(s, all, 1000, 3);
    ASSERT_EQ(c.counts.size(), 1u);
    EXPECT_EQ(c.counts.at(5), 1000u);
    EXPECT_EQ(c.bitstring(5), "101");
    EXPECT_THROW(sample_counts(s, all, 0, 3), std::invalid_argument);

    Circuit hc(1);
    hc.add(h(0));
    const auto plus = apply_circuit(QuantumState(1), hc);
    const auto a = sample_counts(plus, std::vector<int>{0}, 8192, 42);
    const auto b = sample_counts(plus, std::vector<int>{0}, 8192, 42);
    EXPECT_EQ(a.counts, b.counts);
    // 5 sigma of Binomial(8192, 1/2)
    const double sigma = std::sqrt(8192 * 0.25);
    EXPECT_LT(std::abs(static_cast<double>(a.counts.at(0)) - 4096.0), 5 * sigma);
    EXPECT_EQ(a.counts.at(0) + a.counts.at(1), 8192u);
}

TEST(Gates, U3AndU2MatchClosedForms) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ang(-7, 7);
    for (int t = 0; t < 50; ++t) {
        const double th = ang(rng), ph = ang(rng), la = ang(rng);
        const auto m = gate_matrix(u3(th, ph, la, 0));
        const auto ref = oracle::closed_form(u3(th, ph, la, 0));
        for (int i = 0; i < 4; ++i) EXPECT_LT(std::abs(m[i] - ref[i / 2][i % 2]), 1e-12);
        const auto m2 = gate_matrix(u2(ph, la, 0));
        const auto m3 = gate_matrix(u3(oracle::kPi / 2, ph, la, 0));
        for (int i = 0; i < 4; ++i) EXPECT_LT(std::abs(m2[i] - m3[i]), 1e-12);
    }
}

TEST(Gates, EveryKindIsUnitaryAndMatchesOracle) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 4);
        Circuit c(n);
        GateOp g = random_gate(rng, n, true);
        c.add(g);
        const auto dim = std::size_t{1} << n;
        for (std::size_t j = 0; j < dim; ++j) {
            const auto got = to_vec(apply_circuit(QuantumState::basis(n, j), c));
            const auto want = oracle::apply_circuit(oracle::basis(dim, j), c);
            ASSERT_LT(oracle::max_diff(got, want), 1e-12) << "gate " << gate_name(g.kind);
        }
        const auto u = oracle::unitary(c);
        EXPECT_LT(oracle::max_diff(oracle::mul(oracle::adjoint(u), u), oracle::identity(dim)), 1e-12);
    }
}

TEST(Circuits, RandomCircuitsPreserveNormAndAgreeWithOracle) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 11);
        Circuit c(n);
        for (int k = 0; k < 200; ++k) c.add(random_gate(rng, n, n <= 8));
        const auto out = apply_circuit(QuantumState(n), c);
        EXPECT_NEAR(out.norm_squared(), 1.0, 1e-9);
        if (n <= 8) {
            const auto want = oracle::apply_circuit(oracle::basis(std::size_t{1} << n, 0), c);
            EXPECT_LT(oracle::max_diff(to_vec(out), want), 1e-10);
        }
    }
}

TEST(Circuits, InverseAndControlled) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 3;
        Circuit c(n + 1);
        for (int k = 0; k < 15; ++k) c.add(random_gate(rng, n, true));
        c.add_global_phase(0.37 * trial);
        Circuit both = c;
        both.append(inverse(c));
        const auto u = oracle::unitary(both);
        EXPECT_LT(oracle::max_diff(u, oracle::identity(16)), 1e-11);

        // controlled(c) acts as c when qubit 3 is 1 and as identity otherwise.
        const auto cu = oracle::unitary(controlled(c, n));
        const auto plain = oracle::unitary(c);
        for (std::size_t j = 0; j < 16; ++j) {
            for (std::size_t r = 0; r < 16; ++r) {
                const bool on = (j >> n) & 1;
                oracle::C want = on ? ((r >> n) & 1 ? plain[r][j] : 0.0) : (r == j ? 1.0 : 0.0);
                ASSERT_LT(std::abs(cu[r][j] - want), 1e-11);
            }
        }
    }
}

TEST(Dump, TabSeparatedAscending) {
    Circuit c(1);
    c.add(h(0));
    std::ostringstream os;
    dump_state(os, apply_circuit(QuantumState(1), c));
    EXPECT_EQ(os.str(), "0\t0.70710678118654757\t0\n1\t0.70710678118654757\t0\n");
}
