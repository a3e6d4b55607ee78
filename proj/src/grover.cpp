#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "qrisk/circuits.hpp"

namespace qrisk::circuits {

void AEProblem::validate() const {
    if (m < 1) throw std::invalid_argument("AE needs m >= 1");
    if (m > 20) throw std::invalid_argument("AE supports m <= 20");
    if (objective < 0 || objective >= a.num_qubits()) throw std::out_of_range("objective qubit outside A");
    if (a.has_register("ancilla")) {
        const auto& r = a.reg("ancilla");
        if (objective >= r.first && objective < r.first + r.size) {
            throw std::invalid_argument("objective qubit lies in the ancilla register");
        }
    }
    if (bare_rotation && a.num_qubits() != 1) throw std::invalid_argument("bare rotation needs a one-qubit A");
}

std::vector<int> AEProblem::reflect_qubits() const {
    std::vector<int> q;
    const bool has_anc = a.has_register("ancilla");
    const auto anc = has_anc ? a.reg("ancilla") : qsim::Register{};
    for (int i = 0; i < a.num_qubits(); ++i) {
        if (has_anc && i >= anc.first && i < anc.first + anc.size) continue;
        q.push_back(i);
    }
    return q;
}

namespace {

// X^{(x)} . (multi-)controlled Z . X^{(x)} over `qubits`, with optional extra control.
void add_zero_reflection(Circuit& c, const std::vector<int>& qubits, const std::vector<int>& extra) {
    for (int q : qubits) c.add(qsim::x(q));
    std::vector<int> controls(qubits.begin(), qubits.end() - 1);
    controls.insert(controls.end(), extra.begin(), extra.end());
    c.add(qsim::mcz(std::move(controls), qubits.back()));
    for (int q : qubits) c.add(qsim::x(q));
}

}  // namespace

Circuit grover_operator(const AEProblem& problem) {
    problem.validate();
    const Circuit& a = problem.a;
    Circuit q(a.num_qubits());
    for (const auto& r : a.registers()) q.add_register(r.name, r.first, r.size);
    q.add(qsim::z(problem.objective));
    q.add_global_phase(std::numbers::pi);
    q.append(inverse(a));
    add_zero_reflection(q, problem.reflect_qubits(), {});
    q.append(a);
    return q;
}

Circuit controlled_grover_power(const AEProblem& problem, std::uint64_t power, int control, int width) {
    problem.validate();
    const Circuit& a = problem.a;
    if (width < a.num_qubits() || control < a.num_qubits() || control >= width) {
        throw std::out_of_range("control must lie outside A and inside the circuit");
    }
    Circuit c(width);
    if (problem.bare_rotation) {
        const double angle = std::fmod(2.0 * static_cast<double>(power) * *problem.bare_rotation, 4.0 * std::numbers::pi);
        c.add(qsim::mcry(angle, {control}, problem.objective));
        return c;
    }
    const Circuit a_inv = inverse(a);
    const auto reflect = problem.reflect_qubits();
    std::vector<int> id(a.num_qubits());
    std::iota(id.begin(), id.end(), 0);
    for (std::uint64_t k = 0; k < power; ++k) {
        // The -1 of S_psi becomes a Z on the control.
        c.add(qsim::z(control));
        c.add(qsim::mcz({control}, problem.objective));
        c.append(a_inv, id);
        add_zero_reflection(c, reflect, {control});
        c.append(a, id);
    }
    return c;
}

Circuit qft(int m) {
    if (m < 1) throw std::invalid_argument("qft needs m >= 1");
    Circuit c(m);
    for (int i = m - 1; i >= 0; --i) {
        c.add(qsim::h(i));
        for (int j = i - 1; j >= 0; --j) {
            c.add(qsim::with_control(qsim::phase(std::numbers::pi / std::ldexp(1.0, i - j), i), j));
        }
    }
    for (int k = 0; k < m / 2; ++k) c.add(qsim::swap(k, m - 1 - k));
    return c;
}

Circuit inverse_qft(int m) { return inverse(qft(m)); }

Circuit amplitude_estimation_circuit(const AEProblem& problem) {
    problem.validate();
    const int na = problem.a.num_qubits();
    const int width = na + problem.m;
    Circuit c(width);
    for (const auto& r : problem.a.registers()) c.add_register(r.name, r.first, r.size);
    c.add_register("evaluation", na, problem.m);
    c.append(problem.a);
    for (int j = 0; j < problem.m; ++j) c.add(qsim::h(na + j));
    for (int j = 0; j < problem.m; ++j) {
        c.append(controlled_grover_power(problem, std::uint64_t{1} << j, na + j, width));
    }
    std::vector<int> eval(problem.m);
    std::iota(eval.begin(), eval.end(), na);
    c.append(inverse_qft(problem.m), eval);
    return c;
}

}  // namespace qrisk::circuits
