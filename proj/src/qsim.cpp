#include "qrisk/qsim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <stdexcept>

namespace qrisk::qsim {

namespace {

constexpr int kMaxQubits = 30;

void check_qubit_count(int n) {
    if (n < 0 || n > kMaxQubits) {
        throw std::invalid_argument("qubit count must be in [0, 30], got " + std::to_string(n));
    }
}

// Inserts a zero bit at position `bit` of `k`.
inline std::uint64_t insert_zero(std::uint64_t k, int bit) {
    const std::uint64_t low = k & ((std::uint64_t{1} << bit) - 1);
    return ((k >> bit) << (bit + 1)) | low;
}

std::uint64_t mask_of(const std::vector<int>& qubits) {
    std::uint64_t m = 0;
    for (int q : qubits) m |= std::uint64_t{1} << q;
    return m;
}

void apply_permutation(std::vector<Complex>& a, const GateOp& g) {
    const std::uint64_t cmask = mask_of(g.controls);
    const std::uint64_t tmask = mask_of(g.targets);
    std::vector<Complex> out(a.size());
    for (std::uint64_t i = 0; i < a.size(); ++i) {
        if ((i & cmask) != cmask) {
            out[i] = a[i];
            continue;
        }
        std::uint64_t v = 0;
        for (std::size_t j = 0; j < g.targets.size(); ++j) v |= ((i >> g.targets[j]) & 1) << j;
        const std::uint64_t w = g.table[v];
        std::uint64_t dst = i & ~tmask;
        for (std::size_t j = 0; j < g.targets.size(); ++j) dst |= ((w >> j) & 1) << g.targets[j];
        out[dst] = a[i];
    }
    a.swap(out);
}

int expected_targets(GateKind k) { return k == GateKind::Swap ? 2 : 1; }

int expected_params(GateKind k) {
    switch (k) {
        case GateKind::Ry: return 1;
        case GateKind::U2: return 2;
        case GateKind::U3: return 3;
        default: return 0;
    }
}

}  // namespace

// ---- QuantumState ----------------------------------------------------------

QuantumState::QuantumState(int num_qubits) : num_qubits_(num_qubits) {
    check_qubit_count(num_qubits);
    amplitudes_.assign(std::size_t{1} << num_qubits, Complex{});
    amplitudes_[0] = 1.0;
}

QuantumState::QuantumState(int num_qubits, std::vector<Complex> amplitudes)
    : num_qubits_(num_qubits), amplitudes_(std::move(amplitudes)) {}

QuantumState QuantumState::basis(int num_qubits, std::uint64_t index) {
    QuantumState s(num_qubits);
    if (index >= s.size()) throw std::out_of_range("basis index out of range");
    s.amplitudes_[0] = 0.0;
    s.amplitudes_[index] = 1.0;
    return s;
}

QuantumState QuantumState::from_amplitudes(std::vector<Complex> amplitudes) {
    const std::size_t n = amplitudes.size();
    if (n == 0 || !std::has_single_bit(n)) {
        throw std::invalid_argument("amplitude vector length must be a power of two");
    }
    const int q = std::countr_zero(n);
    check_qubit_count(q);
    double norm = 0.0;
    for (const auto& c : amplitudes) norm += std::norm(c);
    if (std::abs(norm - 1.0) > 1e-10) throw std::invalid_argument("state is not normalized");
    return QuantumState(q, std::move(amplitudes));
}

double QuantumState::norm_squared() const {
    double s = 0.0;
    for (const auto& c : amplitudes_) s += std::norm(c);
    return s;
}

// ---- gates -----------------------------------------------------------------

std::string_view gate_name(GateKind kind) {
    switch (kind) {
        case GateKind::H: return "H";
        case GateKind::X: return "X";
        case GateKind::Z: return "Z";
        case GateKind::Ry: return "RY";
        case GateKind::U2: return "U2";
        case GateKind::U3: return "U3";
        case GateKind::Swap: return "SWAP";
        case GateKind::Permutation: return "PERM";
    }
    return "?";
}

GateOp h(int t) { return {GateKind::H, {t}, {}, {}, {}}; }
GateOp x(int t) { return {GateKind::X, {t}, {}, {}, {}}; }
GateOp z(int t) { return {GateKind::Z, {t}, {}, {}, {}}; }
GateOp ry(double theta, int t) { return {GateKind::Ry, {t}, {}, {theta}, {}}; }
GateOp u2(double phi, double lambda, int t) { return {GateKind::U2, {t}, {}, {phi, lambda}, {}}; }
GateOp u3(double theta, double phi, double lambda, int t) {
    return {GateKind::U3, {t}, {}, {theta, phi, lambda}, {}};
}
GateOp phase(double lambda, int t) { return u3(0.0, 0.0, lambda, t); }
GateOp cnot(int c, int t) { return {GateKind::X, {t}, {c}, {}, {}}; }
GateOp swap(int a, int b) { return {GateKind::Swap, {a, b}, {}, {}, {}}; }
GateOp mcry(double theta, std::vector<int> controls, int t) {
    return {GateKind::Ry, {t}, std::move(controls), {theta}, {}};
}
GateOp mcz(std::vector<int> controls, int t) { return {GateKind::Z, {t}, std::move(controls), {}, {}}; }
GateOp permutation(std::vector<int> targets, std::vector<std::uint64_t> table) {
    return {GateKind::Permutation, std::move(targets), {}, {}, std::move(table)};
}

GateOp with_control(GateOp gate, int control) {
    gate.controls.push_back(control);
    return gate;
}

std::array<Complex, 4> gate_matrix(const GateOp& g) {
    using std::exp;
    const Complex i{0.0, 1.0};
    switch (g.kind) {
        case GateKind::H: {
            const double r = std::numbers::sqrt2 / 2;
            return {r, r, r, -r};
        }
        case GateKind::X: return {0.0, 1.0, 1.0, 0.0};
        case GateKind::Z: return {1.0, 0.0, 0.0, -1.0};
        case GateKind::Ry: {
            const double c = std::cos(g.params[0] / 2), s = std::sin(g.params[0] / 2);
            return {c, -s, s, c};
        }
        case GateKind::U2: {
            const double r = std::numbers::sqrt2 / 2;
            const double phi = g.params[0], lam = g.params[1];
            return {r, -r * exp(i * lam), r * exp(i * phi), r * exp(i * (lam + phi))};
        }
        case GateKind::U3: {
            const double th = g.params[0], phi = g.params[1], lam = g.params[2];
            const double c = std::cos(th / 2), s = std::sin(th / 2);
            // Exact values for the phase-gate special case keep diagonal detection reliable.
            if (th == 0.0) return {1.0, 0.0, 0.0, exp(i * (lam + phi))};
            return {c, -exp(i * lam) * s, exp(i * phi) * s, exp(i * (lam + phi)) * c};
        }
        default: throw std::invalid_argument("gate_matrix: not a single-qubit gate");
    }
}

bool is_cnot(const GateOp& g) { return g.kind == GateKind::X && g.controls.size() == 1; }

// ---- Circuit ---------------------------------------------------------------

std::vector<int> Register::qubits() const {
    std::vector<int> q(size);
    for (int i = 0; i < size; ++i) q[i] = first + i;
    return q;
}

Circuit::Circuit(int num_qubits) : num_qubits_(num_qubits) { check_qubit_count(num_qubits); }

void Circuit::add(GateOp gate) {
    if (static_cast<int>(gate.params.size()) != expected_params(gate.kind)) {
        throw std::invalid_argument("wrong parameter count for " + std::string(gate_name(gate.kind)));
    }
    if (gate.kind == GateKind::Permutation) {
        if (gate.targets.empty() || gate.targets.size() > 20) {
            throw std::invalid_argument("permutation needs 1..20 targets");
        }
        const std::size_t dim = std::size_t{1} << gate.targets.size();
        if (gate.table.size() != dim) throw std::invalid_argument("permutation table has wrong size");
        std::vector<char> seen(dim, 0);
        for (auto v : gate.table) {
            if (v >= dim || seen[v]) throw std::invalid_argument("permutation table is not a bijection");
            seen[v] = 1;
        }
    } else if (static_cast<int>(gate.targets.size()) != expected_targets(gate.kind)) {
        throw std::invalid_argument("wrong target count for " + std::string(gate_name(gate.kind)));
    }
    std::vector<int> all = gate.targets;
    all.insert(all.end(), gate.controls.begin(), gate.controls.end());
    for (int q : all) {
        if (q < 0 || q >= num_qubits_) {
            throw std::out_of_range("qubit " + std::to_string(q) + " out of range for " +
                                    std::to_string(num_qubits_) + "-qubit circuit");
        }
    }
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
        throw std::invalid_argument("gate qubits must be distinct");
    }
    gates_.push_back(std::move(gate));
}

void Circuit::append(const Circuit& other, std::span<const int> qubit_map) {
    if (static_cast<int>(qubit_map.size()) != other.num_qubits()) {
        throw std::invalid_argument("qubit map size does not match appended circuit");
    }
    for (GateOp g : other.gates()) {
        for (int& q : g.targets) q = qubit_map[q];
        for (int& q : g.controls) q = qubit_map[q];
        add(std::move(g));
    }
    global_phase_ += other.global_phase();
}

void Circuit::append(const Circuit& other) {
    if (other.num_qubits() > num_qubits_) throw std::invalid_argument("appended circuit is wider");
    std::vector<int> id(other.num_qubits());
    for (int i = 0; i < other.num_qubits(); ++i) id[i] = i;
    append(other, id);
}

const Register& Circuit::add_register(std::string name, int first, int size) {
    if (size < 0 || first < 0 || first + size > num_qubits_) {
        throw std::out_of_range("register '" + name + "' exceeds circuit width");
    }
    for (const auto& r : registers_) {
        if (r.name == name) throw std::invalid_argument("duplicate register '" + name + "'");
        if (first < r.first + r.size && r.first < first + size) {
            throw std::invalid_argument("register '" + name + "' overlaps '" + r.name + "'");
        }
    }
    registers_.push_back({std::move(name), first, size});
    return registers_.back();
}

const Register& Circuit::reg(std::string_view name) const {
    for (const auto& r : registers_) {
        if (r.name == name) return r;
    }
    throw std::out_of_range("no register named '" + std::string(name) + "'");
}

bool Circuit::has_register(std::string_view name) const {
    return std::any_of(registers_.begin(), registers_.end(), [&](const Register& r) { return r.name == name; });
}

void Circuit::resize(int num_qubits) {
    check_qubit_count(num_qubits);
    if (num_qubits < num_qubits_) throw std::invalid_argument("resize cannot shrink a circuit");
    num_qubits_ = num_qubits;
}

namespace {

GateOp invert_gate(GateOp g) {
    switch (g.kind) {
        case GateKind::Ry: g.params[0] = -g.params[0]; break;
        case GateKind::U2:
            g = {GateKind::U3, g.targets, g.controls,
                 {-std::numbers::pi / 2, -g.params[1], -g.params[0]}, {}};
            break;
        case GateKind::U3: g.params = {-g.params[0], -g.params[2], -g.params[1]}; break;
        case GateKind::Permutation: {
            std::vector<std::uint64_t> inv(g.table.size());
            for (std::size_t v = 0; v < g.table.size(); ++v) inv[g.table[v]] = v;
            g.table = std::move(inv);
            break;
        }
        default: break;
    }
    return g;
}

}  // namespace

Circuit inverse(const Circuit& circuit) {
    Circuit out(circuit.num_qubits());
    for (const auto& r : circuit.registers()) out.add_register(r.name, r.first, r.size);
    for (auto it = circuit.gates().rbegin(); it != circuit.gates().rend(); ++it) out.add(invert_gate(*it));
    out.add_global_phase(-circuit.global_phase());
    return out;
}

Circuit controlled(const Circuit& circuit, int control) {
    Circuit out(circuit.num_qubits());
    for (const auto& r : circuit.registers()) out.add_register(r.name, r.first, r.size);
    if (circuit.global_phase() != 0.0) out.add(phase(circuit.global_phase(), control));
    for (const auto& g : circuit.gates()) out.add(with_control(g, control));
    return out;
}

// ---- application -----------------------------------------------------------

void apply_gate(QuantumState& state, const GateOp& gate) {
    std::vector<Complex> tmp;
    auto amps = state.mutable_amplitudes();
    const int n = state.num_qubits();
    for (int q : gate.targets) {
        if (q < 0 || q >= n) throw std::out_of_range("gate target out of range");
    }
    for (int q : gate.controls) {
        if (q < 0 || q >= n) throw std::out_of_range("gate control out of range");
    }
    switch (gate.kind) {
        case GateKind::Swap: {
            const std::uint64_t ba = std::uint64_t{1} << gate.targets[0];
            const std::uint64_t bb = std::uint64_t{1} << gate.targets[1];
            const std::uint64_t cmask = mask_of(gate.controls);
            for (std::uint64_t i = 0; i < amps.size(); ++i) {
                if ((i & ba) && !(i & bb) && (i & cmask) == cmask) std::swap(amps[i], amps[i ^ ba ^ bb]);
            }
            return;
        }
        case GateKind::Permutation: {
            tmp.assign(amps.begin(), amps.end());
            apply_permutation(tmp, gate);
            std::copy(tmp.begin(), tmp.end(), amps.begin());
            return;
        }
        default: break;
    }
    const int t = gate.targets[0];
    const std::uint64_t cmask = mask_of(gate.controls);
    const std::uint64_t tbit = std::uint64_t{1} << t;
    const std::uint64_t half = amps.size() / 2;
    auto pairs = [&](auto&& f) {
        for (std::uint64_t k = 0; k < half; ++k) {
            const std::uint64_t i0 = insert_zero(k, t);
            if ((i0 & cmask) != cmask) continue;
            f(i0, i0 | tbit);
        }
    };
    switch (gate.kind) {
        case GateKind::X: pairs([&](auto i0, auto i1) { std::swap(amps[i0], amps[i1]); }); return;
        case GateKind::Z: pairs([&](auto, auto i1) { amps[i1] = -amps[i1]; }); return;
        case GateKind::Ry: {
            const double c = std::cos(gate.params[0] / 2), s = std::sin(gate.params[0] / 2);
            pairs([&](auto i0, auto i1) {
                const Complex x0 = amps[i0], x1 = amps[i1];
                amps[i0] = c * x0 - s * x1;
                amps[i1] = s * x0 + c * x1;
            });
            return;
        }
        default: {
            const auto m = gate_matrix(gate);
            if (m[1] == Complex{} && m[2] == Complex{} && m[0] == Complex{1.0}) {
                const Complex d = m[3];
                pairs([&](auto, auto i1) { amps[i1] *= d; });
                return;
            }
            pairs([&](auto i0, auto i1) {
                const Complex x0 = amps[i0], x1 = amps[i1];
                amps[i0] = m[0] * x0 + m[1] * x1;
                amps[i1] = m[2] * x0 + m[3] * x1;
            });
        }
    }
}

void apply_in_place(QuantumState& state, const Circuit& circuit) {
    if (state.num_qubits() != circuit.num_qubits()) {
        throw std::invalid_argument("state has " + std::to_string(state.num_qubits()) + " qubits, circuit has " +
                                    std::to_string(circuit.num_qubits()));
    }
    for (const auto& g : circuit.gates()) apply_gate(state, g);
    if (circuit.global_phase() != 0.0) {
        const Complex f = std::polar(1.0, circuit.global_phase());
        for (auto& a : state.mutable_amplitudes()) a *= f;
    }
}

QuantumState apply_circuit(QuantumState state, const Circuit& circuit) {
    apply_in_place(state, circuit);
    return state;
}

// ---- measurement -----------------------------------------------------------

std::vector<double> measure_probabilities(const QuantumState& state, std::span<const int> qubits) {
    for (int q : qubits) {
        if (q < 0 || q >= state.num_qubits()) throw std::out_of_range("measured qubit out of range");
    }
    if (qubits.size() > 30) throw std::invalid_argument("too many measured qubits");
    {
        std::vector<int> sorted(qubits.begin(), qubits.end());
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw std::invalid_argument("measured qubits must be distinct");
        }
    }
    std::vector<double> p(std::size_t{1} << qubits.size(), 0.0);
    const auto amps = state.amplitudes();
    bool contiguous = true;
    for (std::size_t j = 0; j < qubits.size(); ++j) contiguous = contiguous && qubits[j] == qubits[0] + int(j);
    if (contiguous && !qubits.empty()) {
        const int shift = qubits[0];
        const std::uint64_t mask = p.size() - 1;
        for (std::uint64_t i = 0; i < amps.size(); ++i) p[(i >> shift) & mask] += std::norm(amps[i]);
        return p;
    }
    for (std::uint64_t i = 0; i < amps.size(); ++i) {
        std::uint64_t k = 0;
        for (std::size_t j = 0; j < qubits.size(); ++j) k |= ((i >> qubits[j]) & 1) << j;
        p[k] += std::norm(amps[i]);
    }
    return p;
}

std::string CountsMap::bitstring(std::uint64_t key) const {
    std::string s(qubits.size(), '0');
    for (std::size_t j = 0; j < qubits.size(); ++j) {
        if ((key >> j) & 1) s[qubits.size() - 1 - j] = '1';
    }
    return s;
}

CountsMap sample_from_probabilities(std::span<const double> probabilities, std::vector<int> qubits,
                                    std::uint64_t shots, std::uint64_t seed) {
    if (probabilities.empty()) throw std::invalid_argument("empty distribution");
    if (shots == 0) throw std::invalid_argument("shots must be >= 1");
    std::vector<double> cdf(probabilities.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        if (!(probabilities[i] >= 0.0)) throw std::invalid_argument("negative probability");
        acc += probabilities[i];
        cdf[i] = acc;
    }
    if (!(acc > 0.0)) throw std::invalid_argument("distribution has zero mass");
    CountsMap out;
    out.qubits = std::move(qubits);
    out.shots = shots;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, acc);
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double r = u(rng);
        auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
        std::size_t k = std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1);
        while (probabilities[k] == 0.0 && k > 0) --k;  // guards r landing exactly on a flat step
        ++out.counts[k];
    }
    return out;
}

CountsMap sample_counts(const QuantumState& state, std::span<const int> qubits, std::uint64_t shots,
                        std::uint64_t seed) {
    const auto p = measure_probabilities(state, qubits);
    return sample_from_probabilities(p, std::vector<int>(qubits.begin(), qubits.end()), shots, seed);
}

void dump_state(std::ostream& out, const QuantumState& state) {
    char buf[96];
    const auto amps = state.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu\t%.17g\t%.17g\n", i, amps[i].real(), amps[i].imag());
        out << buf;
    }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace qrisk::qsim
