#pragma once

// Dense statevector simulator.
//
// Basis index i has qubit 0 as its least-significant bit; every module in
// the library shares this convention.

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qrisk::qsim {

using Complex = std::complex<double>;

class QuantumState {
  public:
    /// |0...0> on `num_qubits` qubits.
    explicit QuantumState(int num_qubits);

    static QuantumState basis(int num_qubits, std::uint64_t index);

    /// Takes ownership of an amplitude vector. Throws std::invalid_argument if
    /// the length is not a power of two or the norm differs from 1 by more than
    /// 1e-10.
    static QuantumState from_amplitudes(std::vector<Complex> amplitudes);

    int num_qubits() const { return num_qubits_; }
    std::size_t size() const { return amplitudes_.size(); }
    std::span<const Complex> amplitudes() const { return amplitudes_; }
    std::span<Complex> mutable_amplitudes() { return amplitudes_; }
    const Complex& operator[](std::size_t i) const { return amplitudes_[i]; }

    double norm_squared() const;

  private:
    QuantumState(int num_qubits, std::vector<Complex> amplitudes);

    int num_qubits_;
    std::vector<Complex> amplitudes_;
};

enum class GateKind { H, X, Z, Ry, U2, U3, Swap, Permutation };

std::string_view gate_name(GateKind kind);

/// One gate. Any kind may carry controls; a CNOT is an X with one control and
/// an MCRy is an Ry with one or more controls.
struct GateOp {
    GateKind kind = GateKind::X;
    std::vector<int> targets;
    std::vector<int> controls;
    std::vector<double> params;
    /// Permutation only: entry t is the image of target-register value t.
    std::vector<std::uint64_t> table;

    bool operator==(const GateOp&) const = default;
};

GateOp h(int target);
GateOp x(int target);
GateOp z(int target);
GateOp ry(double theta, int target);
GateOp u2(double phi, double lambda, int target);
GateOp u3(double theta, double phi, double lambda, int target);
/// diag(1, e^{i lambda}), i.e. U3(0, 0, lambda).
GateOp phase(double lambda, int target);
GateOp cnot(int control, int target);
GateOp swap(int a, int b);
GateOp mcry(double theta, std::vector<int> controls, int target);
GateOp mcz(std::vector<int> controls, int target);
GateOp permutation(std::vector<int> targets, std::vector<std::uint64_t> table);

/// Adds `control` to the gate's control list.
GateOp with_control(GateOp gate, int control);

/// The 2x2 matrix of a single-qubit gate kind, row-major.
std::array<Complex, 4> gate_matrix(const GateOp& gate);

bool is_cnot(const GateOp& gate);

struct Register {
    std::string name;
    int first = 0;
    int size = 0;

    int operator[](int i) const { return first + i; }
    std::vector<int> qubits() const;
};

/// Ordered gate list over `num_qubits` qubits plus named, disjoint registers.
/// A scalar global phase is carried so that controlled copies of the circuit
/// stay exact.
class Circuit {
  public:
    explicit Circuit(int num_qubits = 0);

    int num_qubits() const { return num_qubits_; }
    const std::vector<GateOp>& gates() const { return gates_; }
    std::size_t size() const { return gates_.size(); }
    double global_phase() const { return global_phase_; }
    const std::vector<Register>& registers() const { return registers_; }

    /// Validates indices and, for permutations, bijectivity.
    /// Index errors throw std::out_of_range, the rest std::invalid_argument.
    void add(GateOp gate);

    /// Appends `other`, mapping its qubit q to `qubit_map[q]`.
    void append(const Circuit& other, std::span<const int> qubit_map);
    /// Appends `other` acting on the same qubit indices.
    void append(const Circuit& other);

    void add_global_phase(double phi) { global_phase_ += phi; }

    /// Declares a register; it must be disjoint from existing ones.
    const Register& add_register(std::string name, int first, int size);
    const Register& reg(std::string_view name) const;
    bool has_register(std::string_view name) const;

    /// Grows the qubit count; existing gates are unaffected.
    void resize(int num_qubits);

  private:
    int num_qubits_;
    double global_phase_ = 0.0;
    std::vector<GateOp> gates_;
    std::vector<Register> registers_;
};

/// Returns the inverse circuit (reversed order, each gate inverted).
Circuit inverse(const Circuit& circuit);

/// Every gate gains `control`; the global phase becomes a phase gate on it.
Circuit controlled(const Circuit& circuit, int control);

void apply_gate(QuantumState& state, const GateOp& gate);
void apply_in_place(QuantumState& state, const Circuit& circuit);
QuantumState apply_circuit(QuantumState state, const Circuit& circuit);

/// Marginal Born-rule distribution over `qubits`. Entry k of the result has
/// bit j set iff qubits[j] was measured as 1.
std::vector<double> measure_probabilities(const QuantumState& state, std::span<const int> qubits);

struct CountsMap {
    std::vector<int> qubits;
    std::map<std::uint64_t, std::uint64_t> counts;
    std::uint64_t shots = 0;

    /// Bitstring for an outcome key, qubits.back() leftmost.
    std::string bitstring(std::uint64_t key) const;
};

CountsMap sample_counts(const QuantumState& state, std::span<const int> qubits,
                        std::uint64_t shots, std::uint64_t seed);
CountsMap sample_from_probabilities(std::span<const double> probabilities,
                                    std::vector<int> qubits, std::uint64_t shots,
                                    std::uint64_t seed);

/// Writes `index<TAB>re<TAB>im` lines, indices ascending.
void dump_state(std::ostream& out, const QuantumState& state);

/// Amplitude damping after every CNOT plus a ZZ cross-talk term in the CNOT
/// generator.
struct NoiseModel {
    double gamma = 0.0;       // relaxation rate, 1/ns
    double t_cnot = 100.0;    // ns
    double crosstalk = 0.0;   // alpha in exp{-i pi (ZX + alpha ZZ) / 4}
    int trajectories = 1000;
    std::uint64_t seed = 0;

    /// 1 - exp(-gamma * t_cnot).
    double relaxation_probability() const;
    void validate() const;
};

/// Target-qubit matrices of the cross-talk CNOT for control value 0 and 1:
///   (S^dag_c (x) Rx(-pi/2)_t) * exp{-i pi (Z_c X_t + alpha Z_c Z_t) / 4}.
/// The local frame is fixed so that alpha = 0 gives exactly CNOT.
std::array<std::array<Complex, 4>, 2> crosstalk_cnot_blocks(double alpha);

struct NoisyResult {
    std::vector<double> probabilities;
    /// Per-outcome standard error of the trajectory mean (zero when the run
    /// is deterministic).
    std::vector<double> standard_errors;
    int trajectories_run = 0;
};

/// Trajectory-averaged outcome distribution. Accepts only uncontrolled
/// single-qubit gates and CNOTs (decompose first); single-qubit gates are
/// noiseless and instantaneous.
NoisyResult run_noisy(const Circuit& circuit, const NoiseModel& noise, std::span<const int> measured);

/// Deterministic per-stream seed derivation (SplitMix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace qrisk::qsim
