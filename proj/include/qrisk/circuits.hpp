#pragma once

// Circuit building blocks: distribution loading, polynomial rotations,
// comparator, Grover operator, QFT, amplitude-estimation assembly, gate-level
// decomposition and CNOT accounting, text serialization.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qrisk/approx.hpp"
#include "qrisk/qsim.hpp"

namespace qrisk::circuits {

using qsim::Circuit;

/// Probabilities on {0..2^n - 1} plus the physical value of each index.
/// Values come either from an affine grid (slope * i + offset) or a table.
class DiscreteDistribution {
  public:
    DiscreteDistribution(std::vector<double> probs, double slope = 1.0, double offset = 0.0);

    static DiscreteDistribution with_values(std::vector<double> probs, std::vector<double> values);

    /// Joint law of independent `low` and `high`; index = low_index + 2^{n_low} * high_index.
    /// Values are low.value + high.value unless `values` is given.
    static DiscreteDistribution product(const DiscreteDistribution& low, const DiscreteDistribution& high,
                                        std::optional<std::vector<double>> values = std::nullopt);

    int num_qubits() const { return n_; }
    std::size_t size() const { return probs_.size(); }
    const std::vector<double>& probs() const { return probs_; }
    double prob(std::size_t i) const { return probs_.at(i); }
    double value(std::size_t i) const;
    std::vector<double> values() const;
    bool is_affine() const { return table_.empty(); }
    double slope() const { return slope_; }
    double offset() const { return offset_; }

    /// Factors of a product distribution, low bits first; empty otherwise.
    const std::vector<DiscreteDistribution>& factors() const { return factors_; }

    /// Same law relabelled so that values are non-decreasing in the index.
    /// `order[k]` is the original index now at position k. Ties keep index order.
    DiscreteDistribution sorted_by_value(std::vector<std::size_t>* order = nullptr) const;

  private:
    DiscreteDistribution() = default;

    int n_ = 0;
    std::vector<double> probs_;
    double slope_ = 1.0;
    double offset_ = 0.0;
    std::vector<double> table_;
    std::vector<DiscreteDistribution> factors_;
};

/// Multilinear polynomial in bits q_0..q_{n-1}: sum over masks of coef * prod_{j in mask} q_j.
/// Because q_j^2 = q_j, any polynomial in x = sum 2^j q_j has this form.
class BitPolynomial {
  public:
    BitPolynomial() = default;
    explicit BitPolynomial(int num_bits) : n_(num_bits) {}

    static BitPolynomial constant(int num_bits, double v);
    /// c0 + sum_j w[j] q_j.
    static BitPolynomial affine(double c0, const std::vector<double>& w);
    /// The polynomial p(x) with x = sum_j 2^j q_j.
    static BitPolynomial from_polynomial(const approx::Polynomial& p, int num_bits);
    /// Exact interpolation of an arbitrary table of 2^n values (Moebius transform).
    static BitPolynomial from_table(const std::vector<double>& values);

    int num_bits() const { return n_; }
    const std::map<std::uint64_t, double>& terms() const { return terms_; }
    double coeff(std::uint64_t mask) const;
    double operator()(std::uint64_t x) const;
    std::vector<double> table() const;

    /// Drops monomials with |coef| <= tol.
    BitPolynomial pruned(double tol) const;

    friend BitPolynomial operator+(const BitPolynomial& a, const BitPolynomial& b);
    friend BitPolynomial operator*(const BitPolynomial& a, const BitPolynomial& b);
    friend BitPolynomial operator*(double s, const BitPolynomial& a);

  private:
    void add_term(std::uint64_t mask, double coef);

    int n_ = 0;
    std::map<std::uint64_t, double> terms_;
};

/// p(f) as a bit polynomial.
BitPolynomial compose(const BitPolynomial& f, const approx::Polynomial& p);

/// Loads sqrt(p_i) onto qubits 0..n-1 (register "state") with a uniformly
/// controlled Ry tree, most significant qubit first. Product distributions load
/// each factor on its own qubits.
Circuit prepare_distribution(const DiscreteDistribution& dist);

/// Appends gates mapping |x>|0> to |x>(cos(p(x)/2)|0> + sin(p(x)/2)|1>), one
/// (multi-)controlled Ry per monomial of `angle`. Bit j of x lives on state[j];
/// every gate additionally carries `extra_controls`.
void add_polynomial_rotation(Circuit& circuit, const BitPolynomial& angle, const std::vector<int>& state,
                             int target, const std::vector<int>& extra_controls = {});

/// Stand-alone rotation circuit: state on qubits 0..n-1, target qubit n.
Circuit polynomial_rotation(const approx::Polynomial& p, int n);

/// Angle polynomial 2 c p_u(f) + pi/2, whose |1>-probability approximates c (f - 1/2) + 1/2.
BitPolynomial objective_angle(const BitPolynomial& f, const approx::ApproxParams& params);

/// Angle 2 c f, whose |1>-probability is sin^2(c f) ~ c^2 f^2.
BitPolynomial variance_angle(const BitPolynomial& f, double c);

/// Checks that f maps every index in [0, up_to] into [0, 1].
void check_unit_range(const BitPolynomial& f, std::uint64_t up_to);

/// Objective rotation on a fresh layout: state 0..n-1, objective n.
Circuit objective_operator(const BitPolynomial& f, const approx::ApproxParams& params);
Circuit objective_operator(const approx::Polynomial& f, int n, const approx::ApproxParams& params);

/// Appends the comparator flag ^= [x <= l] for x on `state`, using
/// `ancillas` (at least n-1 qubits, returned to |0>).
void add_comparator(Circuit& circuit, std::uint64_t l, const std::vector<int>& state, int flag,
                    const std::vector<int>& ancillas);

/// Stand-alone comparator: state 0..n-1, flag n, ancillas n+1..2n-1.
Circuit comparator(std::uint64_t l, int n);

/// Comparator flag controlling the objective rotation for f on {0..l}.
/// Layout: state 0..n-1, flag n, objective n+1, ancillas n+2..2n.
Circuit cvar_objective(std::uint64_t l, const BitPolynomial& f, const approx::ApproxParams& params);
/// f(i) = i / l.
Circuit cvar_objective(std::uint64_t l, int n, const approx::ApproxParams& params);

struct AEProblem {
    /// The operator A. Qubits in a register named "ancilla" must be returned
    /// to |0> by A; they are left out of the zero-state reflection.
    Circuit a;
    int objective = 0;
    int m = 1;
    /// Set when A is exactly Ry(theta) on a lone qubit; then Q^k = Ry(2 k theta).
    std::optional<double> bare_rotation;

    void validate() const;
    /// Qubits reflected about |0>: every qubit outside the "ancilla" register.
    std::vector<int> reflect_qubits() const;
};

/// Q = A S_0 A^dag S_psi with S_psi = -Z on the objective.
Circuit grover_operator(const AEProblem& problem);

/// Controlled Q^power on a circuit of `width` qubits whose first qubits hold A.
/// Only the reflections carry the control.
Circuit controlled_grover_power(const AEProblem& problem, std::uint64_t power, int control, int width);

Circuit qft(int m);
Circuit inverse_qft(int m);

/// A's qubits first, then the evaluation register (m qubits, "evaluation").
Circuit amplitude_estimation_circuit(const AEProblem& problem);

/// Rewrites into single-qubit gates and CNOTs. Multi-controlled gates use
/// Toffoli V-chains on ancillas appended after the circuit's qubits
/// (register "decomposition_ancilla").
Circuit decompose(const Circuit& circuit);

struct ResourceReport {
    /// Gates of the input circuit, keyed like "RY", "CRY", "CCX", "C5Z".
    std::map<std::string, std::uint64_t> gate_counts;
    std::uint64_t cnot_total = 0;
    std::uint64_t single_qubit_total = 0;
    int ancillas = 0;
};

ResourceReport cnot_count(const Circuit& circuit);

/// Line-oriented text form. Grammar:
///   qubits N
///   phase PHI
///   register NAME FIRST SIZE        (zero or more)
///   KIND t... ; c... ; p...         (one per gate; PERM lists its table as params)
std::string to_text(const Circuit& circuit);
Circuit from_text(std::string_view text);

}  // namespace qrisk::circuits
