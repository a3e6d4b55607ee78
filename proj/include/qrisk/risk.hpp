#pragma once

// Risk measures from amplitude estimation, with the exact enumeration oracle
// and the Monte Carlo baseline used to judge them.
//
// Orientation: low indices are the adverse tail. VaR is the smallest index l
// with P[X <= l] >= 1 - alpha; CVaR is the mean value over {0..l}. Values must
// be non-decreasing in the index for VaR/CVaR (sort the distribution first).

#include <cstdint>
#include <string>
#include <vector>

#include "qrisk/ae.hpp"
#include "qrisk/approx.hpp"
#include "qrisk/circuits.hpp"

namespace qrisk::risk {

using circuits::BitPolynomial;
using circuits::DiscreteDistribution;

struct AESettings {
    int m = 5;
    std::uint64_t shots = 8192;
    std::uint64_t seed = 0;
    ae::Route route = ae::Route::WorkRegister;
};

struct Estimate {
    double value = 0.0;
    /// Worst-case error at the AE confidence level (>= 8/pi^2).
    double bound = 0.0;
    ae::AEResult ae;
};

/// Operator A = objective rotation after distribution loading. When the state
/// is one qubit and f is the identity on {0, 1}, A is the bare loading rotation
/// and the probability of |1> is E[f] itself.
circuits::AEProblem expectation_problem(const DiscreteDistribution& dist, const BitPolynomial& f,
                                        const approx::ApproxParams& params, int m);

/// E[f(X)] for f with range in [0, 1]. Un-maps a = c (E - 1/2) + 1/2.
Estimate estimate_expectation(const DiscreteDistribution& dist, const BitPolynomial& f,
                              const approx::ApproxParams& params, const AESettings& s);

/// Scaling that balances the AE term against the sin^2 bias of the second moment.
double default_variance_scaling(int m);

struct VarianceEstimate {
    Estimate variance;
    Estimate second_moment;
    Estimate expectation;
    double c = 0.0;
};

/// Var f(X) = E[f^2] - E[f]^2, E[f^2] from the angle 2 c f (probability sin^2(c f)).
/// `variance_c` <= 0 selects default_variance_scaling(m).
VarianceEstimate estimate_variance(const DiscreteDistribution& dist, const BitPolynomial& f,
                                   const approx::ApproxParams& params, const AESettings& s,
                                   double variance_c = 0.0);

/// A = loading + comparator(l); the flag is the objective.
circuits::AEProblem var_problem(const DiscreteDistribution& dist, std::uint64_t l, int m);

struct VarProbe {
    std::uint64_t l = 0;
    ae::AEResult ae;
};

struct VarEstimate {
    std::uint64_t index = 0;
    double value = 0.0;
    /// Estimated P[X <= index]; 1 when index = N-1 was never probed.
    double probability = 1.0;
    /// Error of `probability` in probability units.
    double bound = 0.0;
    /// Some probe's interval straddled 1 - alpha.
    bool low_confidence = false;
    std::vector<VarProbe> probes;
};

/// Bisection over l with at most n probes.
VarEstimate estimate_var(const DiscreteDistribution& dist, double alpha, const AESettings& s);

/// f_l(i) = (v_i - v_0) / (v_l - v_0) on {0..l}, clamped into [0, 1] elsewhere.
BitPolynomial cvar_weights(const DiscreteDistribution& dist, std::uint64_t l);

circuits::AEProblem cvar_problem(const DiscreteDistribution& dist, std::uint64_t l,
                                 const approx::ApproxParams& params, int m);

struct CvarEstimate {
    /// In value units.
    double value = 0.0;
    /// Index-scale CVaR, in [0, l].
    double index_value = 0.0;
    /// First-order ratio bound in value units, including 1/c and the Taylor bias.
    double bound = 0.0;
    bool fast_path = false;
    Estimate tail;  // A = sum_{i<=l} p_i f_l(i)
};

/// Reuses the VaR level and its probability estimate.
CvarEstimate estimate_cvar(const DiscreteDistribution& dist, const VarEstimate& var,
                           const approx::ApproxParams& params, const AESettings& s);

/// (VaR + CVaR) / (1 - alpha) * pi / M, index-scale quantities.
double cvar_error_bound(double var_value, double cvar_value, double alpha, std::uint64_t M);

enum class Method { Quantum, Oracle, MonteCarlo };
std::string method_name(Method m);

struct RiskReport {
    Method method = Method::Oracle;
    double alpha = 0.95;
    /// Of f(X), objective units.
    double expectation = 0.0;
    double variance = 0.0;
    std::uint64_t var_index = 0;
    double var_value = 0.0;
    double var_probability = 0.0;
    double cvar = 0.0;
    double cvar_index = 0.0;
    struct {
        double expectation = 0.0, variance = 0.0, var = 0.0, cvar = 0.0;
    } bounds;
    bool low_confidence = false;
    // Settings of the run; zero for the oracle.
    int m = 0;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
    double c = 0.0;
    int u = 0;
};

RiskReport classical_oracle(const DiscreteDistribution& dist, const BitPolynomial& f, double alpha);

/// All four measures; seeds of the individual AE runs derive from s.seed.
RiskReport quantum_risk(const DiscreteDistribution& dist, const BitPolynomial& f, double alpha,
                        const approx::ApproxParams& params, const AESettings& s);

struct MonteCarloResult {
    double estimate = 0.0;
    /// 1.96 * exact sd / sqrt(samples).
    double half_width = 0.0;
    std::uint64_t samples = 0;
};

MonteCarloResult monte_carlo_baseline(const DiscreteDistribution& dist, const BitPolynomial& f,
                                      std::uint64_t samples, std::uint64_t seed);

/// All four measures from the empirical law of `samples` draws; the
/// expectation bound is the 1.96 sigma half-width of the sample mean.
RiskReport monte_carlo_risk(const DiscreteDistribution& dist, const BitPolynomial& f, double alpha,
                            std::uint64_t samples, std::uint64_t seed);

struct ConvergenceRow {
    int m = 0;
    std::uint64_t M = 0;
    double c = 0.0;
    /// Median over trials of (interval half-width + Taylor bias) / c.
    double quantum_error = 0.0;
    /// Median over trials of |estimate - E|.
    double quantum_actual_error = 0.0;
    double mc_half_width = 0.0;
    /// Median over trials of |MC mean - E| with M samples.
    double mc_error = 0.0;
};

struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;
    double quantum_slope = 0.0;
    double quantum_actual_slope = 0.0;
    double mc_slope = 0.0;
};

/// Per m, c is the optimal scaling for the error target matching M evaluations.
/// Each trial draws `shots_per_trial` outcomes of the exact AE law.
ConvergenceStudy convergence_study(const DiscreteDistribution& dist, const BitPolynomial& f, int u,
                                   const std::vector<int>& m_range, int trials, std::uint64_t seed,
                                   std::uint64_t shots_per_trial = 1);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct NoiseCell {
    double gamma = 0.0;
    double crosstalk = 0.0;
    /// Probability that the evaluation register reads an outcome whose estimate is `target`.
    double hit_probability = 0.0;
    /// Upper bound on the trajectory standard error of hit_probability.
    double standard_error = 0.0;
    int trajectories = 0;
};

/// Runs the decomposed full AE circuit of `problem` under `noise`.
NoiseCell noisy_hit_probability(const circuits::AEProblem& problem, double target, const qsim::NoiseModel& noise);

/// Gamma axis at zero cross-talk, then the cross-talk axis at zero gamma (the
/// shared origin once). Each cell gets its own derived seed.
std::vector<NoiseCell> noise_sweep(const circuits::AEProblem& problem, double target,
                                   const std::vector<double>& gammas, const std::vector<double>& crosstalks,
                                   const qsim::NoiseModel& base);

struct GateCountRow {
    int m = 0;
    std::uint64_t cnots = 0;
    std::uint64_t single_qubit = 0;
    int qubits = 0;
    /// cnots over the previous row's, 0 for the first.
    double ratio = 0.0;
};

/// CNOT counts of the decomposed VaR circuit (loading + comparator at l) per m.
std::vector<GateCountRow> var_gate_counts(const DiscreteDistribution& dist, std::uint64_t l,
                                          const std::vector<int>& m_range);

}  // namespace qrisk::risk
