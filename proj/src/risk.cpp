#include "qrisk/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

namespace qrisk::risk {

using qsim::Circuit;

namespace {

void check_bits(const DiscreteDistribution& dist, const BitPolynomial& f) {
    if (f.num_bits() != dist.num_qubits()) {
        throw std::invalid_argument("objective and distribution disagree on the number of state qubits");
    }
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
}

bool is_identity_bit(const DiscreteDistribution& dist, const BitPolynomial& f) {
    if (dist.num_qubits() != 1) return false;
    const auto t = f.table();
    return t[0] == 0.0 && t[1] == 1.0;
}

double unmap(double a, double c) { return std::clamp((a - 0.5) / c + 0.5, 0.0, 1.0); }

double median(std::vector<double> v) {
    const std::size_t k = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + k, v.end());
    const double hi = v[k];
    if (v.size() % 2 == 1) return hi;
    return 0.5 * (*std::max_element(v.begin(), v.begin() + k) + hi);
}

Circuit loaded(const DiscreteDistribution& dist, int width) {
    Circuit c(width);
    c.add_register("state", 0, dist.num_qubits());
    c.append(circuits::prepare_distribution(dist));
    return c;
}

void copy_registers(Circuit& into, const Circuit& from) {
    for (const auto& r : from.registers()) {
        if (!into.has_register(r.name)) into.add_register(r.name, r.first, r.size);
    }
}

}  // namespace

circuits::AEProblem expectation_problem(const DiscreteDistribution& dist, const BitPolynomial& f,
                                        const approx::ApproxParams& params, int m) {
    check_bits(dist, f);
    circuits::AEProblem pr;
    pr.m = m;
    if (is_identity_bit(dist, f)) {
        const double theta = 2.0 * std::asin(std::sqrt(dist.prob(1)));
        pr.a = Circuit(1);
        pr.a.add(qsim::ry(theta, 0));
        pr.objective = 0;
        pr.bare_rotation = theta;
        return pr;
    }
    const int n = dist.num_qubits();
    pr.a = loaded(dist, n + 1);
    const Circuit op = circuits::objective_operator(f, params);
    copy_registers(pr.a, op);
    pr.a.append(op);
    pr.objective = n;
    return pr;
}

Estimate estimate_expectation(const DiscreteDistribution& dist, const BitPolynomial& f,
                              const approx::ApproxParams& params, const AESettings& s) {
    const auto pr = expectation_problem(dist, f, params, s.m);
    Estimate e;
    e.ae = ae::run_ae(pr, s.shots, s.seed, s.route);
    if (pr.bare_rotation) {
        e.value = e.ae.estimate;
        e.bound = ae::standard_bound(s.m);
    } else {
        e.value = unmap(e.ae.estimate, params.c);
        e.bound = (ae::standard_bound(s.m) + approx::approx_error_bound(params)) / params.c;
    }
    return e;
}

double default_variance_scaling(int m) { return std::min(1.0, std::pow(3.0 * ae::standard_bound(m), 0.25)); }

VarianceEstimate estimate_variance(const DiscreteDistribution& dist, const BitPolynomial& f,
                                   const approx::ApproxParams& params, const AESettings& s, double variance_c) {
    check_bits(dist, f);
    circuits::check_unit_range(f, dist.size() - 1);
    VarianceEstimate out;
    out.c = variance_c > 0.0 ? variance_c : default_variance_scaling(s.m);
    if (out.c > 1.0) throw std::invalid_argument("variance scaling must lie in (0, 1]");
    out.expectation = estimate_expectation(dist, f, params, s);

    const int n = dist.num_qubits();
    circuits::AEProblem pr;
    pr.m = s.m;
    pr.a = loaded(dist, n + 1);
    pr.a.add_register("objective", n, 1);
    circuits::add_polynomial_rotation(pr.a, circuits::variance_angle(f, out.c), pr.a.reg("state").qubits(), n);
    pr.objective = n;
    AESettings s2 = s;
    s2.seed = qsim::derive_seed(s.seed, 1);
    auto& sm = out.second_moment;
    sm.ae = ae::run_ae(pr, s2.shots, s2.seed, s2.route);
    const double c2 = out.c * out.c;
    // x^2 - x^4/3 <= sin^2 x <= x^2
    sm.value = std::clamp(sm.ae.estimate / c2, 0.0, 1.0);
    sm.bound = ae::standard_bound(s.m) / c2 + c2 / 3.0;

    const double e = out.expectation.value, be = out.expectation.bound;
    out.variance.value = std::clamp(sm.value - e * e, 0.0, 0.25);
    out.variance.bound = sm.bound + 2.0 * be + be * be;
    out.variance.ae = sm.ae;
    return out;
}

circuits::AEProblem var_problem(const DiscreteDistribution& dist, std::uint64_t l, int m) {
    const int n = dist.num_qubits();
    circuits::AEProblem pr;
    pr.m = m;
    pr.a = loaded(dist, 2 * n);
    const Circuit cmp = circuits::comparator(l, n);
    copy_registers(pr.a, cmp);
    pr.a.append(cmp);
    pr.objective = n;
    return pr;
}

VarEstimate estimate_var(const DiscreteDistribution& dist, double alpha, const AESettings& s) {
    check_alpha(alpha);
    const double level = 1.0 - alpha;
    VarEstimate out;
    std::uint64_t lo = 0, hi = dist.size() - 1;
    while (lo < hi) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        VarProbe probe;
        probe.l = mid;
        probe.ae = ae::run_ae(var_problem(dist, mid, s.m), s.shots, qsim::derive_seed(s.seed, out.probes.size()),
                              s.route);
        if (probe.ae.interval.low < level && level < probe.ae.interval.high) out.low_confidence = true;
        if (probe.ae.estimate >= level - 1e-12) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
        out.probes.push_back(std::move(probe));
    }
    out.index = lo;
    out.value = dist.value(lo);
    out.probability = 1.0;
    out.bound = 0.0;
    for (const auto& p : out.probes) {
        if (p.l == lo) {
            out.probability = p.ae.estimate;
            out.bound = ae::standard_bound(s.m);
        }
    }
    return out;
}

BitPolynomial cvar_weights(const DiscreteDistribution& dist, std::uint64_t l) {
    const double v0 = dist.value(0), span = dist.value(l) - v0;
    std::vector<double> t(dist.size(), 0.0);
    if (span > 0.0) {
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::clamp((dist.value(i) - v0) / span, 0.0, 1.0);
    }
    return BitPolynomial::from_table(t).pruned(1e-14);
}

circuits::AEProblem cvar_problem(const DiscreteDistribution& dist, std::uint64_t l,
                                 const approx::ApproxParams& params, int m) {
    const int n = dist.num_qubits();
    circuits::AEProblem pr;
    pr.m = m;
    pr.a = loaded(dist, 2 * n + 1);
    const Circuit obj = circuits::cvar_objective(l, cvar_weights(dist, l), params);
    copy_registers(pr.a, obj);
    pr.a.append(obj);
    pr.objective = n + 1;
    return pr;
}

CvarEstimate estimate_cvar(const DiscreteDistribution& dist, const VarEstimate& var,
                           const approx::ApproxParams& params, const AESettings& s) {
    params.validate();
    const std::uint64_t l = var.index;
    const double v0 = dist.value(0), span = dist.value(l) - v0;
    CvarEstimate out;
    if (l == 0 || span == 0.0) {
        out.value = v0;
        out.fast_path = true;
        return out;
    }
    const double p_hat = var.probability;
    if (!(p_hat > 0.0)) throw std::domain_error("CVaR undefined: estimated P[X <= VaR] is zero");
    const double c = params.c;
    out.tail.ae = ae::run_ae(cvar_problem(dist, l, params, s.m), s.shots, s.seed, s.route);
    // P(objective) ~ c A + (1 - c)/2 P
    const double a_hat = (out.tail.ae.estimate - 0.5 * (1.0 - c) * p_hat) / c;
    const double ratio = std::clamp(a_hat / p_hat, 0.0, 1.0);
    out.tail.value = a_hat;
    out.tail.bound = (ae::standard_bound(s.m) + approx::approx_error_bound(params)) / c +
                     0.5 * (1.0 - c) / c * var.bound;
    out.value = v0 + span * ratio;
    out.index_value = static_cast<double>(l) * ratio;
    out.bound = span * (out.tail.bound + ratio * var.bound) / p_hat;
    return out;
}

double cvar_error_bound(double var_value, double cvar_value, double alpha, std::uint64_t M) {
    if (!(alpha < 1.0)) throw std::invalid_argument("alpha must be < 1");
    if (M < 1) throw std::invalid_argument("M must be >= 1");
    return (var_value + cvar_value) / (1.0 - alpha) * std::numbers::pi / static_cast<double>(M);
}

std::string method_name(Method m) {
    switch (m) {
        case Method::Quantum: return "quantum";
        case Method::Oracle: return "oracle";
        case Method::MonteCarlo: return "monte_carlo";
    }
    return "unknown";
}

RiskReport classical_oracle(const DiscreteDistribution& dist, const BitPolynomial& f, double alpha) {
    check_alpha(alpha);
    check_bits(dist, f);
    RiskReport r;
    r.method = Method::Oracle;
    r.alpha = alpha;
    const auto t = f.table();
    double e = 0.0, e2 = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        e += dist.prob(i) * t[i];
        e2 += dist.prob(i) * t[i] * t[i];
    }
    r.expectation = e;
    r.variance = std::max(0.0, e2 - e * e);

    double cum = 0.0;
    std::size_t l = dist.size() - 1;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        cum += dist.prob(i);
        if (cum >= 1.0 - alpha - 1e-12) {
            l = i;
            break;
        }
    }
    double mass = 0.0, sv = 0.0, si = 0.0;
    for (std::size_t i = 0; i <= l; ++i) {
        mass += dist.prob(i);
        sv += dist.prob(i) * dist.value(i);
        si += dist.prob(i) * static_cast<double>(i);
    }
    r.var_index = l;
    r.var_value = dist.value(l);
    r.var_probability = mass;
    r.cvar = sv / mass;
    r.cvar_index = si / mass;
    return r;
}

RiskReport quantum_risk(const DiscreteDistribution& dist, const BitPolynomial& f, double alpha,
                        const approx::ApproxParams& params, const AESettings& s) {
    RiskReport r;
    r.method = Method::Quantum;
    r.alpha = alpha;
    r.m = s.m;
    r.shots = s.shots;
    r.seed = s.seed;
    r.c = params.c;
    r.u = params.u;

    const auto v = estimate_variance(dist, f, params, s);
    r.expectation = v.expectation.value;
    r.bounds.expectation = v.expectation.bound;
    r.variance = v.variance.value;
    r.bounds.variance = v.variance.bound;

    AESettings sv = s;
    sv.seed = qsim::derive_seed(s.seed, 2);
    const auto var = estimate_var(dist, alpha, sv);
    r.var_index = var.index;
    r.var_value = var.value;
    r.var_probability = var.probability;
    r.bounds.var = var.bound;
    r.low_confidence = var.low_confidence;

    AESettings sc = s;
    sc.seed = qsim::derive_seed(s.seed, 3);
    const auto cv = estimate_cvar(dist, var, params, sc);
    r.cvar = cv.value;
    r.cvar_index = cv.index_value;
    r.bounds.cvar = cv.bound;
    return r;
}

MonteCarloResult monte_carlo_baseline(const DiscreteDistribution& dist, const BitPolynomial& f,
                                      std::uint64_t samples, std::uint64_t seed) {
    check_bits(dist, f);
    if (samples == 0) throw std::invalid_argument("samples must be >= 1");
    const auto t = f.table();
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> pick(dist.probs().begin(), dist.probs().end());
    double sum = 0.0;
    for (std::uint64_t k = 0; k < samples; ++k) sum += t[pick(rng)];
    double e = 0.0, e2 = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        e += dist.prob(i) * t[i];
        e2 += dist.prob(i) * t[i] * t[i];
    }
    MonteCarloResult r;
    r.samples = samples;
    r.estimate = sum / static_cast<double>(samples);
    r.half_width = 1.96 * std::sqrt(std::max(0.0, e2 - e * e)) / std::sqrt(static_cast<double>(samples));
    return r;
}

RiskReport monte_carlo_risk(const DiscreteDistribution& dist, const BitPolynomial& f, double alpha,
                            std::uint64_t samples, std::uint64_t seed) {
    check_alpha(alpha);
    check_bits(dist, f);
    if (samples == 0) throw std::invalid_argument("samples must be >= 1");
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> pick(dist.probs().begin(), dist.probs().end());
    std::vector<double> freq(dist.size(), 0.0);
    for (std::uint64_t k = 0; k < samples; ++k) freq[pick(rng)] += 1.0;
    for (auto& x : freq) x /= static_cast<double>(samples);
    auto r = classical_oracle(DiscreteDistribution::with_values(freq, dist.values()), f, alpha);
    r.method = Method::MonteCarlo;
    r.shots = samples;
    r.seed = seed;
    r.bounds.expectation = 1.96 * std::sqrt(r.variance / static_cast<double>(samples));
    return r;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs two or more points");
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

ConvergenceStudy convergence_study(const DiscreteDistribution& dist, const BitPolynomial& f, int u,
                                   const std::vector<int>& m_range, int trials, std::uint64_t seed,
                                   std::uint64_t shots_per_trial) {
    if (m_range.empty()) throw std::invalid_argument("empty m range");
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    const auto t = f.table();
    double exact = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) exact += dist.prob(i) * t[i];

    ConvergenceStudy out;
    std::vector<double> Ms, q, qa, mc;
    for (int m : m_range) {
        ConvergenceRow row;
        row.m = m;
        row.M = std::uint64_t{1} << m;
        const double M = static_cast<double>(row.M);
        const auto scaling = approx::optimal_scaling(approx::target_error_for_evaluations(M, u), u);
        const approx::ApproxParams params{scaling.c, u, 1};
        const auto pr = expectation_problem(dist, f, params, m);
        const bool bare = pr.bare_rotation.has_value();
        row.c = bare ? 1.0 : params.c;
        const double bias = bare ? 0.0 : approx::approx_error_bound(params);
        const auto law = ae::outcome_distribution(pr);
        std::vector<int> eval(m);
        std::iota(eval.begin(), eval.end(), pr.a.num_qubits());

        std::vector<double> err(trials), actual(trials), mc_err(trials);
        const std::uint64_t qseed = qsim::derive_seed(seed, 2 * static_cast<std::uint64_t>(m));
        const std::uint64_t mseed = qsim::derive_seed(seed, 2 * static_cast<std::uint64_t>(m) + 1);
        for (int k = 0; k < trials; ++k) {
            const auto counts = qsim::sample_from_probabilities(law, eval, shots_per_trial, qsim::derive_seed(qseed, k));
            const auto r = ae::estimate_from_counts(counts, m);
            err[k] = (r.half_width + bias) / row.c;
            actual[k] = std::abs((bare ? r.estimate : unmap(r.estimate, row.c)) - exact);
            mc_err[k] = std::abs(monte_carlo_baseline(dist, f, row.M, qsim::derive_seed(mseed, k)).estimate - exact);
        }
        row.quantum_error = median(err);
        row.quantum_actual_error = median(actual);
        row.mc_error = median(mc_err);
        row.mc_half_width = monte_carlo_baseline(dist, f, row.M, 0).half_width;
        Ms.push_back(M);
        q.push_back(row.quantum_error);
        qa.push_back(std::max(row.quantum_actual_error, 1e-300));
        mc.push_back(std::max(row.mc_error, 1e-300));
        out.rows.push_back(row);
    }
    if (Ms.size() >= 2) {
        out.quantum_slope = loglog_slope(Ms, q);
        out.quantum_actual_slope = loglog_slope(Ms, qa);
        out.mc_slope = loglog_slope(Ms, mc);
    }
    return out;
}

NoiseCell noisy_hit_probability(const circuits::AEProblem& problem, double target, const qsim::NoiseModel& noise) {
    const auto raw = circuits::amplitude_estimation_circuit(problem);
    const auto circuit = circuits::decompose(raw);
    const auto eval = raw.reg("evaluation").qubits();
    const auto r = qsim::run_noisy(circuit, noise, eval);
    NoiseCell cell;
    cell.gamma = noise.gamma;
    cell.crosstalk = noise.crosstalk;
    cell.trajectories = r.trajectories_run;
    for (std::uint64_t y = 0; y < r.probabilities.size(); ++y) {
        if (std::abs(ae::estimate_of(y, problem.m) - target) > 1e-9) continue;
        cell.hit_probability += r.probabilities[y];
        // Outcome errors are correlated; their sum bounds the error of the total.
        cell.standard_error += r.standard_errors[y];
    }
    cell.hit_probability = std::min(1.0, cell.hit_probability);
    return cell;
}

std::vector<NoiseCell> noise_sweep(const circuits::AEProblem& problem, double target,
                                   const std::vector<double>& gammas, const std::vector<double>& crosstalks,
                                   const qsim::NoiseModel& base) {
    std::vector<std::pair<double, double>> grid;
    for (double g : gammas) grid.emplace_back(g, 0.0);
    for (double a : crosstalks) {
        if (a == 0.0 && std::find(gammas.begin(), gammas.end(), 0.0) != gammas.end()) continue;
        grid.emplace_back(0.0, a);
    }
    std::vector<NoiseCell> cells;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        auto noise = base;
        noise.gamma = grid[k].first;
        noise.crosstalk = grid[k].second;
        noise.seed = qsim::derive_seed(base.seed, k);
        cells.push_back(noisy_hit_probability(problem, target, noise));
    }
    return cells;
}

std::vector<GateCountRow> var_gate_counts(const DiscreteDistribution& dist, std::uint64_t l,
                                          const std::vector<int>& m_range) {
    std::vector<GateCountRow> rows;
    for (int m : m_range) {
        const auto circuit = circuits::amplitude_estimation_circuit(var_problem(dist, l, m));
        const auto report = circuits::cnot_count(circuit);
        GateCountRow row;
        row.m = m;
        row.cnots = report.cnot_total;
        row.single_qubit = report.single_qubit_total;
        row.qubits = circuit.num_qubits() + report.ancillas;
        if (!rows.empty() && rows.back().cnots > 0) row.ratio = double(row.cnots) / double(rows.back().cnots);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace qrisk::risk
