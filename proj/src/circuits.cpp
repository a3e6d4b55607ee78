#include "qrisk/circuits.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qrisk::circuits {

namespace {

int log2_exact(std::size_t n, const char* what) {
    if (n < 2 || !std::has_single_bit(n)) {
        throw std::invalid_argument(std::string(what) + ": size must be a power of two >= 2, got " +
                                    std::to_string(n));
    }
    return std::countr_zero(n);
}

std::vector<int> range(int first, int count) {
    std::vector<int> r(count);
    std::iota(r.begin(), r.end(), first);
    return r;
}

}  // namespace

// ---- DiscreteDistribution --------------------------------------------------

DiscreteDistribution::DiscreteDistribution(std::vector<double> probs, double slope, double offset)
    : probs_(std::move(probs)), slope_(slope), offset_(offset) {
    n_ = log2_exact(probs_.size(), "distribution");
    double sum = 0.0;
    for (double p : probs_) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("probabilities must be finite and >= 0");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument("probabilities must sum to 1, got " + std::to_string(sum));
    }
    if (!std::isfinite(slope) || !std::isfinite(offset)) throw std::invalid_argument("grid must be finite");
}

DiscreteDistribution DiscreteDistribution::with_values(std::vector<double> probs, std::vector<double> values) {
    if (values.size() != probs.size()) throw std::invalid_argument("value table size differs from probabilities");
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("values must be finite");
    }
    DiscreteDistribution d(std::move(probs));
    d.table_ = std::move(values);
    return d;
}

DiscreteDistribution DiscreteDistribution::product(const DiscreteDistribution& low, const DiscreteDistribution& high,
                                                   std::optional<std::vector<double>> values) {
    const std::size_t nl = low.size(), nh = high.size();
    std::vector<double> p(nl * nh), v(nl * nh);
    for (std::size_t j = 0; j < nh; ++j) {
        for (std::size_t i = 0; i < nl; ++i) {
            p[i + nl * j] = low.prob(i) * high.prob(j);
            v[i + nl * j] = low.value(i) + high.value(j);
        }
    }
    // Renormalize away the rounding of the products.
    const double s = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& x : p) x /= s;
    DiscreteDistribution d = with_values(std::move(p), values ? std::move(*values) : std::move(v));
    auto add_factors = [&](const DiscreteDistribution& f) {
        if (f.factors_.empty()) {
            d.factors_.push_back(f);
        } else {
            d.factors_.insert(d.factors_.end(), f.factors_.begin(), f.factors_.end());
        }
    };
    add_factors(low);
    add_factors(high);
    return d;
}

double DiscreteDistribution::value(std::size_t i) const {
    if (i >= probs_.size()) throw std::out_of_range("distribution index out of range");
    return table_.empty() ? slope_ * static_cast<double>(i) + offset_ : table_[i];
}

std::vector<double> DiscreteDistribution::values() const {
    std::vector<double> v(size());
    for (std::size_t i = 0; i < size(); ++i) v[i] = value(i);
    return v;
}

DiscreteDistribution DiscreteDistribution::sorted_by_value(std::vector<std::size_t>* order) const {
    std::vector<std::size_t> idx(size());
    std::iota(idx.begin(), idx.end(), 0);
    const auto v = values();
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> p(size()), sv(size());
    for (std::size_t k = 0; k < size(); ++k) {
        p[k] = probs_[idx[k]];
        sv[k] = v[idx[k]];
    }
    if (order) *order = idx;
    return with_values(std::move(p), std::move(sv));
}

// ---- BitPolynomial ---------------------------------------------------------

void BitPolynomial::add_term(std::uint64_t mask, double coef) {
    if (coef == 0.0) return;
    auto [it, inserted] = terms_.try_emplace(mask, coef);
    if (!inserted) {
        it->second += coef;
        if (it->second == 0.0) terms_.erase(it);
    }
}

BitPolynomial BitPolynomial::constant(int num_bits, double v) {
    BitPolynomial p(num_bits);
    p.add_term(0, v);
    return p;
}

BitPolynomial BitPolynomial::affine(double c0, const std::vector<double>& w) {
    BitPolynomial p(static_cast<int>(w.size()));
    p.add_term(0, c0);
    for (std::size_t j = 0; j < w.size(); ++j) p.add_term(std::uint64_t{1} << j, w[j]);
    return p;
}

BitPolynomial BitPolynomial::from_polynomial(const approx::Polynomial& p, int num_bits) {
    std::vector<double> w(num_bits);
    for (int j = 0; j < num_bits; ++j) w[j] = std::ldexp(1.0, j);
    BitPolynomial r = compose(affine(0.0, w), p);
    r.n_ = num_bits;
    return r;
}

BitPolynomial BitPolynomial::from_table(const std::vector<double>& values) {
    const int n = log2_exact(values.size(), "bit polynomial table");
    std::vector<double> a = values;
    for (int b = 0; b < n; ++b) {
        const std::uint64_t bit = std::uint64_t{1} << b;
        for (std::uint64_t mask = 0; mask < a.size(); ++mask) {
            if (mask & bit) a[mask] -= a[mask ^ bit];
        }
    }
    BitPolynomial p(n);
    for (std::uint64_t mask = 0; mask < a.size(); ++mask) p.add_term(mask, a[mask]);
    return p;
}

double BitPolynomial::coeff(std::uint64_t mask) const {
    auto it = terms_.find(mask);
    return it == terms_.end() ? 0.0 : it->second;
}

double BitPolynomial::operator()(std::uint64_t x) const {
    double s = 0.0;
    for (const auto& [mask, coef] : terms_) {
        if ((x & mask) == mask) s += coef;
    }
    return s;
}

std::vector<double> BitPolynomial::table() const {
    std::vector<double> t(std::size_t{1} << n_);
    for (std::uint64_t x = 0; x < t.size(); ++x) t[x] = (*this)(x);
    return t;
}

BitPolynomial BitPolynomial::pruned(double tol) const {
    BitPolynomial p(n_);
    for (const auto& [mask, coef] : terms_) {
        if (std::abs(coef) > tol) p.terms_.emplace(mask, coef);
    }
    return p;
}

BitPolynomial operator+(const BitPolynomial& a, const BitPolynomial& b) {
    BitPolynomial r(std::max(a.n_, b.n_));
    r.terms_ = a.terms_;
    for (const auto& [mask, coef] : b.terms_) r.add_term(mask, coef);
    return r;
}

BitPolynomial operator*(const BitPolynomial& a, const BitPolynomial& b) {
    BitPolynomial r(std::max(a.n_, b.n_));
    for (const auto& [ma, ca] : a.terms_) {
        for (const auto& [mb, cb] : b.terms_) r.add_term(ma | mb, ca * cb);
    }
    return r;
}

BitPolynomial operator*(double s, const BitPolynomial& a) {
    BitPolynomial r(a.n_);
    for (const auto& [mask, coef] : a.terms_) r.add_term(mask, s * coef);
    return r;
}

BitPolynomial compose(const BitPolynomial& f, const approx::Polynomial& p) {
    BitPolynomial acc(f.num_bits());
    for (auto it = p.coeffs.rbegin(); it != p.coeffs.rend(); ++it) {
        acc = acc * f + BitPolynomial::constant(f.num_bits(), *it);
    }
    return acc;
}

// ---- distribution loading --------------------------------------------------

namespace {

// Uniformly controlled Ry: for control value v (bit b on controls[b]) the
// target rotates by alpha[v]. Gray-code sequence of Ry and CNOT.
void add_uniformly_controlled_ry(Circuit& c, const std::vector<double>& alpha, const std::vector<int>& controls,
                                 int target) {
    const std::size_t count = alpha.size();
    if (controls.empty()) {
        c.add(qsim::ry(alpha[0], target));
        return;
    }
    const auto gray = [](std::size_t i) { return i ^ (i >> 1); };
    std::vector<double> theta(count, 0.0);
    for (std::size_t i = 0; i < count; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < count; ++j) {
            s += (std::popcount(j & gray(i)) & 1) ? -alpha[j] : alpha[j];
        }
        theta[i] = s / static_cast<double>(count);
    }
    for (std::size_t i = 0; i < count; ++i) {
        c.add(qsim::ry(theta[i], target));
        const std::size_t diff = gray(i) ^ gray((i + 1) % count);
        c.add(qsim::cnot(controls[std::countr_zero(diff)], target));
    }
}

void add_tree(Circuit& c, const std::vector<double>& p, int first) {
    const int n = std::countr_zero(p.size());
    // sums[L][v]: mass of indices whose top L bits equal v.
    std::vector<std::vector<double>> sums(n + 1);
    sums[n] = p;
    for (int L = n - 1; L >= 0; --L) {
        sums[L].resize(std::size_t{1} << L);
        for (std::size_t v = 0; v < sums[L].size(); ++v) sums[L][v] = sums[L + 1][2 * v] + sums[L + 1][2 * v + 1];
    }
    for (int k = 0; k < n; ++k) {
        std::vector<double> alpha(std::size_t{1} << k);
        for (std::size_t v = 0; v < alpha.size(); ++v) {
            const double p0 = std::max(0.0, sums[k + 1][2 * v]), p1 = std::max(0.0, sums[k + 1][2 * v + 1]);
            alpha[v] = 2.0 * std::atan2(std::sqrt(p1), std::sqrt(p0));
        }
        add_uniformly_controlled_ry(c, alpha, range(first + n - k, k), first + n - 1 - k);
    }
}

}  // namespace

Circuit prepare_distribution(const DiscreteDistribution& dist) {
    const int n = dist.num_qubits();
    Circuit c(n);
    c.add_register("state", 0, n);
    if (dist.factors().empty()) {
        add_tree(c, dist.probs(), 0);
    } else {
        int first = 0;
        for (const auto& f : dist.factors()) {
            add_tree(c, f.probs(), first);
            first += f.num_qubits();
        }
    }
    return c;
}

// ---- polynomial rotations --------------------------------------------------

void add_polynomial_rotation(Circuit& circuit, const BitPolynomial& angle, const std::vector<int>& state, int target,
                             const std::vector<int>& extra_controls) {
    if (angle.num_bits() > static_cast<int>(state.size())) {
        throw std::invalid_argument("polynomial uses more bits than the state register has");
    }
    for (const auto& [mask, coef] : angle.terms()) {
        std::vector<int> controls;
        for (int j = 0; j < angle.num_bits(); ++j) {
            if ((mask >> j) & 1) controls.push_back(state[j]);
        }
        controls.insert(controls.end(), extra_controls.begin(), extra_controls.end());
        circuit.add(qsim::mcry(coef, std::move(controls), target));
    }
}

Circuit polynomial_rotation(const approx::Polynomial& p, int n) {
    if (n < 1) throw std::invalid_argument("polynomial_rotation needs n >= 1");
    Circuit c(n + 1);
    c.add_register("state", 0, n);
    c.add_register("objective", n, 1);
    add_polynomial_rotation(c, BitPolynomial::from_polynomial(p, n), range(0, n), n);
    return c;
}

BitPolynomial objective_angle(const BitPolynomial& f, const approx::ApproxParams& params) {
    params.validate();
    const approx::Polynomial pu = approx::taylor_polynomial(params);
    BitPolynomial angle = (2.0 * params.c) * compose(f, pu) + BitPolynomial::constant(f.num_bits(), std::numbers::pi / 2);
    return angle.pruned(1e-14);
}

BitPolynomial variance_angle(const BitPolynomial& f, double c) {
    if (!(c > 0.0 && c <= 1.0)) throw std::invalid_argument("c must lie in (0, 1]");
    return (2.0 * c) * f;
}

void check_unit_range(const BitPolynomial& f, std::uint64_t up_to) {
    for (std::uint64_t x = 0; x <= up_to; ++x) {
        const double v = f(x);
        if (v < -1e-12 || v > 1.0 + 1e-12) {
            throw std::invalid_argument("objective must map into [0, 1]; f(" + std::to_string(x) +
                                        ") = " + std::to_string(v));
        }
    }
}

Circuit objective_operator(const BitPolynomial& f, const approx::ApproxParams& params) {
    const int n = f.num_bits();
    if (n < 1) throw std::invalid_argument("objective needs at least one state bit");
    check_unit_range(f, (std::uint64_t{1} << n) - 1);
    Circuit c(n + 1);
    c.add_register("state", 0, n);
    c.add_register("objective", n, 1);
    add_polynomial_rotation(c, objective_angle(f, params), range(0, n), n);
    return c;
}

Circuit objective_operator(const approx::Polynomial& f, int n, const approx::ApproxParams& params) {
    return objective_operator(BitPolynomial::from_polynomial(f, n), params);
}

// ---- comparator ------------------------------------------------------------

// flag = NOT carry(x + K) with K = 2^n - 1 - l. Carry bits c_1..c_{n-1} live in
// the ancillas, c_n goes straight into the flag. A carry known to be zero is
// tracked classically so no gates are spent on it.
void add_comparator(Circuit& circuit, std::uint64_t l, const std::vector<int>& state, int flag,
                    const std::vector<int>& ancillas) {
    const int n = static_cast<int>(state.size());
    if (n < 1) throw std::invalid_argument("comparator needs n >= 1");
    if (n < 64 && l >= (std::uint64_t{1} << n)) {
        throw std::invalid_argument("comparator level " + std::to_string(l) + " out of range for n = " +
                                    std::to_string(n));
    }
    if (static_cast<int>(ancillas.size()) < n - 1) throw std::invalid_argument("comparator needs n-1 ancillas");
    const std::uint64_t k = ((std::uint64_t{1} << n) - 1) - l;

    std::vector<qsim::GateOp> compute;  // gates producing c_1..c_{n-1}
    auto emit_carry = [&](std::vector<qsim::GateOp>& out, int i, bool carry_known_zero, int carry_in, int dest) {
        // c_{i+1} = k_i ? (x_i OR c_i) : (x_i AND c_i)
        const bool ki = (k >> i) & 1;
        if (carry_known_zero) {
            if (ki) out.push_back(qsim::cnot(state[i], dest));
            return;
        }
        if (ki) {
            out.push_back(qsim::x(state[i]));
            out.push_back(qsim::x(carry_in));
            out.push_back({qsim::GateKind::X, {dest}, {state[i], carry_in}, {}, {}});
            out.push_back(qsim::x(dest));
            out.push_back(qsim::x(state[i]));
            out.push_back(qsim::x(carry_in));
        } else {
            out.push_back({qsim::GateKind::X, {dest}, {state[i], carry_in}, {}, {}});
        }
    };

    bool zero = true;  // c_0 = 0
    std::vector<bool> zero_after(n + 1, true);
    for (int i = 0; i < n; ++i) {
        const bool ki = (k >> i) & 1;
        zero_after[i + 1] = zero && !ki;
        zero = zero_after[i + 1];
    }
    // Carries c_1..c_{n-1}.
    for (int i = 0; i + 1 < n; ++i) {
        emit_carry(compute, i, zero_after[i], i > 0 ? ancillas[i - 1] : -1, ancillas[i]);
    }
    for (const auto& g : compute) circuit.add(g);
    std::vector<qsim::GateOp> last;
    emit_carry(last, n - 1, zero_after[n - 1], n > 1 ? ancillas[n - 2] : -1, flag);
    for (const auto& g : last) circuit.add(g);
    circuit.add(qsim::x(flag));
    for (auto it = compute.rbegin(); it != compute.rend(); ++it) circuit.add(*it);
}

Circuit comparator(std::uint64_t l, int n) {
    if (n < 1) throw std::invalid_argument("comparator needs n >= 1");
    Circuit c(2 * n);
    c.add_register("state", 0, n);
    c.add_register("flag", n, 1);
    if (n > 1) c.add_register("ancilla", n + 1, n - 1);
    add_comparator(c, l, range(0, n), n, range(n + 1, n - 1));
    return c;
}

Circuit cvar_objective(std::uint64_t l, const BitPolynomial& f, const approx::ApproxParams& params) {
    const int n = f.num_bits();
    if (n < 1) throw std::invalid_argument("cvar objective needs n >= 1");
    check_unit_range(f, l);
    Circuit c(2 * n + 1);
    c.add_register("state", 0, n);
    c.add_register("flag", n, 1);
    c.add_register("objective", n + 1, 1);
    if (n > 1) c.add_register("ancilla", n + 2, n - 1);
    add_comparator(c, l, range(0, n), n, range(n + 2, n - 1));
    add_polynomial_rotation(c, objective_angle(f, params), range(0, n), n + 1, {n});
    return c;
}

Circuit cvar_objective(std::uint64_t l, int n, const approx::ApproxParams& params) {
    if (l == 0) throw std::invalid_argument("cvar objective with l = 0 is degenerate; use the value at 0 directly");
    std::vector<double> w(n);
    for (int j = 0; j < n; ++j) w[j] = std::ldexp(1.0, j) / static_cast<double>(l);
    return cvar_objective(l, BitPolynomial::affine(0.0, w), params);
}

}  // namespace qrisk::circuits
