#pragma once

// Univariate polynomials and the Taylor machinery behind the scaled objective
// encoding sin^2(c p_u(y) + pi/4) ~ c (y - 1/2) + 1/2.

#include <vector>

namespace qrisk::approx {

/// Dense coefficients, coeffs[j] multiplies x^j.
struct Polynomial {
    std::vector<double> coeffs;

    Polynomial() = default;
    explicit Polynomial(std::vector<double> c) : coeffs(std::move(c)) { trim(); }

    static Polynomial constant(double v) { return Polynomial({v}); }
    static Polynomial linear(double intercept, double slope) { return Polynomial({intercept, slope}); }

    /// Degree after trimming; the zero polynomial has degree -1.
    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    bool is_zero() const { return coeffs.empty(); }
    double operator()(double x) const;
    double coeff(int j) const { return j < static_cast<int>(coeffs.size()) ? coeffs[j] : 0.0; }

    /// Drops trailing exact zeros.
    void trim();

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(double s, const Polynomial& a);
};

/// p(f(x)).
Polynomial compose(const Polynomial& f, const Polynomial& p);

struct ApproxParams {
    double c = 1.0;
    int u = 0;
    int s = 1;

    void validate() const;
};

/// p_u(y) = sum_{v<=u} a_v c^{2v} (y - 1/2)^{2v+1} with a_v = binom(2v, v) / (2v+1),
/// the odd Taylor expansion of (asin(sqrt(c(y-1/2)+1/2)) - pi/4) / c around y = 1/2.
Polynomial taylor_polynomial(const ApproxParams& params);

/// Coefficient a_v of the series above.
double taylor_coefficient(int v);

/// c^{2u+3} / ((2u+3) 2^{u+1}).
double approx_error_bound(const ApproxParams& params);

struct Scaling {
    double c;
    bool clamped;
};

/// sqrt(2) eps^{1/(2u+2)}, clamped to 1.
Scaling optimal_scaling(double eps, int u);

/// (2u+2)/(2u+3).
double convergence_rate(int u);

/// Smallest total error eps reachable with M evaluations at the optimal c:
/// the solution of c* eps - bound(c*) = pi/M.
double target_error_for_evaluations(double M, int u);

}  // namespace qrisk::approx
