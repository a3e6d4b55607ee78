#include "qrisk/approx.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qrisk::approx {

double Polynomial::operator()(double x) const {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

void Polynomial::trim() {
    while (!coeffs.empty() && coeffs.back() == 0.0) coeffs.pop_back();
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<double> c(std::max(a.coeffs.size(), b.coeffs.size()), 0.0);
    for (std::size_t i = 0; i < a.coeffs.size(); ++i) c[i] += a.coeffs[i];
    for (std::size_t i = 0; i < b.coeffs.size(); ++i) c[i] += b.coeffs[i];
    return Polynomial(std::move(c));
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<double> c(a.coeffs.size() + b.coeffs.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
        for (std::size_t j = 0; j < b.coeffs.size(); ++j) c[i + j] += a.coeffs[i] * b.coeffs[j];
    }
    return Polynomial(std::move(c));
}

Polynomial operator*(double s, const Polynomial& a) {
    std::vector<double> c = a.coeffs;
    for (auto& v : c) v *= s;
    return Polynomial(std::move(c));
}

Polynomial compose(const Polynomial& f, const Polynomial& p) {
    // Horner in the polynomial ring.
    Polynomial acc;
    for (auto it = p.coeffs.rbegin(); it != p.coeffs.rend(); ++it) acc = acc * f + Polynomial::constant(*it);
    return acc;
}

void ApproxParams::validate() const {
    if (!(c > 0.0 && c <= 1.0)) throw std::invalid_argument("c must lie in (0, 1], got " + std::to_string(c));
    if (u < 0) throw std::invalid_argument("u must be >= 0");
    if (s < 1) throw std::invalid_argument("s must be >= 1");
}

double taylor_coefficient(int v) {
    if (v < 0) throw std::invalid_argument("negative Taylor index");
    // binom(2v, v) / (2v + 1), accumulated as a product to stay exact for small v.
    double binom = 1.0;
    for (int i = 1; i <= v; ++i) binom = binom * (v + i) / i;
    return binom / (2 * v + 1);
}

Polynomial taylor_polynomial(const ApproxParams& params) {
    params.validate();
    const Polynomial shifted = Polynomial::linear(-0.5, 1.0);
    Polynomial result;
    Polynomial power = shifted;  // (y - 1/2)^{2v+1}
    const Polynomial square = shifted * shifted;
    double cpow = 1.0;  // c^{2v}
    for (int v = 0; v <= params.u; ++v) {
        result = result + (taylor_coefficient(v) * cpow) * power;
        power = power * square;
        cpow *= params.c * params.c;
    }
    return result;
}

double approx_error_bound(const ApproxParams& params) {
    params.validate();
    const int u = params.u;
    return std::pow(params.c, 2 * u + 3) / ((2 * u + 3) * std::ldexp(1.0, u + 1));
}

Scaling optimal_scaling(double eps, int u) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
    if (u < 0) throw std::invalid_argument("u must be >= 0");
    const double c = std::numbers::sqrt2 * std::pow(eps, 1.0 / (2 * u + 2));
    if (c >= 1.0) return {1.0, c > 1.0};
    return {c, false};
}

double convergence_rate(int u) {
    if (u < 0) throw std::invalid_argument("u must be >= 0");
    return static_cast<double>(2 * u + 2) / (2 * u + 3);
}

double target_error_for_evaluations(double M, int u) {
    if (!(M > 0.0)) throw std::invalid_argument("M must be > 0");
    if (u < 0) throw std::invalid_argument("u must be >= 0");
    const double k = std::numbers::sqrt2 * (1.0 - 1.0 / (2 * u + 3));
    return std::pow(std::numbers::pi / (M * k), convergence_rate(u));
}

}  // namespace qrisk::approx
