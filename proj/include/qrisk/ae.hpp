#pragma once

// Amplitude-estimation post-processing and the simulated estimate loop.

#include <cstdint>
#include <vector>

#include "qrisk/circuits.hpp"
#include "qrisk/qsim.hpp"

namespace qrisk::ae {

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

struct AEResult {
    int m = 0;
    std::uint64_t M = 0;
    /// Representative in {0..M/2}; y and M-y give the same estimate.
    std::uint64_t modal_y = 0;
    double estimate = 0.0;
    Interval interval;
    /// max(estimate - low, high - estimate)
    double half_width = 0.0;
    qsim::CountsMap counts;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
    /// Exact outcome distribution over y, when the result came from simulation.
    std::vector<double> probabilities;
};

/// sin^2(y pi / M).
double estimate_of(std::uint64_t y, int m);

/// pi/M + pi^2/M^2.
double standard_bound(int m);

/// Image of theta in [(y-1) pi/M, (y+1) pi/M] under sin^2.
Interval error_interval(std::uint64_t y, int m);

/// Modal estimate; y and M-y are pooled, ties go to the smaller estimate.
AEResult estimate_from_counts(const qsim::CountsMap& counts, int m);

/// Same rule applied to an exact outcome distribution (the infinite-shot limit).
AEResult estimate_from_probabilities(const std::vector<double>& probabilities, int m);

enum class Route {
    /// Simulates the full circuit with the evaluation register.
    FullCircuit,
    /// Evolves Q^y A|0> on the work register alone and applies the inverse
    /// DFT over y classically. Same distribution, 2^m times less memory traffic.
    WorkRegister,
};

/// Exact distribution of the measured evaluation register.
std::vector<double> outcome_distribution(const circuits::AEProblem& problem, Route route = Route::WorkRegister);

AEResult run_ae(const circuits::AEProblem& problem, std::uint64_t shots, std::uint64_t seed,
                Route route = Route::WorkRegister);

}  // namespace qrisk::ae
