#pragma once

// Rate data, PCA of daily changes, discretized shift/twist laws, the T-bill
// and two-asset bond portfolio models.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrisk/circuits.hpp"

namespace qrisk::finance {

using circuits::BitPolynomial;
using circuits::DiscreteDistribution;

class ParseError : public std::runtime_error {
  public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

/// Constant-maturity rates in percent per annum, one row per date.
struct RateSeries {
    std::vector<std::string> dates;  // ISO, strictly increasing
    std::vector<double> tenors;      // years
    std::vector<std::vector<double>> rates;

    std::size_t rows() const { return rates.size(); }
    /// Column index of a tenor; throws when absent.
    std::size_t column(double tenor) const;
};

/// Header `date,<tenor>,...`; blank cells mark missing data and drop the row.
RateSeries parse_cmt(std::istream& in);
RateSeries load_cmt(const std::string& path);
void write_cmt(std::ostream& out, const RateSeries& series);

/// Deterministic stand-in for Treasury data: 10 tenors, business days from
/// 2000-01-03, level/slope/curvature factor differences plus idiosyncratic
/// noise. About one date in a hundred has no 30y quote and is left out, as
/// load_cmt would do.
RateSeries synthetic_cmt(std::size_t rows = 5200, std::uint64_t seed = 2019);

/// Row t is rates[t+1] - rates[t]; gaps between retained rows count as one step.
std::vector<std::vector<double>> daily_differences(const RateSeries& series);

/// Keeps the listed columns of a matrix.
std::vector<std::vector<double>> select_columns(const std::vector<std::vector<double>>& m,
                                                const std::vector<std::size_t>& cols);

struct PCAResult {
    /// components[i][k]: loading of variable i on component k. Columns are
    /// orthonormal; each column's last entry is non-negative.
    std::vector<std::vector<double>> components;
    std::vector<double> eigenvalues;  // descending
    std::vector<double> explained;    // cumulative fractions
    std::vector<double> mean;
    std::vector<std::vector<double>> scores;  // centred data times components
};

PCAResult pca(const std::vector<std::vector<double>>& data);

struct AffineGrid {
    double slope = 1.0;
    double offset = 0.0;
    double at(double i) const { return slope * i + offset; }
};

/// Shift grid S = 0.0626 x - 0.2188 and twist grid T = 0.025 y - 0.0375.
AffineGrid shift_grid();
AffineGrid twist_grid();

struct Discretized {
    DiscreteDistribution dist{std::vector<double>{0.5, 0.5}};
    std::size_t clipped = 0;
};

/// Histogram over 2^n bins centred on the grid points, edge bins absorb
/// outliers, then p_i <- (p_i + p_{N-1-i}) / 2.
Discretized discretize(const std::vector<double>& samples, int n, const AffineGrid& grid);

struct TbillValue {
    double value = 0.0;
    double low = 0.0;   // rate rises
    double high = 0.0;  // no change
    /// (value - low) / (high - low), equal to p.
    double mapped = 0.0;
};

TbillValue tbill_value(double p, double r, double delta_r, double face);

struct PortfolioSpec {
    double face1 = 100.0;
    double face2 = 100.0;
    double r1 = 0.018;
    double r2 = 0.0225;
    double coupon = 0.025;
};

/// Zero-coupon one-year bill plus a two-year note with semi-annual coupons.
double portfolio_value(double r1, double r2, const PortfolioSpec& spec);

struct Linearization {
    /// First-order Taylor expansion a0 + ax x + ay y of V at the grid midpoint.
    double a0 = 0.0, ax = 0.0, ay = 0.0;
    /// V at the midpoint itself.
    double value_at_mid = 0.0;
    /// Extremes of the expansion over the grid corners.
    double f_min = 0.0, f_max = 0.0;
    /// Normalized f = b0 + bx x + by y with range [0, 1].
    double b0 = 0.0, bx = 0.0, by = 0.0;
    double mid_x = 3.5, mid_y = 1.5;

    double expansion(double x, double y) const { return a0 + ax * x + ay * y; }
    double normalized(double x, double y) const { return b0 + bx * x + by * y; }
    double to_usd(double f) const { return f_min + f * (f_max - f_min); }
};

/// V at grid point (x, y): delta r = rate_scale * W (S, T), r_i = r_i0 + delta r_i.
/// rate_scale = 1 reads S, T directly as rate fractions; 0.01 treats them as
/// percentage points.
double grid_value(double x, double y, const PortfolioSpec& spec, const std::vector<std::vector<double>>& w,
                  const AffineGrid& sg, const AffineGrid& tg, double rate_scale);

Linearization linearize_portfolio(const PortfolioSpec& spec, const std::vector<std::vector<double>>& w,
                                  const AffineGrid& sg, const AffineGrid& tg, int x_bits = 3, int y_bits = 2,
                                  double rate_scale = 1.0);

/// Reference 1y/2y loadings of the historical Treasury data.
std::vector<std::vector<double>> reference_loadings();

struct TwoAssetConfig {
    double tenor1 = 1.0;
    double tenor2 = 2.0;
    AffineGrid sg = shift_grid();
    AffineGrid tg = twist_grid();
    int x_bits = 3;
    int y_bits = 2;
    PortfolioSpec spec;
    double rate_scale = 1.0;
};

struct TwoAssetModel {
    PCAResult pca;
    std::vector<std::vector<double>> w;  // 2x2 loadings used for the model
    Discretized shift, twist;
    /// Product law, index = x + 2^{x_bits} y.
    DiscreteDistribution joint{std::vector<double>{0.5, 0.5}};
    Linearization lin;
    /// Normalized f over the flattened index.
    BitPolynomial f;
    /// Joint law relabelled in increasing f; order[k] is the flattened index at rank k.
    DiscreteDistribution sorted{std::vector<double>{0.5, 0.5}};
    std::vector<std::size_t> order;
    /// Sample correlation of the shift and twist scores.
    double shift_twist_correlation = 0.0;
};

TwoAssetModel build_two_asset_model(const RateSeries& series, const TwoAssetConfig& cfg = {});

}  // namespace qrisk::finance
