#include "qrisk/finance.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace qrisk::finance {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

bool is_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
        if (s[i] < '0' || s[i] > '9') return false;
    }
    const int month = std::stoi(s.substr(5, 2)), day = std::stoi(s.substr(8, 2));
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

std::string tenor_label(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

}  // namespace

std::size_t RateSeries::column(double tenor) const {
    for (std::size_t j = 0; j < tenors.size(); ++j) {
        if (std::abs(tenors[j] - tenor) < 1e-9) return j;
    }
    throw std::invalid_argument("tenor " + tenor_label(tenor) + " not in series");
}

RateSeries parse_cmt(std::istream& in) {
    RateSeries s;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split(line);
        for (auto& c : cells) c = trim(c);
        if (!have_header) {
            if (cells.empty() || cells[0] != "date") throw ParseError(lineno, "header must start with 'date'");
            if (cells.size() < 2) throw ParseError(lineno, "header lists no tenors");
            for (std::size_t j = 1; j < cells.size(); ++j) {
                double t = 0;
                if (!parse_double(cells[j], t) || !(t > 0)) {
                    throw ParseError(lineno, "bad tenor '" + cells[j] + "'");
                }
                s.tenors.push_back(t);
            }
            have_header = true;
            continue;
        }
        if (cells.size() != s.tenors.size() + 1) {
            throw ParseError(lineno, "expected " + std::to_string(s.tenors.size() + 1) + " fields, got " +
                                         std::to_string(cells.size()));
        }
        if (!is_iso_date(cells[0])) throw ParseError(lineno, "bad date '" + cells[0] + "'");
        std::vector<double> row(s.tenors.size());
        bool complete = true;
        for (std::size_t j = 0; j < row.size(); ++j) {
            const auto& c = cells[j + 1];
            if (c.empty()) {
                complete = false;
                continue;
            }
            if (!parse_double(c, row[j]) || !std::isfinite(row[j])) throw ParseError(lineno, "bad rate '" + c + "'");
        }
        if (!s.dates.empty() && cells[0] <= s.dates.back()) {
            throw ParseError(lineno, "dates must be strictly increasing");
        }
        if (!complete) continue;
        s.dates.push_back(cells[0]);
        s.rates.push_back(std::move(row));
    }
    return s;
}

RateSeries load_cmt(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return parse_cmt(in);
}

void write_cmt(std::ostream& out, const RateSeries& s) {
    out << "date";
    for (double t : s.tenors) out << ',' << tenor_label(t);
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < s.rows(); ++i) {
        out << s.dates[i];
        for (double r : s.rates[i]) {
            std::snprintf(buf, sizeof buf, "%.4f", r);
            out << ',' << buf;
        }
        out << '\n';
    }
}

RateSeries synthetic_cmt(std::size_t rows, std::uint64_t seed) {
    using namespace std::chrono;
    RateSeries s;
    s.tenors = {0.25, 0.5, 1, 2, 3, 5, 7, 10, 20, 30};
    const std::size_t k = s.tenors.size();
    std::vector<double> level(k), slope(k), curve(k), anchor(k);
    for (std::size_t j = 0; j < k; ++j) {
        const double lt = std::log(s.tenors[j]);
        level[j] = 0.9 + 0.1 * std::min(1.0, s.tenors[j] / 2.0);
        slope[j] = std::tanh((lt - std::log(3.0)) / 1.5);
        curve[j] = 1.0 - 2.0 * std::exp(-0.5 * std::pow((lt - std::log(5.0)) / 1.0, 2));
        anchor[j] = 1.0 + 2.0 * (1.0 - std::exp(-s.tenors[j] / 4.0));
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u;
    std::vector<double> r = anchor;
    sys_days day = sys_days{year{2000} / January / 3};
    char buf[16];
    for (std::size_t t = 0; t < rows; ++t) {
        while (weekday{day} == Saturday || weekday{day} == Sunday) day += days{1};
        const year_month_day ymd{day};
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
        if (t > 0) {
            const double zl = 0.05 * z(rng), zs = 0.03 * z(rng), zc = 0.01 * z(rng);
            for (std::size_t j = 0; j < k; ++j) {
                r[j] += zl * level[j] + zs * slope[j] + zc * curve[j] + 0.013 * z(rng) - 0.002 * (r[j] - anchor[j]);
            }
        }
        const bool gap = u(rng) < 0.01;
        if (!gap) {
            s.dates.emplace_back(buf);
            s.rates.push_back(r);
        }
        day += days{1};
    }
    return s;
}

std::vector<std::vector<double>> daily_differences(const RateSeries& s) {
    if (s.rows() < 2) throw std::invalid_argument("need at least two rows for differences");
    std::vector<std::vector<double>> d(s.rows() - 1, std::vector<double>(s.tenors.size()));
    for (std::size_t t = 0; t + 1 < s.rows(); ++t)
        for (std::size_t j = 0; j < s.tenors.size(); ++j) d[t][j] = s.rates[t + 1][j] - s.rates[t][j];
    return d;
}

std::vector<std::vector<double>> select_columns(const std::vector<std::vector<double>>& m,
                                                const std::vector<std::size_t>& cols) {
    std::vector<std::vector<double>> out(m.size(), std::vector<double>(cols.size()));
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out[i][j] = m[i].at(cols[j]);
    return out;
}

PCAResult pca(const std::vector<std::vector<double>>& data) {
    if (data.size() < 2 || data[0].empty()) throw std::invalid_argument("pca needs at least 2 rows and 1 column");
    const Eigen::Index n = static_cast<Eigen::Index>(data.size()), k = static_cast<Eigen::Index>(data[0].size());
    Eigen::MatrixXd x(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(data[i].size()) != k) throw std::invalid_argument("ragged data");
        for (Eigen::Index j = 0; j < k; ++j) x(i, j) = data[i][j];
    }
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    // Eigen sorts ascending.
    Eigen::MatrixXd w = es.eigenvectors().rowwise().reverse();
    Eigen::VectorXd lambda = es.eigenvalues().reverse();
    for (Eigen::Index c = 0; c < k; ++c) {
        if (w(k - 1, c) < 0) w.col(c) *= -1.0;
        lambda(c) = std::max(0.0, lambda(c));
    }
    const Eigen::MatrixXd scores = x * w;

    PCAResult r;
    r.components.assign(k, std::vector<double>(k));
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index c = 0; c < k; ++c) r.components[i][c] = w(i, c);
    const double total = lambda.sum();
    double acc = 0;
    for (Eigen::Index c = 0; c < k; ++c) {
        r.eigenvalues.push_back(lambda(c));
        acc += lambda(c);
        r.explained.push_back(total > 0 ? acc / total : (c + 1 == k ? 1.0 : 0.0));
    }
    r.mean.assign(mean.data(), mean.data() + k);
    r.scores.assign(n, std::vector<double>(k));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index c = 0; c < k; ++c) r.scores[i][c] = scores(i, c);
    return r;
}

AffineGrid shift_grid() { return {0.0626, -0.2188}; }
AffineGrid twist_grid() { return {0.0250, -0.0375}; }

Discretized discretize(const std::vector<double>& samples, int n, const AffineGrid& grid) {
    if (n < 1 || n > 20) throw std::invalid_argument("discretize needs 1 <= n <= 20");
    if (!(grid.slope > 0)) throw std::invalid_argument("grid slope must be positive");
    if (samples.empty()) throw std::invalid_argument("no samples to discretize");
    const std::size_t N = std::size_t{1} << n;
    std::vector<double> counts(N, 0.0);
    Discretized out;
    for (double v : samples) {
        const double pos = std::round((v - grid.offset) / grid.slope);
        std::size_t bin;
        if (pos < 0) {
            bin = 0;
            ++out.clipped;
        } else if (pos > static_cast<double>(N - 1)) {
            bin = N - 1;
            ++out.clipped;
        } else {
            bin = static_cast<std::size_t>(pos);
        }
        counts[bin] += 1.0;
    }
    std::vector<double> p(N);
    const double total = static_cast<double>(samples.size());
    for (std::size_t i = 0; i < N; ++i) p[i] = 0.5 * (counts[i] + counts[N - 1 - i]) / total;
    // Exact renormalization keeps the sum within rounding of 1.
    const double s = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& x : p) x /= s;
    for (std::size_t i = 0; i < N / 2; ++i) p[N - 1 - i] = p[i];
    out.dist = DiscreteDistribution(p, grid.slope, grid.offset);
    return out;
}

TbillValue tbill_value(double p, double r, double delta_r, double face) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
    if (!(1.0 + r > 0.0 && 1.0 + r + delta_r > 0.0)) throw std::invalid_argument("discount denominators must be positive");
    TbillValue v;
    v.low = face / (1.0 + r + delta_r);
    v.high = face / (1.0 + r);
    v.value = (1.0 - p) * v.low + p * v.high;
    v.mapped = v.high == v.low ? p : (v.value - v.low) / (v.high - v.low);
    return v;
}

double portfolio_value(double r1, double r2, const PortfolioSpec& spec) {
    if (!(1.0 + r1 > 0.0) || !(1.0 + r2 / 2.0 > 0.0)) throw std::invalid_argument("rates give a non-positive discount base");
    const double d2 = 1.0 + r2 / 2.0;
    double v = spec.face1 / (1.0 + r1);
    double disc = 1.0;
    for (int i = 1; i <= 4; ++i) {
        disc *= d2;
        v += spec.coupon * spec.face2 / disc;
    }
    return v + spec.face2 / disc;
}

std::vector<std::vector<double>> reference_loadings() { return {{0.703, -0.711}, {0.711, 0.703}}; }

double grid_value(double x, double y, const PortfolioSpec& spec, const std::vector<std::vector<double>>& w,
                  const AffineGrid& sg, const AffineGrid& tg, double rate_scale) {
    const double S = sg.at(x), T = tg.at(y);
    const double d1 = rate_scale * (w[0][0] * S + w[0][1] * T);
    const double d2 = rate_scale * (w[1][0] * S + w[1][1] * T);
    return portfolio_value(spec.r1 + d1, spec.r2 + d2, spec);
}

Linearization linearize_portfolio(const PortfolioSpec& spec, const std::vector<std::vector<double>>& w,
                                  const AffineGrid& sg, const AffineGrid& tg, int x_bits, int y_bits,
                                  double rate_scale) {
    if (w.size() != 2 || w[0].size() != 2 || w[1].size() != 2) throw std::invalid_argument("W must be 2x2");
    Linearization lin;
    const double X = std::ldexp(1.0, x_bits) - 1.0, Y = std::ldexp(1.0, y_bits) - 1.0;
    lin.mid_x = X / 2.0;
    lin.mid_y = Y / 2.0;
    // V is smooth in (x, y) through the affine maps; the derivative follows
    // from the closed-form rate sensitivities.
    const double S = sg.at(lin.mid_x), T = tg.at(lin.mid_y);
    const double r1 = spec.r1 + rate_scale * (w[0][0] * S + w[0][1] * T);
    const double r2 = spec.r2 + rate_scale * (w[1][0] * S + w[1][1] * T);
    const double dv_dr1 = -spec.face1 / ((1.0 + r1) * (1.0 + r1));
    const double d2 = 1.0 + r2 / 2.0;
    double dv_dr2 = 0.0;
    for (int i = 1; i <= 4; ++i) dv_dr2 -= 0.5 * i * spec.coupon * spec.face2 / std::pow(d2, i + 1);
    dv_dr2 -= 0.5 * 4 * spec.face2 / std::pow(d2, 5);
    lin.ax = rate_scale * sg.slope * (dv_dr1 * w[0][0] + dv_dr2 * w[1][0]);
    lin.ay = rate_scale * tg.slope * (dv_dr1 * w[0][1] + dv_dr2 * w[1][1]);
    lin.value_at_mid = portfolio_value(r1, r2, spec);
    lin.a0 = lin.value_at_mid - lin.ax * lin.mid_x - lin.ay * lin.mid_y;

    lin.f_min = lin.f_max = lin.expansion(0, 0);
    for (double x : {0.0, X})
        for (double y : {0.0, Y}) {
            lin.f_min = std::min(lin.f_min, lin.expansion(x, y));
            lin.f_max = std::max(lin.f_max, lin.expansion(x, y));
        }
    const double span = lin.f_max - lin.f_min;
    if (!(span > 0)) throw std::invalid_argument("portfolio value is flat over the grid");
    lin.b0 = (lin.a0 - lin.f_min) / span;
    lin.bx = lin.ax / span;
    lin.by = lin.ay / span;
    return lin;
}

TwoAssetModel build_two_asset_model(const RateSeries& series, const TwoAssetConfig& cfg) {
    TwoAssetModel m;
    const auto diffs = select_columns(daily_differences(series), {series.column(cfg.tenor1), series.column(cfg.tenor2)});
    m.pca = pca(diffs);
    m.w = m.pca.components;

    std::vector<double> shift(diffs.size()), twist(diffs.size());
    for (std::size_t i = 0; i < diffs.size(); ++i) {
        shift[i] = m.pca.scores[i][0];
        twist[i] = m.pca.scores[i][1];
    }
    {
        const double ms = std::accumulate(shift.begin(), shift.end(), 0.0) / shift.size();
        const double mt = std::accumulate(twist.begin(), twist.end(), 0.0) / twist.size();
        double sst = 0, ss = 0, tt = 0;
        for (std::size_t i = 0; i < shift.size(); ++i) {
            sst += (shift[i] - ms) * (twist[i] - mt);
            ss += (shift[i] - ms) * (shift[i] - ms);
            tt += (twist[i] - mt) * (twist[i] - mt);
        }
        m.shift_twist_correlation = ss > 0 && tt > 0 ? sst / std::sqrt(ss * tt) : 0.0;
    }
    m.shift = discretize(shift, cfg.x_bits, cfg.sg);
    m.twist = discretize(twist, cfg.y_bits, cfg.tg);
    m.joint = DiscreteDistribution::product(m.shift.dist, m.twist.dist);
    m.lin = linearize_portfolio(cfg.spec, m.w, cfg.sg, cfg.tg, cfg.x_bits, cfg.y_bits, cfg.rate_scale);

    std::vector<double> w(cfg.x_bits + cfg.y_bits);
    for (int j = 0; j < cfg.x_bits; ++j) w[j] = m.lin.bx * std::ldexp(1.0, j);
    for (int j = 0; j < cfg.y_bits; ++j) w[cfg.x_bits + j] = m.lin.by * std::ldexp(1.0, j);
    m.f = BitPolynomial::affine(m.lin.b0, w);

    const auto table = m.f.table();
    std::vector<double> values(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) values[i] = std::clamp(table[i], 0.0, 1.0);
    m.sorted = DiscreteDistribution::with_values(m.joint.probs(), values).sorted_by_value(&m.order);
    return m;
}

}  // namespace qrisk::finance
