#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qrisk/ae.hpp"
#include "qrisk/finance.hpp"
#include "qrisk/risk.hpp"

namespace qrisk::cli {

namespace {

using circuits::BitPolynomial;
using circuits::DiscreteDistribution;
using json = nlohmann::ordered_json;

constexpr const char* kReportSchema = "qrisk.risk_report/1";

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

class Output {
  public:
    Output(const std::optional<std::string>& dir, std::ostream& out) : dir_(dir), out_(out) {
        if (dir_) {
            std::error_code ec;
            std::filesystem::create_directories(*dir_, ec);
            if (ec) throw std::runtime_error("cannot create '" + *dir_ + "': " + ec.message());
        }
    }

    void write(const std::string& name, const std::string& content) {
        if (!dir_) {
            out_ << "# " << name << '\n' << content;
            return;
        }
        const auto path = (std::filesystem::path(*dir_) / name).string();
        std::ofstream f(path, std::ios::binary);
        if (!f || !(f << content) || !(f.flush())) throw std::runtime_error("cannot write '" + path + "'");
        out_ << "wrote " << path << '\n';
    }

  private:
    std::optional<std::string> dir_;
    std::ostream& out_;
};

double scaling_for(const RunConfig& cfg, int m) {
    if (cfg.c > 0) return cfg.c;
    const double M = std::ldexp(1.0, m);
    return approx::optimal_scaling(approx::target_error_for_evaluations(M, cfg.u), cfg.u).c;
}

std::vector<int> m_range(const RunConfig& cfg, int default_max) {
    const int hi = cfg.m > 0 ? cfg.m : default_max;
    if (cfg.m_min > hi) throw std::invalid_argument("--m-min exceeds --m");
    std::vector<int> r;
    for (int m = cfg.m_min; m <= hi; ++m) r.push_back(m);
    return r;
}

finance::RateSeries load_series(const RunConfig& cfg) {
    if (cfg.data) return finance::load_cmt(*cfg.data);
    return finance::synthetic_cmt();
}

json report_json(const risk::RiskReport& r) {
    json j;
    j["schema"] = kReportSchema;
    j["method"] = risk::method_name(r.method);
    j["alpha"] = r.alpha;
    j["m"] = r.m;
    j["shots"] = r.shots;
    j["seed"] = r.seed;
    j["c"] = r.c;
    j["u"] = r.u;
    j["expectation"] = r.expectation;
    j["variance"] = r.variance;
    j["var"] = {{"index", r.var_index}, {"value", r.var_value}, {"probability", r.var_probability}};
    j["cvar"] = {{"value", r.cvar}, {"index", r.cvar_index}};
    j["bounds"] = {{"expectation", r.bounds.expectation},
                   {"variance", r.bounds.variance},
                   {"var", r.bounds.var},
                   {"cvar", r.bounds.cvar}};
    j["low_confidence"] = r.low_confidence;
    return j;
}

std::string circuit_name(const std::string& stem, int m) { return stem + "_m" + std::to_string(m) + ".circuit"; }

std::string gate_table(const std::vector<risk::GateCountRow>& rows) {
    std::ostringstream os;
    os << "m,cnots,single_qubit,qubits,ratio\n";
    for (const auto& r : rows)
        os << r.m << ',' << r.cnots << ',' << r.single_qubit << ',' << r.qubits << ',' << num(r.ratio) << '\n';
    return os.str();
}

// ---------------------------------------------------------------- tbill

int cmd_tbill(const RunConfig& cfg, Output& sink) {
    const double r = 0.02, dr = 0.0025, face = 100.0;
    const DiscreteDistribution dist({1.0 - cfg.p, cfg.p});
    const auto f = BitPolynomial::affine(0.0, {1.0});
    const auto ms = m_range(cfg, 4);

    std::ostringstream hist, table;
    hist << "m,y,estimate,count,frequency,probability\n";
    table << "m,M,modal_y,estimate,error,interval_low,interval_high,bound,mc_half_width,value_usd\n";
    std::vector<risk::GateCountRow> gates;
    for (int m : ms) {
        const auto problem = risk::expectation_problem(dist, f, {1.0, 0, 1}, m);
        const auto res = ae::run_ae(problem, cfg.shots, qsim::derive_seed(cfg.seed, m));
        for (std::uint64_t y = 0; y < res.M; ++y) {
            const auto it = res.counts.counts.find(y);
            const std::uint64_t count = it == res.counts.counts.end() ? 0 : it->second;
            hist << m << ',' << y << ',' << num(ae::estimate_of(y, m)) << ',' << count << ','
                 << num(double(count) / double(cfg.shots)) << ',' << num(res.probabilities.at(y)) << '\n';
        }
        const double M = double(res.M);
        table << m << ',' << res.M << ',' << res.modal_y << ',' << num(res.estimate) << ','
              << num(std::abs(res.estimate - cfg.p)) << ',' << num(res.interval.low) << ','
              << num(res.interval.high) << ',' << num(ae::standard_bound(m)) << ','
              << num(1.96 * std::sqrt(cfg.p * (1 - cfg.p) / M)) << ','
              << num(finance::tbill_value(res.estimate, r, dr, face).value) << '\n';
        if (cfg.report_gates) {
            const auto circuit = circuits::amplitude_estimation_circuit(problem);
            const auto rep = circuits::cnot_count(circuit);
            risk::GateCountRow row{m, rep.cnot_total, rep.single_qubit_total, circuit.num_qubits() + rep.ancillas, 0.0};
            if (!gates.empty() && gates.back().cnots) row.ratio = double(row.cnots) / double(gates.back().cnots);
            gates.push_back(row);
        }
        if (cfg.dump_circuit && m == ms.back()) {
            sink.write(circuit_name("tbill", m), circuits::to_text(circuits::amplitude_estimation_circuit(problem)));
        }
    }
    sink.write("tbill_errors.csv", table.str());
    sink.write("tbill_histograms.csv", hist.str());
    if (cfg.report_gates) sink.write("tbill_gates.csv", gate_table(gates));
    return 0;
}

// ------------------------------------------------------------ portfolio

int cmd_portfolio(const RunConfig& cfg, Output& sink) {
    const auto series = load_series(cfg);
    finance::TwoAssetConfig tc;
    tc.rate_scale = cfg.rate_scale;
    const auto model = finance::build_two_asset_model(series, tc);
    const auto ms = m_range(cfg, 5);

    {
        std::ostringstream os;
        os << "row,component_1,component_2\n";
        os << "1y," << num(model.w[0][0]) << ',' << num(model.w[0][1]) << '\n';
        os << "2y," << num(model.w[1][0]) << ',' << num(model.w[1][1]) << '\n';
        os << "eigenvalue," << num(model.pca.eigenvalues[0]) << ',' << num(model.pca.eigenvalues[1]) << '\n';
        os << "explained," << num(model.pca.explained[0]) << ',' << num(model.pca.explained[1]) << '\n';
        sink.write("pca.csv", os.str());

        const auto curve = finance::pca(finance::daily_differences(series));
        std::ostringstream oc;
        oc << "component,eigenvalue,explained\n";
        for (std::size_t k = 0; k < curve.eigenvalues.size(); ++k)
            oc << k + 1 << ',' << num(curve.eigenvalues[k]) << ',' << num(curve.explained[k]) << '\n';
        sink.write("pca_curve.csv", oc.str());
    }
    {
        std::vector<std::size_t> rank(model.order.size());
        for (std::size_t k = 0; k < model.order.size(); ++k) rank[model.order[k]] = k;
        const auto table = model.f.table();
        const int xb = tc.x_bits;
        std::ostringstream os;
        os << "index,x,y,shift,twist,probability,f,value_usd,rank\n";
        for (std::size_t i = 0; i < model.joint.size(); ++i) {
            const auto x = i & ((std::size_t{1} << xb) - 1), y = i >> xb;
            os << i << ',' << x << ',' << y << ',' << num(tc.sg.at(double(x))) << ',' << num(tc.tg.at(double(y)))
               << ',' << num(model.joint.prob(i)) << ',' << num(table[i]) << ',' << num(model.lin.to_usd(table[i]))
               << ',' << rank[i] << '\n';
        }
        sink.write("distribution.csv", os.str());
    }

    const auto f_sorted = BitPolynomial::from_table(model.sorted.values());
    const auto oracle = risk::classical_oracle(model.sorted, f_sorted, cfg.alpha);
    auto usd = [&](const risk::RiskReport& r) {
        const double e = model.lin.to_usd(oracle.expectation);
        return json{{"expectation", model.lin.to_usd(r.expectation)},
                    {"var", model.lin.to_usd(r.var_value)},
                    {"cvar", model.lin.to_usd(r.cvar)},
                    {"var_loss", e - model.lin.to_usd(r.var_value)},
                    {"cvar_loss", e - model.lin.to_usd(r.cvar)}};
    };
    {
        auto j = report_json(oracle);
        j["usd"] = usd(oracle);
        sink.write("risk_oracle.json", j.dump(2) + "\n");
    }

    std::ostringstream conv;
    conv << "m,M,c,var_index,var_value,oracle_var_value,relative_error,var_probability,low_confidence,var_loss_usd\n";
    for (int m : ms) {
        const double c = scaling_for(cfg, m);
        risk::AESettings s;
        s.m = m;
        s.shots = cfg.shots;
        s.seed = qsim::derive_seed(cfg.seed, m);
        const auto q = risk::quantum_risk(model.sorted, f_sorted, cfg.alpha, {c, cfg.u, 1}, s);
        auto jq = report_json(q);
        jq["usd"] = usd(q);
        sink.write("risk_m" + std::to_string(m) + "_quantum.json", jq.dump(2) + "\n");

        const std::uint64_t samples = std::uint64_t{1} << m;
        auto mc = risk::monte_carlo_risk(model.sorted, f_sorted, cfg.alpha, samples, qsim::derive_seed(cfg.seed, 100 + m));
        mc.m = m;
        auto jm = report_json(mc);
        jm["usd"] = usd(mc);
        sink.write("risk_m" + std::to_string(m) + "_monte_carlo.json", jm.dump(2) + "\n");

        const double rel = oracle.var_value != 0 ? std::abs(q.var_value - oracle.var_value) / std::abs(oracle.var_value)
                                                 : std::abs(q.var_value);
        conv << m << ',' << samples << ',' << num(c) << ',' << q.var_index << ',' << num(q.var_value) << ','
             << num(oracle.var_value) << ',' << num(rel) << ',' << num(q.var_probability) << ','
             << (q.low_confidence ? 1 : 0) << ',' << num(usd(q)["var_loss"].get<double>()) << '\n';
    }
    sink.write("var_convergence.csv", conv.str());

    if (cfg.report_gates) sink.write("gates.csv", gate_table(risk::var_gate_counts(model.sorted, oracle.var_index, ms)));
    if (cfg.dump_circuit) {
        const int m = ms.back();
        sink.write(circuit_name("var", m),
                   circuits::to_text(circuits::amplitude_estimation_circuit(risk::var_problem(model.sorted, oracle.var_index, m))));
    }
    return 0;
}

// ---------------------------------------------------------- noise-sweep

int cmd_noise_sweep(const RunConfig& cfg, Output& sink) {
    const auto model = finance::build_two_asset_model(load_series(cfg), [&] {
        finance::TwoAssetConfig tc;
        tc.rate_scale = cfg.rate_scale;
        return tc;
    }());
    const int m = cfg.m > 0 ? cfg.m : 2;
    const auto problem = risk::expectation_problem(model.joint, model.f, {scaling_for(cfg, m), cfg.u, 1}, m);
    const auto ideal = ae::estimate_from_probabilities(ae::outcome_distribution(problem), m);

    auto gammas = cfg.gamma;
    if (gammas.empty()) gammas = {0.0, 5e-6, 1e-5, 2e-5, 4e-5};
    auto alphas = cfg.crosstalk;
    if (alphas.empty()) alphas = {0.0, -0.0075, -0.015, -0.0225, -0.03};

    qsim::NoiseModel base;
    base.t_cnot = cfg.t_cnot;
    base.trajectories = cfg.trajectories;
    base.seed = cfg.seed;

    std::vector<risk::NoiseCell> cells;
    if (cfg.full_grid) {
        std::uint64_t k = 0;
        for (double g : gammas)
            for (double a : alphas) {
                auto noise = base;
                noise.gamma = g;
                noise.crosstalk = a;
                noise.seed = qsim::derive_seed(cfg.seed, k++);
                cells.push_back(risk::noisy_hit_probability(problem, ideal.estimate, noise));
            }
    } else {
        cells = risk::noise_sweep(problem, ideal.estimate, gammas, alphas, base);
    }
    std::stable_sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) {
        if (a.gamma != b.gamma) return a.gamma < b.gamma;
        return std::abs(a.crosstalk) < std::abs(b.crosstalk);
    });

    std::ostringstream os;
    os << "gamma,relaxation_per_cnot,crosstalk,target,p_target,standard_error,trajectories\n";
    for (const auto& c : cells) {
        os << num(c.gamma) << ',' << num(1.0 - std::exp(-c.gamma * cfg.t_cnot)) << ',' << num(c.crosstalk) << ','
           << num(ideal.estimate) << ',' << num(c.hit_probability) << ',' << num(c.standard_error) << ','
           << c.trajectories << '\n';
    }
    sink.write("noise_sweep.csv", os.str());
    if (cfg.report_gates) {
        const auto rep = circuits::cnot_count(circuits::amplitude_estimation_circuit(problem));
        std::ostringstream g;
        g << "m,cnots,single_qubit\n" << m << ',' << rep.cnot_total << ',' << rep.single_qubit_total << '\n';
        sink.write("noise_gates.csv", g.str());
    }
    if (cfg.dump_circuit) {
        sink.write(circuit_name("expectation_decomposed", m),
                   circuits::to_text(circuits::decompose(circuits::amplitude_estimation_circuit(problem))));
    }
    return 0;
}

// ---------------------------------------------------------- convergence

int cmd_convergence(const RunConfig& cfg, Output& sink) {
    std::vector<double> p;
    int n = 0;
    if (cfg.problem == "tbill") {
        p = {1.0 - cfg.p, cfg.p};
        n = 1;
    } else if (cfg.problem == "binomial") {
        n = 3;
        for (int k = 0; k < 8; ++k)
            p.push_back(std::tgamma(8) / (std::tgamma(k + 1) * std::tgamma(8 - k)) * std::pow(cfg.p, k) *
                        std::pow(1 - cfg.p, 7 - k));
    } else {
        throw std::invalid_argument("unknown --problem '" + cfg.problem + "'");
    }
    const DiscreteDistribution dist(p);
    std::vector<double> w(n);
    const double top = std::ldexp(1.0, n) - 1.0;
    for (int j = 0; j < n; ++j) w[j] = std::ldexp(1.0, j) / top;
    const auto f = BitPolynomial::affine(0.0, w);

    RunConfig local = cfg;
    if (cfg.m_min == 1 && cfg.m == 0) local.m_min = cfg.problem == "tbill" ? 1 : 4;
    const auto ms = m_range(local, cfg.problem == "tbill" ? 6 : 9);
    const auto st = risk::convergence_study(dist, f, cfg.u, ms, cfg.trials, cfg.seed,
                                            cfg.problem == "tbill" ? cfg.shots : 1);
    std::ostringstream os;
    os << "m,M,c,quantum_error,quantum_actual_error,mc_half_width,mc_error\n";
    for (const auto& r : st.rows)
        os << r.m << ',' << r.M << ',' << num(r.c) << ',' << num(r.quantum_error) << ','
           << num(r.quantum_actual_error) << ',' << num(r.mc_half_width) << ',' << num(r.mc_error) << '\n';
    sink.write("convergence.csv", os.str());
    std::ostringstream sl;
    sl << "series,slope,target\n";
    sl << "quantum," << num(st.quantum_slope) << ',' << num(-approx::convergence_rate(cfg.u)) << '\n';
    sl << "quantum_actual," << num(st.quantum_actual_slope) << ",\n";
    sl << "monte_carlo," << num(st.mc_slope) << ",-0.5\n";
    sink.write("convergence_slopes.csv", sl.str());
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Quantum amplitude-estimation risk toolkit"};
    app.require_subcommand(1);

    auto common = [&](CLI::App* sub) {
        sub->add_option("--m", cfg.m, "Evaluation qubits (largest m of a sweep)")->check(CLI::Range(1, 12));
        sub->add_option("--m-min", cfg.m_min, "Smallest m of a sweep")->check(CLI::Range(1, 12));
        sub->add_option("--shots", cfg.shots, "Measurement shots per AE run")->check(CLI::Range(1, 100000000));
        sub->add_option("--seed", cfg.seed, "Master seed");
        sub->add_option("--c", cfg.c, "Scaling parameter c; 0 picks the optimum for each M")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--u", cfg.u, "Taylor order of the objective")->check(CLI::Range(0, 4));
        sub->add_option("--out", cfg.out, "Output directory (default: tables on stdout)");
        sub->add_flag("--report-gates", cfg.report_gates, "Also write CNOT counts");
        sub->add_flag("--dump-circuit", cfg.dump_circuit, "Also write the largest circuit in text form");
    };
    auto data = [&](CLI::App* sub) {
        auto* d = sub->add_option("--data", cfg.data, "CMT rates CSV (date,0.25,...,30)")->check(CLI::ExistingFile);
        auto* s = sub->add_flag("--synthetic", cfg.synthetic, "Use the bundled synthetic rate history");
        d->excludes(s);
        sub->add_option("--rate-scale", cfg.rate_scale, "Rate units of the shift/twist grids (0.01 for percent points)")
            ->check(CLI::PositiveNumber);
    };

    auto* tbill = app.add_subcommand("tbill", "One-qubit T-bill: AE histograms and the error table per m");
    common(tbill);
    tbill->add_option("--p", cfg.p, "Probability that rates stay put")->check(CLI::Range(0.0, 1.0));

    auto* portfolio = app.add_subcommand("portfolio", "Two-asset portfolio: PCA, discretization, risk reports per m");
    common(portfolio);
    data(portfolio);
    portfolio->add_option("--alpha", cfg.alpha, "VaR confidence level")->check(CLI::Range(0.0, 1.0));

    auto* noise = app.add_subcommand("noise-sweep", "P[ideal estimate] of the m=2 expectation circuit under noise");
    common(noise);
    data(noise);
    noise->add_option("--gamma", cfg.gamma, "Relaxation rates in 1/ns (comma list)")->delimiter(',')->check(CLI::NonNegativeNumber);
    noise->add_option("--crosstalk", cfg.crosstalk, "Cross-talk strengths (comma list)")->delimiter(',')->check(CLI::Range(-1.0, 1.0));
    noise->add_option("--t-cnot", cfg.t_cnot, "CNOT duration in ns")->check(CLI::PositiveNumber);
    noise->add_option("--trajectories", cfg.trajectories, "Trajectories per cell")->check(CLI::Range(1, 10000000));
    noise->add_flag("--full-grid", cfg.full_grid, "Every (gamma, crosstalk) pair instead of the two axes");

    auto* conv = app.add_subcommand("convergence", "Median AE error against M, next to Monte Carlo");
    common(conv);
    conv->add_option("--problem", cfg.problem, "tbill or binomial")->check(CLI::IsMember({"tbill", "binomial"}));
    conv->add_option("--trials", cfg.trials, "Trials per M")->check(CLI::Range(1, 100000));
    conv->add_option("--p", cfg.p, "Success probability of the problem")->check(CLI::Range(0.0, 1.0));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        Output sink(cfg.out, out);
        if (tbill->parsed()) return cmd_tbill(cfg, sink);
        if (portfolio->parsed()) return cmd_portfolio(cfg, sink);
        if (noise->parsed()) return cmd_noise_sweep(cfg, sink);
        if (conv->parsed()) return cmd_convergence(cfg, sink);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace qrisk::cli
