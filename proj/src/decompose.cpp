// Gate-level expansion into {single-qubit gates, CNOT} and the text format.
//
// Pinned rules (k = number of controls):
//   X, k=1            CNOT
//   X, k=2            Toffoli, 6 CNOTs (H/T/T^dag network)
//   X, k>=3           V-chain of 2k-3 Toffolis on k-2 ancillas
//   other, k>=2       AND of the controls into k-1 ancillas, single-controlled
//                     base gate on the last ancilla, uncompute
//   CRy               Ry(t/2), CNOT, Ry(-t/2), CNOT
//   CZ                H, CNOT, H
//   C-phase           P(l/2) on control, CNOT, P(-l/2), CNOT, P(l/2)
//   SWAP (k controls) CNOT(b,a), X on b controlled by a and the k controls, CNOT(b,a)

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include "qrisk/circuits.hpp"

namespace qrisk::circuits {

namespace {

using qsim::GateKind;
using qsim::GateOp;

bool is_diagonal_u3(const GateOp& g) { return g.kind == GateKind::U3 && g.params[0] == 0.0; }

int ancillas_needed(const GateOp& g) {
    const int k = static_cast<int>(g.controls.size());
    if (g.kind == GateKind::Swap) {
        return k + 1 >= 3 ? k - 1 : 0;
    }
    if (g.kind == GateKind::X) return k >= 3 ? k - 2 : 0;
    return k >= 2 ? k - 1 : 0;
}

class Expander {
  public:
    Expander(Circuit& out, int ancilla_first) : out_(out), anc_(ancilla_first) {}

    void gate(const GateOp& g) {
        const int k = static_cast<int>(g.controls.size());
        switch (g.kind) {
            case GateKind::Permutation:
                throw std::invalid_argument("decompose: permutation oracles have no gate-level expansion");
            case GateKind::Swap: {
                const int a = g.targets[0], b = g.targets[1];
                out_.add(qsim::cnot(b, a));
                std::vector<int> c = g.controls;
                c.push_back(a);
                mcx(c, b);
                out_.add(qsim::cnot(b, a));
                return;
            }
            case GateKind::X: mcx(g.controls, g.targets[0]); return;
            default: break;
        }
        if (k == 0) {
            out_.add(g);
            return;
        }
        if (k == 1) {
            controlled_base(g, g.controls[0]);
            return;
        }
        // AND-chain into k-1 ancillas.
        std::vector<GateOp> chain;
        chain.push_back({GateKind::X, {anc_}, {g.controls[0], g.controls[1]}, {}, {}});
        for (int i = 2; i < k; ++i) chain.push_back({GateKind::X, {anc_ + i - 1}, {anc_ + i - 2, g.controls[i]}, {}, {}});
        for (const auto& t : chain) toffoli(t.controls[0], t.controls[1], t.targets[0]);
        controlled_base(g, anc_ + k - 2);
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) toffoli(it->controls[0], it->controls[1], it->targets[0]);
    }

  private:
    void mcx(const std::vector<int>& c, int t) {
        const int k = static_cast<int>(c.size());
        if (k == 0) {
            out_.add(qsim::x(t));
        } else if (k == 1) {
            out_.add(qsim::cnot(c[0], t));
        } else if (k == 2) {
            toffoli(c[0], c[1], t);
        } else {
            std::vector<std::array<int, 3>> chain;
            chain.push_back({c[0], c[1], anc_});
            for (int i = 2; i < k - 1; ++i) chain.push_back({anc_ + i - 2, c[i], anc_ + i - 1});
            for (const auto& s : chain) toffoli(s[0], s[1], s[2]);
            toffoli(anc_ + k - 3, c[k - 1], t);
            for (auto it = chain.rbegin(); it != chain.rend(); ++it) toffoli((*it)[0], (*it)[1], (*it)[2]);
        }
    }

    void toffoli(int a, int b, int t) {
        const double q = std::numbers::pi / 4;
        out_.add(qsim::h(t));
        out_.add(qsim::cnot(b, t));
        out_.add(qsim::phase(-q, t));
        out_.add(qsim::cnot(a, t));
        out_.add(qsim::phase(q, t));
        out_.add(qsim::cnot(b, t));
        out_.add(qsim::phase(-q, t));
        out_.add(qsim::cnot(a, t));
        out_.add(qsim::phase(q, b));
        out_.add(qsim::phase(q, t));
        out_.add(qsim::h(t));
        out_.add(qsim::cnot(a, b));
        out_.add(qsim::phase(q, a));
        out_.add(qsim::phase(-q, b));
        out_.add(qsim::cnot(a, b));
    }

    void controlled_base(const GateOp& g, int c) {
        const int t = g.targets[0];
        switch (g.kind) {
            case GateKind::Z:
                out_.add(qsim::h(t));
                out_.add(qsim::cnot(c, t));
                out_.add(qsim::h(t));
                return;
            case GateKind::Ry:
                out_.add(qsim::ry(g.params[0] / 2, t));
                out_.add(qsim::cnot(c, t));
                out_.add(qsim::ry(-g.params[0] / 2, t));
                out_.add(qsim::cnot(c, t));
                return;
            default:
                if (is_diagonal_u3(g)) {
                    const double lam = g.params[1] + g.params[2];
                    out_.add(qsim::phase(lam / 2, c));
                    out_.add(qsim::cnot(c, t));
                    out_.add(qsim::phase(-lam / 2, t));
                    out_.add(qsim::cnot(c, t));
                    out_.add(qsim::phase(lam / 2, t));
                    return;
                }
                throw std::invalid_argument("decompose: no controlled expansion for " +
                                            std::string(qsim::gate_name(g.kind)));
        }
    }

    Circuit& out_;
    int anc_;
};

std::string count_key(const GateOp& g) {
    const std::size_t k = g.controls.size();
    std::string prefix = k == 0 ? "" : k == 1 ? "C" : k == 2 ? "CC" : "C" + std::to_string(k);
    return prefix + std::string(qsim::gate_name(g.kind));
}

}  // namespace

Circuit decompose(const Circuit& circuit) {
    int extra = 0;
    for (const auto& g : circuit.gates()) extra = std::max(extra, ancillas_needed(g));
    const int n = circuit.num_qubits();
    Circuit out(n + extra);
    for (const auto& r : circuit.registers()) out.add_register(r.name, r.first, r.size);
    if (extra > 0) out.add_register("decomposition_ancilla", n, extra);
    out.add_global_phase(circuit.global_phase());
    Expander ex(out, n);
    for (const auto& g : circuit.gates()) ex.gate(g);
    return out;
}

ResourceReport cnot_count(const Circuit& circuit) {
    ResourceReport r;
    for (const auto& g : circuit.gates()) ++r.gate_counts[count_key(g)];
    const Circuit d = decompose(circuit);
    for (const auto& g : d.gates()) {
        if (qsim::is_cnot(g)) {
            ++r.cnot_total;
        } else {
            ++r.single_qubit_total;
        }
    }
    r.ancillas = d.num_qubits() - circuit.num_qubits();
    return r;
}

// ---- text form -------------------------------------------------------------

std::string to_text(const Circuit& circuit) {
    std::ostringstream os;
    char buf[64];
    os << "qubits " << circuit.num_qubits() << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", circuit.global_phase());
    os << "phase " << buf << '\n';
    for (const auto& r : circuit.registers()) os << "register " << r.name << ' ' << r.first << ' ' << r.size << '\n';
    for (const auto& g : circuit.gates()) {
        os << qsim::gate_name(g.kind);
        for (int t : g.targets) os << ' ' << t;
        os << " ;";
        for (int c : g.controls) os << ' ' << c;
        os << " ;";
        if (g.kind == GateKind::Permutation) {
            for (auto v : g.table) os << ' ' << v;
        } else {
            for (double p : g.params) {
                std::snprintf(buf, sizeof buf, "%.17g", p);
                os << ' ' << buf;
            }
        }
        os << '\n';
    }
    return os.str();
}

namespace {

GateKind parse_kind(const std::string& s, int line) {
    for (GateKind k : {GateKind::H, GateKind::X, GateKind::Z, GateKind::Ry, GateKind::U2, GateKind::U3, GateKind::Swap,
                       GateKind::Permutation}) {
        if (qsim::gate_name(k) == s) return k;
    }
    throw std::invalid_argument("line " + std::to_string(line) + ": unknown gate '" + s + "'");
}

}  // namespace

Circuit from_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    std::optional<Circuit> c;
    auto fail = [&](const std::string& msg) -> void {
        throw std::invalid_argument("line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string head;
        ls >> head;
        if (head == "qubits") {
            int n = -1;
            if (c || !(ls >> n)) fail("bad or repeated qubits header");
            c.emplace(n);
            continue;
        }
        if (!c) fail("missing qubits header");
        if (head == "phase") {
            double p;
            if (!(ls >> p)) fail("bad phase");
            c->add_global_phase(p);
            continue;
        }
        if (head == "register") {
            std::string name;
            int first, size;
            if (!(ls >> name >> first >> size)) fail("bad register line");
            c->add_register(name, first, size);
            continue;
        }
        GateOp g;
        g.kind = parse_kind(head, lineno);
        std::string rest;
        std::getline(ls, rest);
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (;;) {
            const auto pos = rest.find(';', start);
            fields.push_back(rest.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        if (fields.size() != 3) fail("expected 'KIND targets ; controls ; params'");
        std::istringstream ts(fields[0]), cs(fields[1]), ps(fields[2]);
        for (int q; ts >> q;) g.targets.push_back(q);
        if (!ts.eof()) fail("bad target list");
        for (int q; cs >> q;) g.controls.push_back(q);
        if (!cs.eof()) fail("bad control list");
        if (g.kind == GateKind::Permutation) {
            for (std::uint64_t v; ps >> v;) g.table.push_back(v);
        } else {
            for (double v; ps >> v;) g.params.push_back(v);
        }
        if (!ps.eof()) fail("bad parameter list");
        try {
            c->add(std::move(g));
        } catch (const std::exception& e) {
            fail(e.what());
        }
    }
    if (!c) throw std::invalid_argument("empty circuit text");
    return *std::move(c);
}

}  // namespace qrisk::circuits
