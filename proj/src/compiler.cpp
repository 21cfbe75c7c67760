#include "sdq/compiler.hpp"

#include "sdq/device.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace sdq {

namespace {

const cplx I{0.0, 1.0};

std::string_view trim(std::string_view s) {
    size_t a = 0, b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return s.substr(a, b - a);
}

std::vector<std::string_view> words(std::string_view s) {
    std::vector<std::string_view> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

double to_double(std::string_view w, int line) {
    std::string s(w);
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) throw ParseError(line, 1, "bad number '" + s + "'");
    return v;
}

int to_index(std::string_view w, int line) {
    std::string s(w);
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError(line, 1, "bad qubit index '" + s + "'");
    return std::stoi(s);
}

std::string full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double wrap_2pi(double a) {
    double r = std::fmod(a, 2 * kPi);
    if (r < 0) r += 2 * kPi;
    if (r >= 2 * kPi - 1e-13 || r < 1e-13) r = 0.0;
    return r;
}

// Simultaneous substitution of parameter names inside statements.
ExprPtr subst(const ExprPtr& e, const std::map<std::string, ExprPtr>& env) {
    switch (e->kind) {
        case Expr::Kind::Num: return e;
        case Expr::Kind::Var: {
            auto it = env.find(e->name);
            return it == env.end() ? e : it->second;
        }
        case Expr::Kind::Neg: return neg(subst(e->lhs, env));
        default: return binary(e->kind, subst(e->lhs, env), subst(e->rhs, env));
    }
}

Stmt subst(const Stmt& s, const std::map<std::string, ExprPtr>& env) {
    Stmt out = s;
    if (out.operand) out.operand = subst(out.operand, env);
    for (auto& a : out.args) a = subst(a, env);
    if (out.cond.lhs) out.cond.lhs = subst(out.cond.lhs, env);
    if (out.cond.rhs) out.cond.rhs = subst(out.cond.rhs, env);
    for (auto& b : out.body) b = subst(b, env);
    return out;
}

const char* kSCTR =
    "# Scatter photon q and return it to the ring\n"
    "define SCTR q:\n"
    "\tOPEN t_q-Δt/2\n"
    "\tCLOS t_q+Δt/2\n"
    "\tOPEN N*Δt+t_q-Δt/2\n"
    "\tCLOS N*Δt+t_q+Δt/2\n";

// m3 == 0 leaves S*sigma_y-type byproducts: a |g0> pass then a |g1> pass.
const char* kCORR =
    "# Remove the byproduct of a GATE\n"
    "define CORR q m1 m2 m3:\n"
    "\tif m3 == 0:\n"
    "\t\tINIT |g0>\n"
    "\t\tSCTR q\n"
    "\t\tINIT |g1>\n"
    "\t\tSCTR q\n"
    "\tif m1 != m2:\n"
    "\t\tINIT |g1>\n"
    "\t\tSCTR q\n"
    "\t\tSCTR q\n";

const char* kGATE =
    "# Z Ry(θ3) Rx(θ2) Ry(θ1) Z on photon q by three teleported rotations\n"
    "define GATE q θ3 θ2 θ1:\n"
    "\tINIT |+>\n"
    "\tSCTR q\n"
    "\tROTX -θ1\n"
    "\tMEAS m1\n"
    "\tINIT |+>\n"
    "\tSCTR q\n"
    "\tROTX -(θ2+π*(1-m1))*(-1)^m1\n"
    "\tMEAS m2\n"
    "\tINIT |+>\n"
    "\tSCTR q\n"
    "\tROTX -(θ3+π*(1-m2))*(-1)^(m1+m2+1)\n"
    "\tMEAS m3\n"
    "\tCORR q m1 m2 m3\n";

const char* kLOAD =
    "# Swap photon q into the atom for readout\n"
    "define LOAD q:\n"
    "\tSCTR q\n"
    "\tROTX π\n"
    "\tROTY π/2\n"
    "\tSCTR q\n"
    "\tROTX π\n"
    "\tROTY π/2\n"
    "\tSCTR q\n"
    "\tROTX -π/2\n";

const char* kCTRZ =
    "# Controlled-σz between photons q1, q2\n"
    "define CTRZ q1 q2:\n"
    "\tGATE q1 0 3π/4 -π/2\n"
    "\tGATE q2 0 3π/4 -π/2\n"
    "\tINIT |+>\n"
    "\tSCTR q1\n"
    "\tROTY -π/2\n"
    "\tSCTR q2\n"
    "\tROTY π/2\n"
    "\tSCTR q1\n"
    "\tMEAS m\n"
    "\tGATE q1 m*π 3π/2 (-1)^m*π/4\n"
    "\tGATE q2 π/2 3π/4 0\n";

// The atom holds (Z B)^-1 q1 after the first swap; Rx(-π/2)Ry(-π/4) = Z B
// restores it, Rx(-π)Ry(-π/4)Rx(π/2) = B Z prepares the swap back.
const char* kCZSW =
    "# Controlled-σz through the atom: swap q1 in, scatter q2, swap back\n"
    "define CZSW q1 q2:\n"
    "\tGATE q2 0 3π/4 -π/2\n"
    "\tSCTR q1\n"
    "\tROTX π\n"
    "\tROTY π/2\n"
    "\tSCTR q1\n"
    "\tROTX π\n"
    "\tROTY π/2\n"
    "\tSCTR q1\n"
    "\tROTY -π/4\n"
    "\tROTX -π/2\n"
    "\tSCTR q2\n"
    "\tROTX π/2\n"
    "\tROTY -π/4\n"
    "\tROTX -π\n"
    "\tSCTR q1\n"
    "\tROTX π\n"
    "\tROTY π/2\n"
    "\tSCTR q1\n"
    "\tROTX π\n"
    "\tROTY π/2\n"
    "\tSCTR q1\n"
    "\tGATE q2 π/2 3π/4 0\n";

const char* kGATEF =
    "# GATE without correction; outcomes go to r1 r2 r3 for later gates\n"
    "define GATEF q θ3 θ2 θ1 r1 r2 r3:\n"
    "\tINIT |+>\n"
    "\tSCTR q\n"
    "\tROTX -θ1\n"
    "\tMEAS r1\n"
    "\tINIT |+>\n"
    "\tSCTR q\n"
    "\tROTX -(θ2+π*(1-r1))*(-1)^r1\n"
    "\tMEAS r2\n"
    "\tINIT |+>\n"
    "\tSCTR q\n"
    "\tROTX -(θ3+π*(1-r2))*(-1)^(r1+r2+1)\n"
    "\tMEAS r3\n";

const std::vector<std::pair<std::string, const char*>>& library() {
    static const std::vector<std::pair<std::string, const char*>> lib = {
        {"SCTR", kSCTR}, {"CORR", kCORR}, {"GATE", kGATE},  {"LOAD", kLOAD},
        {"CTRZ", kCTRZ}, {"CZSW", kCZSW}, {"GATEF", kGATEF}};
    return lib;
}

ExprPtr angle_expr(double v) {
    ExprPtr e = parse_expr(format_angle(v));
    return e;
}

// sum over outcomes of value(m) * prod_i (r_i or 1-r_i)
ExprPtr selector(const std::array<double, 8>& values, const std::array<std::string, 3>& regs) {
    bool same = true;
    for (double v : values) same &= std::abs(v - values[0]) < 1e-15;
    if (same) return angle_expr(values[0]);
    ExprPtr sum;
    for (int m = 0; m < 8; ++m) {
        if (values[size_t(m)] == 0.0) continue;
        ExprPtr term = angle_expr(values[size_t(m)]);
        for (int i = 0; i < 3; ++i) {
            int bit = (m >> (2 - i)) & 1;  // m = m1 m2 m3 as bits 2,1,0
            ExprPtr f = bit ? var(regs[size_t(i)]) : sub(num(1), var(regs[size_t(i)]));
            term = mul(term, f);
        }
        sum = sum ? add(sum, term) : term;
    }
    return sum ? sum : num(0);
}

}  // namespace

// ------------------------------------------------------------ circuits

CircuitSpec parse_circuit(std::string_view text) {
    CircuitSpec c;
    size_t pos = 0;
    int lineno = 0;
    int max_q = -1;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto w = words(line);
        CircuitOp op;
        op.line = lineno;
        if (w[0] == "single") {
            if (w.size() != 10) throw ParseError(lineno, 1, "single expects a qubit and 8 reals");
            op.kind = CircuitOp::Kind::single;
            op.q1 = to_index(w[1], lineno);
            for (int k = 0; k < 4; ++k)
                op.u(k / 2, k % 2) = cplx(to_double(w[size_t(2 + 2 * k)], lineno), to_double(w[size_t(3 + 2 * k)], lineno));
            if ((op.u.adjoint() * op.u - Gate2::Identity()).cwiseAbs().maxCoeff() > 1e-6)
                throw ParseError(lineno, 1, "matrix is not unitary");
            max_q = std::max(max_q, op.q1);
        } else if (w[0] == "cz") {
            if (w.size() != 3) throw ParseError(lineno, 1, "cz expects two qubits");
            op.kind = CircuitOp::Kind::cz;
            op.q1 = to_index(w[1], lineno);
            op.q2 = to_index(w[2], lineno);
            if (op.q1 == op.q2) throw ParseError(lineno, 1, "cz needs two distinct qubits");
            max_q = std::max({max_q, op.q1, op.q2});
        } else if (w[0] == "measure_all") {
            if (w.size() != 1) throw ParseError(lineno, 1, "measure_all takes no arguments");
            op.kind = CircuitOp::Kind::measure_all;
        } else {
            throw ParseError(lineno, 1, "unknown record '" + std::string(w[0]) + "'");
        }
        c.ops.push_back(op);
    }
    if (max_q >= 20) throw ParseError(lineno, 1, "too many qubits");
    c.n_qubits = max_q + 1;
    return c;
}

std::string print_circuit(const CircuitSpec& c) {
    std::string out;
    for (const CircuitOp& op : c.ops) {
        switch (op.kind) {
            case CircuitOp::Kind::single:
                out += "single " + std::to_string(op.q1);
                for (int k = 0; k < 4; ++k) {
                    cplx z = op.u(k / 2, k % 2);
                    out += " " + full(z.real()) + " " + full(z.imag());
                }
                out += "\n";
                break;
            case CircuitOp::Kind::cz: out += "cz " + std::to_string(op.q1) + " " + std::to_string(op.q2) + "\n"; break;
            case CircuitOp::Kind::measure_all: out += "measure_all\n"; break;
        }
    }
    return out;
}

CMat circuit_unitary(const CircuitSpec& c) {
    const Eigen::Index dim = Eigen::Index(1) << c.n_qubits;
    CMat u = CMat::Identity(dim, dim);
    for (const CircuitOp& op : c.ops) {
        if (op.kind == CircuitOp::Kind::single) {
            const Eigen::Index bit = Eigen::Index(1) << op.q1;
            for (Eigen::Index i = 0; i < dim; ++i) {
                if (i & bit) continue;
                Eigen::RowVectorXcd a = u.row(i), b = u.row(i | bit);
                u.row(i) = op.u(0, 0) * a + op.u(0, 1) * b;
                u.row(i | bit) = op.u(1, 0) * a + op.u(1, 1) * b;
            }
        } else if (op.kind == CircuitOp::Kind::cz) {
            const Eigen::Index mask = (Eigen::Index(1) << op.q1) | (Eigen::Index(1) << op.q2);
            for (Eigen::Index i = 0; i < dim; ++i)
                if ((i & mask) == mask) u.row(i) *= -1.0;
        }
    }
    return u;
}

CircuitSpec qft_circuit(int n, bool readout) {
    if (n < 1) throw std::invalid_argument("qft needs at least one photon");
    Gate2 h;
    h << 1, 1, 1, -1;
    h /= std::sqrt(2.0);
    auto phase = [](double t) {
        Gate2 p = Gate2::Identity();
        p(1, 1) = std::polar(1.0, t);
        return p;
    };
    std::vector<CircuitOp> raw;
    auto single = [&](const Gate2& u, int q) {
        CircuitOp op;
        op.q1 = q;
        op.u = u;
        raw.push_back(op);
    };
    auto cz = [&](int a, int b) {
        CircuitOp op;
        op.kind = CircuitOp::Kind::cz;
        op.q1 = a;
        op.q2 = b;
        raw.push_back(op);
    };
    auto cnot = [&](int c, int t) {
        single(h, t);
        cz(c, t);
        single(h, t);
    };
    for (int j = n - 1; j >= 0; --j) {
        single(h, j);
        for (int k = j - 1; k >= 0; --k) {
            // controlled phase by pi/2^(j-k), control k, target j
            const double t = kPi / double(1 << (j - k));
            single(phase(t / 2), k);
            cnot(k, j);
            single(phase(-t / 2), j);
            cnot(k, j);
            single(phase(t / 2), j);
        }
    }
    for (int a = 0, b = n - 1; a < b; ++a, --b) {
        cnot(a, b);
        cnot(b, a);
        cnot(a, b);
    }

    // merge runs of singles; pending gates on different photons commute
    CircuitSpec c;
    c.n_qubits = n;
    std::vector<std::optional<Gate2>> pending(static_cast<size_t>(n));
    auto flush = [&](int q) {
        auto& g = pending[size_t(q)];
        if (!g) return;
        if ((*g - Gate2::Identity()).cwiseAbs().maxCoeff() > 1e-14) {
            CircuitOp op;
            op.q1 = q;
            op.u = *g;
            c.ops.push_back(op);
        }
        g.reset();
    };
    for (const CircuitOp& op : raw) {
        if (op.kind == CircuitOp::Kind::single) {
            auto& g = pending[size_t(op.q1)];
            g = g ? Gate2(op.u * *g) : op.u;
        } else {
            flush(op.q1);
            flush(op.q2);
            c.ops.push_back(op);
        }
    }
    for (int q = 0; q < n; ++q) flush(q);
    if (readout) {
        CircuitOp m;
        m.kind = CircuitOp::Kind::measure_all;
        c.ops.push_back(m);
    }
    return c;
}

CMat qft_matrix(int n) {
    const Eigen::Index d = Eigen::Index(1) << n;
    CMat f(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index k = 0; k < d; ++k) f(j, k) = std::polar(1.0 / std::sqrt(double(d)), 2 * kPi * double((j * k) % d) / double(d));
    return f;
}

// ------------------------------------------------------------ single-qubit gates

Euler euler_yxy(const Gate2& u) {
    // Conjugating by W = Rx(pi/2) maps Ry(t) to Rz(t) and fixes Rx, so the
    // problem becomes Rz(c) Rx(b) Rz(a) = W U W^dag.
    const Gate2 w = Rx(kPi / 2);
    Gate2 m = w * u * w.adjoint();
    cplx det = m.determinant();
    Gate2 v = m / std::sqrt(det);  // SU(2)
    double b = 2.0 * std::atan2(std::abs(v(1, 0)), std::abs(v(0, 0)));
    double s = std::abs(v(0, 0)) > 1e-12 ? -2.0 * std::arg(v(0, 0)) : 0.0;      // a + c
    double d = std::abs(v(1, 0)) > 1e-12 ? 2.0 * std::arg(I * v(1, 0)) : 0.0;  // c - a
    double a, c;
    if (std::abs(v(1, 0)) <= 1e-12) {
        a = 0.0;
        c = s;
        b = 0.0;
    } else if (std::abs(v(0, 0)) <= 1e-12) {
        a = 0.0;
        c = d;
        b = kPi;
    } else {
        a = (s - d) / 2;
        c = (s + d) / 2;
    }
    Euler e;
    e.theta1 = wrap_2pi(a);
    e.theta2 = b;
    e.theta3 = wrap_2pi(c);
    Gate2 r = Ry(e.theta3) * Rx(e.theta2) * Ry(e.theta1);
    e.phase = std::arg((r.adjoint() * u).trace());
    return e;
}

Euler compile_gate_angles(const Gate2& u) {
    const Gate2 zi = Rz(-kPi / 4);
    return euler_yxy(zi * u * zi);
}

Gate2 gate_operator(double t1, double t2, double t3) {
    const Gate2 z = Rz(kPi / 4);
    return z * Ry(t3) * Rx(t2) * Ry(t1) * z;
}

std::string format_angle(double v) {
    if (v == 0.0) return "0.000";
    std::string s = format_number(v);
    if (s.find_first_of("eE") != std::string::npos) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.20f", v);
        s = buf;
        while (s.back() == '0') s.pop_back();
    }
    size_t dot = s.find('.');
    if (dot == std::string::npos) {
        s += ".";
        dot = s.size() - 1;
    }
    while (s.size() - dot - 1 < 3) s += "0";
    return s;
}

Stmt compile_gate(const Gate2& u, int q) {
    Euler e = compile_gate_angles(u);
    return make_call("GATE", {var(photon_name(q)), angle_expr(e.theta3), angle_expr(e.theta2), angle_expr(e.theta1)});
}

double adaptive_theta2(double theta2, int m1) { return m1 == 0 ? theta2 + kPi : -theta2; }

double adaptive_theta3(double theta3, int m1, int m2) {
    double sign = ((m1 ^ m2 ^ 1) & 1) ? -1.0 : 1.0;
    return sign * (theta3 + kPi * (1 - m2));
}

Gate2 gate_branch_operator(double t1, double t2, double t3, int m1, int m2, int m3) {
    return teleport_operator(adaptive_theta3(t3, m1, m2), m3) * teleport_operator(adaptive_theta2(t2, m1), m2) *
           teleport_operator(t1, m1);
}

Gate2 byproduct(int m1, int m2, int m3) {
    return gate_branch_operator(0, 0, 0, m1, m2, m3) * gate_operator(0, 0, 0).inverse();
}

char pauli_letter(Pauli p) {
    switch (p) {
        case Pauli::I: return 'I';
        case Pauli::X: return 'X';
        case Pauli::Y: return 'Y';
        case Pauli::Z: return 'Z';
    }
    return '?';
}

Pauli pauli_error(int m1, int m2, int m3) {
    static const Pauli table[8] = {Pauli::Y, Pauli::I, Pauli::X, Pauli::Z, Pauli::X, Pauli::Z, Pauli::Y, Pauli::I};
    return table[((m1 & 1) << 2) | ((m2 & 1) << 1) | (m3 & 1)];
}

std::vector<Stmt> correction_sequence(Pauli e, int q) {
    auto sctr = [&] { return make_call("SCTR", {var(photon_name(q))}); };
    std::vector<Stmt> out;
    switch (e) {
        case Pauli::I: break;
        case Pauli::X:
            out.push_back(make_init(AtomInit::g0));
            out.push_back(sctr());
            break;
        case Pauli::Z:
            out.push_back(make_init(AtomInit::g1));
            out.push_back(sctr());
            out.push_back(sctr());
            break;
        case Pauli::Y:
            out.push_back(make_init(AtomInit::g1));
            out.push_back(sctr());
            out.push_back(sctr());
            out.push_back(make_init(AtomInit::g0));
            out.push_back(sctr());
            break;
    }
    return out;
}

// ------------------------------------------------------------ two-qubit gates

std::vector<Stmt> compile_cz(int q1, int q2, CzStrategy strategy) {
    if (q1 == q2) throw std::invalid_argument("cz needs two distinct photons");
    Program lib = library_program({"SCTR", "CORR", "GATE", "CTRZ", "CZSW"});
    const Macro* m = lib.find(strategy == CzStrategy::measured ? "CTRZ" : "CZSW");
    std::map<std::string, ExprPtr> env{{"q1", var(photon_name(q1))}, {"q2", var(photon_name(q2))}};
    std::vector<Stmt> out;
    for (const Stmt& s : m->body) out.push_back(subst(s, env));
    return out;
}

// ------------------------------------------------------------ whole circuits

std::string macro_library(const std::vector<std::string>& names) {
    std::string out;
    for (auto& [name, text] : library()) {
        bool want = names.empty();
        for (auto& n : names) want |= n == name;
        if (!want) continue;
        if (!out.empty()) out += "\n";
        out += text;
    }
    return out;
}

Program library_program(const std::vector<std::string>& names) { return parse(macro_library(names)); }

Program compile_circuit(const CircuitSpec& c, const CompileOptions& opt) {
    if (c.ops.empty()) return Program{};
    bool folded = opt.mode == CompileMode::folded;
    std::vector<std::string> names = {"SCTR", "CORR", "GATE", "LOAD", "CTRZ"};
    if (opt.cz == CzStrategy::via_swap) names.push_back("CZSW");
    if (folded) names.push_back("GATEF");
    Program p = library_program(names);

    struct Pending {
        std::array<std::string, 3> regs;
    };
    std::vector<std::optional<Pending>> pending(size_t(std::max(c.n_qubits, 0)));
    int counter = 0;

    auto flush = [&](int q) {
        auto& pq = pending[size_t(q)];
        if (!pq) return;
        p.top.push_back(make_call("CORR", {var(photon_name(q)), var(pq->regs[0]), var(pq->regs[1]), var(pq->regs[2])}));
        pq.reset();
    };

    for (const CircuitOp& op : c.ops) {
        switch (op.kind) {
            case CircuitOp::Kind::single: {
                if (!folded) {
                    p.top.push_back(compile_gate(op.u, op.q1));
                    break;
                }
                std::array<double, 8> a1{}, a2{}, a3{};
                auto& pq = pending[size_t(op.q1)];
                for (int m = 0; m < 8; ++m) {
                    Gate2 target = op.u;
                    if (pq) target = op.u * byproduct((m >> 2) & 1, (m >> 1) & 1, m & 1).inverse();
                    Euler e = compile_gate_angles(target);
                    a1[size_t(m)] = e.theta1;
                    a2[size_t(m)] = e.theta2;
                    a3[size_t(m)] = e.theta3;
                }
                std::array<std::string, 3> prev = pq ? pq->regs : std::array<std::string, 3>{"", "", ""};
                auto pick = [&](const std::array<double, 8>& v) { return pq ? selector(v, prev) : angle_expr(v[0]); };
                ++counter;
                std::array<std::string, 3> regs;
                for (int i = 0; i < 3; ++i) regs[size_t(i)] = "r" + std::to_string(counter) + "_" + std::to_string(i + 1);
                p.top.push_back(make_call("GATEF", {var(photon_name(op.q1)), pick(a3), pick(a2), pick(a1), var(regs[0]),
                                                    var(regs[1]), var(regs[2])}));
                pq = Pending{regs};
                break;
            }
            case CircuitOp::Kind::cz:
                if (folded) {
                    flush(op.q1);
                    flush(op.q2);
                }
                p.top.push_back(make_call(opt.cz == CzStrategy::measured ? "CTRZ" : "CZSW",
                                          {var(photon_name(op.q1)), var(photon_name(op.q2))}));
                break;
            case CircuitOp::Kind::measure_all:
                for (int q = 0; q < c.n_qubits; ++q) flush(q);
                p.top.push_back(make_comment(" State readout"));
                for (int q = 0; q < c.n_qubits; ++q) {
                    p.top.push_back(make_call("LOAD", {var(photon_name(q))}));
                    Stmt m = make_instr(Opcode::MEAS, var("b" + std::to_string(q + 1)));
                    p.top.push_back(m);
                }
                break;
        }
    }
    for (int q = 0; q < c.n_qubits; ++q) flush(q);
    return p;
}

}  // namespace sdq
