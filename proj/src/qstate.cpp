#include "sdq/qstate.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sdq {

namespace {

void check_qubit(const StateVector& s, int q) {
    if (q < 0 || q > s.n_photons)
        throw std::out_of_range("qubit index " + std::to_string(q) + " out of range");
}

const cplx I{0.0, 1.0};

}  // namespace

StateVector StateVector::ground(int n_photons) {
    if (n_photons < 0 || n_photons > 20) throw std::invalid_argument("photon count out of range");
    StateVector s;
    s.n_photons = n_photons;
    s.amp = CVec::Zero(Eigen::Index(1) << (n_photons + 1));
    s.amp(0) = 1.0;
    return s;
}

StateVector StateVector::from_photons(const CVec& photons) {
    Eigen::Index dim = photons.size();
    int n = 0;
    while ((Eigen::Index(1) << n) < dim) ++n;
    if ((Eigen::Index(1) << n) != dim) throw std::invalid_argument("photon state length is not a power of two");
    StateVector s = ground(n);
    double nrm = photons.norm();
    if (nrm == 0.0) throw std::invalid_argument("zero photon state");
    s.amp.head(dim) = photons / nrm;
    return s;
}

Gate2 Rx(double t) {
    Gate2 g;
    g << std::cos(t / 2), -I * std::sin(t / 2), -I * std::sin(t / 2), std::cos(t / 2);
    return g;
}

Gate2 Ry(double t) {
    Gate2 g;
    g << std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2);
    return g;
}

Gate2 Rz(double t) {
    Gate2 g;
    g << std::exp(-I * (t / 2)), 0.0, 0.0, std::exp(I * (t / 2));
    return g;
}

Gate2 beamsplitter() {
    const double r = 1.0 / std::sqrt(2.0);
    Gate2 g;
    g << r, I * r, I * r, r;
    return g;
}

Gate2 pauli_x() {
    Gate2 g;
    g << 0.0, 1.0, 1.0, 0.0;
    return g;
}

Gate2 pauli_y() {
    Gate2 g;
    g << 0.0, -I, I, 0.0;
    return g;
}

Gate2 pauli_z() {
    Gate2 g;
    g << 1.0, 0.0, 0.0, -1.0;
    return g;
}

Gate2 zb() { return Rz(kPi / 4) * beamsplitter(); }
Gate2 bz() { return beamsplitter() * Rz(kPi / 4); }

Gate2 make_gate(GateKind kind, std::optional<double> angle) {
    bool rotation = kind == GateKind::rx || kind == GateKind::ry || kind == GateKind::rz;
    if (rotation != angle.has_value())
        throw std::invalid_argument(rotation ? "rotation needs an angle" : "gate takes no angle");
    if (angle && !std::isfinite(*angle)) throw std::invalid_argument("non-finite angle");
    switch (kind) {
        case GateKind::rx: return Rx(*angle);
        case GateKind::ry: return Ry(*angle);
        case GateKind::rz: return Rz(*angle);
        case GateKind::beamsplitter: return beamsplitter();
        case GateKind::pauli_x: return pauli_x();
        case GateKind::pauli_y: return pauli_y();
        case GateKind::pauli_z: return pauli_z();
        case GateKind::identity: return Gate2::Identity();
    }
    throw std::invalid_argument("unknown gate kind");
}

void apply_1q(StateVector& s, int q, const Gate2& g) {
    check_qubit(s, q);
    const Eigen::Index bit = Eigen::Index(1) << q;
    const Eigen::Index dim = s.amp.size();
    const cplx a = g(0, 0), b = g(0, 1), c = g(1, 0), d = g(1, 1);
    for (Eigen::Index i = 0; i < dim; ++i) {
        if (i & bit) continue;
        cplx x = s.amp(i), y = s.amp(i | bit);
        s.amp(i) = a * x + b * y;
        s.amp(i | bit) = c * x + d * y;
    }
}

void apply_cz(StateVector& s, int q1, int q2) {
    check_qubit(s, q1);
    check_qubit(s, q2);
    if (q1 == q2) throw std::invalid_argument("cz needs two distinct qubits");
    const Eigen::Index mask = (Eigen::Index(1) << q1) | (Eigen::Index(1) << q2);
    for (Eigen::Index i = 0; i < s.amp.size(); ++i)
        if ((i & mask) == mask) s.amp(i) = -s.amp(i);
}

double probability_of_one(const StateVector& s, int q) {
    check_qubit(s, q);
    const Eigen::Index bit = Eigen::Index(1) << q;
    double p = 0.0;
    for (Eigen::Index i = 0; i < s.amp.size(); ++i)
        if (i & bit) p += std::norm(s.amp(i));
    return p;
}

double project(StateVector& s, int q, int bit) {
    check_qubit(s, q);
    const Eigen::Index mask = Eigen::Index(1) << q;
    double p = 0.0;
    for (Eigen::Index i = 0; i < s.amp.size(); ++i) {
        bool one = (i & mask) != 0;
        if (one == (bit == 1)) p += std::norm(s.amp(i));
    }
    if (p <= 0.0) return 0.0;
    const double scale = 1.0 / std::sqrt(p);
    for (Eigen::Index i = 0; i < s.amp.size(); ++i) {
        bool one = (i & mask) != 0;
        s.amp(i) = (one == (bit == 1)) ? s.amp(i) * scale : cplx(0.0);
    }
    return p;
}

Measurement measure(StateVector& s, int q, double draw) {
    if (!(draw >= 0.0 && draw < 1.0)) throw std::invalid_argument("draw must lie in [0,1)");
    double p1 = probability_of_one(s, q);
    double p0 = 1.0 - p1;
    int m = draw < p0 ? 0 : 1;
    double p = project(s, q, m);
    if (p <= 0.0) throw std::runtime_error("measurement projected onto a null outcome");
    return {m, p};
}

double fidelity_up_to_phase(const CVec& a, const CVec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch");
    return std::abs(a.dot(b));
}

double fidelity_up_to_phase(const StateVector& a, const StateVector& b) {
    return fidelity_up_to_phase(a.amp, b.amp);
}

double operator_overlap(const CMat& a, const CMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("dimension mismatch");
    return std::abs((a.adjoint() * b).trace()) / double(a.rows());
}

}  // namespace sdq
