#include "sdq/device.hpp"

#include <cmath>
#include <stdexcept>

namespace sdq {

namespace {

void check_photon(const StateVector& s, int j) {
    if (j < 0 || j >= s.n_photons) throw std::out_of_range("photon index out of range");
}

}  // namespace

double atom_purity(const StateVector& s) {
    const Eigen::Index half = s.amp.size() / 2;
    auto c0 = s.amp.head(half);
    auto c1 = s.amp.tail(half);
    cplx r00 = c0.squaredNorm(), r11 = c1.squaredNorm();
    cplx r01 = c1.dot(c0);  // sum c0 * conj(c1)
    return std::real(r00 * r00 + r11 * r11 + 2.0 * std::norm(r01));
}

CVec photon_state(const StateVector& s) {
    if (atom_purity(s) < 1.0 - 1e-9) throw std::runtime_error("atom is entangled with the photons");
    const Eigen::Index half = s.amp.size() / 2;
    CVec c0 = s.amp.head(half), c1 = s.amp.tail(half);
    CVec v = c0.squaredNorm() >= c1.squaredNorm() ? c0 : c1;
    return v / v.norm();
}

void init_atom(StateVector& s, AtomInit which) {
    CVec ph = photon_state(s);
    const Eigen::Index half = s.amp.size() / 2;
    switch (which) {
        case AtomInit::g0:
            s.amp.head(half) = ph;
            s.amp.tail(half).setZero();
            break;
        case AtomInit::g1:
            s.amp.head(half).setZero();
            s.amp.tail(half) = ph;
            break;
        case AtomInit::plus:
            s.amp.head(half) = ph / std::sqrt(2.0);
            s.amp.tail(half) = ph / std::sqrt(2.0);
            break;
    }
}

void scatter_pass(StateVector& s, int j, double loss_factor) {
    check_photon(s, j);
    apply_1q(s, j, bz());
    apply_cz(s, j, s.atom());
    apply_1q(s, j, zb());
    s.survival *= loss_factor;
}

Teleport teleported_rotation(StateVector& s, int j, double theta, double draw) {
    check_photon(s, j);
    init_atom(s, AtomInit::plus);
    scatter_pass(s, j);
    apply_1q(s, s.atom(), Rx(-theta));
    Measurement r = measure(s, s.atom(), draw);
    return {r.bit, r.probability};
}

Gate2 teleport_operator(double theta, int m) {
    const Gate2 z4 = Rz(kPi / 4);
    Gate2 op = z4 * pauli_z();
    if (m == 0) op = op * (-pauli_y());
    return op * Ry(theta) * z4;
}

void swap_photon_atom(StateVector& s, int j) {
    check_photon(s, j);
    const Gate2 rho = Ry(kPi / 2) * Rx(kPi);
    apply_1q(s, j, zb());
    scatter_pass(s, j);
    apply_1q(s, s.atom(), rho);
    scatter_pass(s, j);
    apply_1q(s, s.atom(), rho);
    scatter_pass(s, j);
    apply_1q(s, j, bz());
}

}  // namespace sdq
