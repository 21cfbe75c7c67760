#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>

namespace sdq {

using cplx = std::complex<double>;
using Gate2 = Eigen::Matrix2cd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;

// n photons + 1 atom. Qubit j is bit j of the amplitude index; the atom is
// qubit n, the most significant bit.
struct StateVector {
    CVec amp;
    int n_photons = 0;
    double survival = 1.0;

    int atom() const { return n_photons; }
    int n_qubits() const { return n_photons + 1; }

    // photons in |0...0>, atom in |g0>
    static StateVector ground(int n_photons);
    // photon register from `photons` (length 2^n), atom in |g0>
    static StateVector from_photons(const CVec& photons);
};

enum class GateKind { rx, ry, rz, beamsplitter, pauli_x, pauli_y, pauli_z, identity };

Gate2 make_gate(GateKind kind, std::optional<double> angle = std::nullopt);

Gate2 Rx(double theta);
Gate2 Ry(double theta);
Gate2 Rz(double theta);
Gate2 beamsplitter();
Gate2 pauli_x();
Gate2 pauli_y();
Gate2 pauli_z();

// Z_{pi/4} * B and B * Z_{pi/4}, the fixed optics on the return / outgoing leg
Gate2 zb();
Gate2 bz();

void apply_1q(StateVector& s, int q, const Gate2& g);
void apply_cz(StateVector& s, int q1, int q2);

struct Measurement {
    int bit;
    double probability;
};

// Born-rule measurement in the computational basis; bit 0 iff draw < P(0).
Measurement measure(StateVector& s, int q, double draw);

// Project qubit q onto `bit` and renormalize. Returns the outcome probability
// (state untouched if it is zero).
double project(StateVector& s, int q, int bit);

double probability_of_one(const StateVector& s, int q);

double fidelity_up_to_phase(const CVec& a, const CVec& b);
double fidelity_up_to_phase(const StateVector& a, const StateVector& b);

// |tr(A^dag B)| / dim, phase-insensitive operator overlap
double operator_overlap(const CMat& a, const CMat& b);

}  // namespace sdq
