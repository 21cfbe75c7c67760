#pragma once

#include "sdq/isa.hpp"
#include "sdq/qstate.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace sdq {

// ------------------------------------------------------------ circuits

struct CircuitOp {
    enum class Kind { single, cz, measure_all };
    Kind kind = Kind::single;
    int q1 = 0, q2 = 0;  // 0-based photon indices
    Gate2 u = Gate2::Identity();
    int line = 0;
};

struct CircuitSpec {
    std::vector<CircuitOp> ops;
    int n_qubits = 0;  // max index + 1
};

// `single q <8 reals>` (row-major re/im of U), `cz q1 q2`, `measure_all`,
// one record per line, '#' comments. Throws ParseError.
CircuitSpec parse_circuit(std::string_view text);
std::string print_circuit(const CircuitSpec& c);

// Unitary of the circuit without its readout, little-endian photon order.
CMat circuit_unitary(const CircuitSpec& c);

// QFT on n photons (photon n-1 most significant) from H, controlled phases
// and a final reversal, each controlled phase and swap reduced to cz plus
// single-qubit gates. Adjacent singles on the same photon are merged.
// Ends with measure_all when `readout` is set.
CircuitSpec qft_circuit(int n, bool readout = true);

// F[j][k] = exp(2 pi i j k / 2^n) / sqrt(2^n)
CMat qft_matrix(int n);

// ------------------------------------------------------------ single-qubit gates

struct Euler {
    double theta1 = 0, theta2 = 0, theta3 = 0;  // theta1 acts first
    double phase = 0;
};

// Ry(theta3) Rx(theta2) Ry(theta1) = e^{-i phase} U; theta2 in [0,pi],
// theta1, theta3 in [0,2pi); theta1 = 0 when theta2 is 0 or pi.
Euler euler_yxy(const Gate2& u);

// Angles for GATE: Z_{pi/4} Ry(theta3) Rx(theta2) Ry(theta1) Z_{pi/4} = U.
Euler compile_gate_angles(const Gate2& u);

// GATE q theta3 theta2 theta1 (arguments in operator order)
Stmt compile_gate(const Gate2& u, int q);

// Z_{pi/4} Ry(theta3) Rx(theta2) Ry(theta1) Z_{pi/4}
Gate2 gate_operator(double theta1, double theta2, double theta3);

double adaptive_theta2(double theta2, int m1);
double adaptive_theta3(double theta3, int m1, int m2);

// Photon operator left by the emitted GATE body on outcome (m1,m2,m3),
// before CORR: the product of the three teleported rotations.
Gate2 gate_branch_operator(double theta1, double theta2, double theta3, int m1, int m2, int m3);

// Byproduct E with gate_branch_operator = E * gate_operator (up to phase).
// It does not depend on the angles.
Gate2 byproduct(int m1, int m2, int m3);

enum class Pauli { I, X, Y, Z };
char pauli_letter(Pauli p);

// The published eight-entry error table (phases dropped).
Pauli pauli_error(int m1, int m2, int m3);

// Non-interacting passes that cancel a Pauli error up to phase.
std::vector<Stmt> correction_sequence(Pauli e, int q);

// ------------------------------------------------------------ two-qubit gates

enum class CzStrategy { measured, via_swap };

// CTRZ q1 q2 (one measured scattering triple) or CZSW q1 q2 (swap, scatter,
// swap back: 7 passes).
std::vector<Stmt> compile_cz(int q1, int q2, CzStrategy strategy);

// ------------------------------------------------------------ whole circuits

enum class CompileMode { explicit_corrections, folded };

struct CompileOptions {
    CompileMode mode = CompileMode::explicit_corrections;
    CzStrategy cz = CzStrategy::measured;
};

Program compile_circuit(const CircuitSpec& c, const CompileOptions& opt = {});

// Source of the macro library the compiler emits against. `names` selects
// macros; empty means all of SCTR CORR GATE LOAD CTRZ CZSW GATEF.
std::string macro_library(const std::vector<std::string>& names = {});

// Program with the library macros and no body.
Program library_program(const std::vector<std::string>& names = {});

// Angle literal: shortest exact form, padded to at least three decimals.
std::string format_angle(double v);

}  // namespace sdq
