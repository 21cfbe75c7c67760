#pragma once

#include "sdq/qstate.hpp"

namespace sdq {

enum class AtomInit { g0, g1, plus };

// Purity tr(rho_a^2) of the reduced atom state.
double atom_purity(const StateVector& s);

// Photon register with the atom traced out; requires a product state.
CVec photon_state(const StateVector& s);

void init_atom(StateVector& s, AtomInit which);

// One round trip of photon j through the scattering unit:
// (Z_{pi/4} B)_j  cz(j, atom)  (B Z_{pi/4})_j
void scatter_pass(StateVector& s, int j, double loss_factor = 1.0);

struct Teleport {
    int m;
    double probability;
};

// INIT |+>, scatter j, atom Rx(-theta), measure with `draw`.
Teleport teleported_rotation(StateVector& s, int j, double theta, double draw);

// Photon operator left on j by teleported_rotation for outcome m:
// Z_{pi/4} sz (-sy)^(m xor 1) Ry(theta) Z_{pi/4}
Gate2 teleport_operator(double theta, int m);

// Exact photon/atom SWAP: outgoing-leg wrapper, three passes separated by
// Ry(pi/2)Rx(pi) on the atom, return-leg wrapper.
void swap_photon_atom(StateVector& s, int j);

}  // namespace sdq
