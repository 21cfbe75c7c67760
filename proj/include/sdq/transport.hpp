#pragma once

#include "sdq/qstate.hpp"

#include <stdexcept>
#include <string>
#include <vector>

// Single-photon reflection off a one-sided atom-cavity system.
// Rates are in units of kappa, times in units of 1/kappa.

namespace sdq {

struct CavityParams {
    double g = 0.0;
    double kappa = 1.0;
    double gamma_s = 0.2;
    double kappa_i = 0.0;

    double cooperativity() const { return 4 * g * g / (kappa * gamma_s); }
    // g chosen so that 4 g^2 / (kappa gamma_s) = C
    static CavityParams from_cooperativity(double C, double gamma_s = 0.2, double kappa = 1.0);
    void validate() const;
};

struct PulseGrid {
    double T = 500.0;
    int M = 4096;
    double tau = 100.0;
    double t0 = 250.0;

    static PulseGrid centered(double tau = 100.0, double T = 500.0, int M = 4096);
    double step() const { return T / M; }
    double time(int i) const { return i * step(); }
    // exp(-(t - t0)^2 / tau^2)
    CVec gaussian() const;
    void validate() const;
};

enum class AtomState { g0, g1 };

struct TransportResult {
    CVec phi_out;
    double shape_fidelity = 0.0;  // against the input, no shift
    double leakage = 0.0;         // Ps
    double delay = 0.0;           // output centroid minus input centroid
};

struct GridTooSmall : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Reflection amplitude for a drive exp(-i omega t), omega the detuning from
// cavity resonance:
//   1 - kappa / (kappa/2 + kappa_i/2 - i omega + g^2 / (gamma_s/2 - i omega))
// with g = 0 for g0 (the atom is decoupled).
cplx reflection_coefficient(double omega, const CavityParams& p, AtomState atom);

// Linear response in the Fourier domain on the periodic grid. Throws
// GridTooSmall when the input or output puts more than 1e-6 of the input
// energy in the outer max(1, M/512) samples on either side,
// invalid_argument on a zero input.
TransportResult propagate_pulse(const CVec& phi_in, const PulseGrid& grid, const CavityParams& p, AtomState atom);

// |<in(t - shift), out(t)>| of unit-normalized pulses; the shift is applied
// spectrally.
double shape_fidelity(const CVec& phi_in, const CVec& phi_out, double shift, const PulseGrid& grid);

double average_leakage(double Ps);

// Intensity-weighted mean time.
double centroid(const CVec& phi, const PulseGrid& grid);

// centroid(g0) - centroid(g1)
double delay_between(const CVec& out_g0, const CVec& out_g1, const PulseGrid& grid);

struct SweepRow {
    double C = 0;
    double infid_g0 = 0, infid_g1 = 0;
    double infid_plus = 0;       // mean of the two, unshifted reference
    double infid_corrected = 0;  // mean of the two, reference moved to the midpoint delay
    double avg_leakage = 0;      // Ps(g1) / 4
    double delay01 = 0;
};

SweepRow transport_point(const CavityParams& p, const PulseGrid& grid);

double corrected_plus_infidelity(const CavityParams& p, const PulseGrid& grid);

struct DepthResult {
    int depth = 0;
    double bulk_fidelity = 0;  // F_shape (1 - avg leakage) (1 - L)
};

// Largest D with bulk^D >= F_target.
DepthResult max_depth(double C, double L, double F_target, const PulseGrid& grid, double gamma_s = 0.2);

// Rows in the order of Cs; points run in parallel, results do not depend on
// the thread count.
std::vector<SweepRow> sweep_cooperativity(const std::vector<double>& Cs, const CavityParams& tmpl, const PulseGrid& grid,
                                          int threads = 0);

std::vector<double> log_space(double lo, double hi, int n);

std::string sweep_csv(const std::vector<SweepRow>& rows);

struct DepthCell {
    double C = 0, L = 0;
    DepthResult r;
};
std::vector<DepthCell> depth_map(const std::vector<double>& Cs, const std::vector<double>& Ls, double F_target,
                                 const PulseGrid& grid, double gamma_s = 0.2, int threads = 0);
std::string depth_csv(const std::vector<DepthCell>& cells);

}  // namespace sdq
