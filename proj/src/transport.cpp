#include "sdq/transport.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <thread>

namespace sdq {

namespace {

// angular frequency of FFT bin k: the component exp(+i w t)
double bin_frequency(int k, const PulseGrid& grid) {
    int s = k <= grid.M / 2 ? k : k - grid.M;
    return 2 * kPi * s / grid.T;
}

std::vector<cplx> to_std(const CVec& v) { return {v.data(), v.data() + v.size()}; }

CVec from_std(const std::vector<cplx>& v) {
    CVec out(Eigen::Index(v.size()));
    for (size_t i = 0; i < v.size(); ++i) out(Eigen::Index(i)) = v[i];
    return out;
}

CVec shifted(const CVec& phi, double shift, const PulseGrid& grid) {
    if (shift == 0.0) return phi;
    Eigen::FFT<double> fft;
    std::vector<cplx> spec;
    fft.fwd(spec, to_std(phi));
    for (int k = 0; k < grid.M; ++k) {
        double w = bin_frequency(k, grid);
        // keep the Nyquist bin real
        if (k == grid.M / 2) w = 0.0;
        spec[size_t(k)] *= std::polar(1.0, -w * shift);
    }
    std::vector<cplx> out;
    fft.inv(out, spec);
    return from_std(out);
}

// Energy in the outer samples relative to `total`. The output is judged
// against the input energy: near critical coupling almost nothing is
// reflected, and the remainder would trip a relative test for no reason.
void check_edges(const CVec& phi, double total, const PulseGrid& grid) {
    const Eigen::Index w = std::max<Eigen::Index>(1, grid.M / 512);
    const double head = phi.head(w).squaredNorm(), tail = phi.tail(w).squaredNorm();
    if (head > 1e-6 * total || tail > 1e-6 * total) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "pulse reaches the window edge (%.3g, %.3g of the energy); widen T", head / total,
                      tail / total);
        throw GridTooSmall(buf);
    }
}

int depth_for(double bulk, double F_target) {
    if (bulk >= 1) throw std::domain_error("bulk fidelity is not below one");
    if (bulk <= 0) return 0;
    double D = std::floor(std::log(F_target) / std::log(bulk));
    // guard the floor against rounding at exact powers
    while (D > 0 && std::pow(bulk, D) < F_target) --D;
    while (std::pow(bulk, D + 1) >= F_target) ++D;
    return int(D);
}

template <class F>
void parallel_for(size_t n, int threads, F&& body) {
    int t = threads > 0 ? threads : int(std::max(1u, std::thread::hardware_concurrency()));
    t = int(std::min<size_t>(size_t(t), n));
    if (t <= 1) {
        for (size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::exception_ptr> errors(static_cast<size_t>(t));
    std::vector<std::thread> pool;
    for (int id = 0; id < t; ++id)
        pool.emplace_back([&, id] {
            try {
                for (size_t i = next++; i < n; i = next++) body(i);
            } catch (...) {
                errors[size_t(id)] = std::current_exception();
                next = n;
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

CavityParams CavityParams::from_cooperativity(double C, double gamma_s, double kappa) {
    if (C < 0) throw std::invalid_argument("negative cooperativity");
    CavityParams p;
    p.kappa = kappa;
    p.gamma_s = gamma_s;
    p.g = std::sqrt(C * kappa * gamma_s / 4);
    return p;
}

void CavityParams::validate() const {
    if (!(g >= 0 && kappa > 0 && gamma_s >= 0 && kappa_i >= 0))
        throw std::invalid_argument("cavity rates must be non-negative, kappa positive");
}

PulseGrid PulseGrid::centered(double tau, double T, int M) {
    PulseGrid g;
    g.tau = tau;
    g.T = T;
    g.M = M;
    g.t0 = T / 2;
    return g;
}

CVec PulseGrid::gaussian() const {
    CVec v(M);
    for (int i = 0; i < M; ++i) {
        double x = (time(i) - t0) / tau;
        v(i) = std::exp(-x * x);
    }
    return v;
}

void PulseGrid::validate() const {
    if (M < 2 || (M & (M - 1)) != 0) throw std::invalid_argument("sample count must be a power of two");
    if (!(tau > 0) || !(T >= 5 * tau)) throw std::invalid_argument("window must be at least five pulse widths");
}

cplx reflection_coefficient(double omega, const CavityParams& p, AtomState atom) {
    if (!std::isfinite(omega)) throw std::invalid_argument("detuning must be finite");
    const cplx i{0.0, 1.0};
    cplx denom = p.kappa / 2 + p.kappa_i / 2 - i * omega;
    if (atom == AtomState::g1 && p.g != 0.0) {
        const cplx a = p.gamma_s / 2 - i * omega;
        // lossless atom exactly on resonance: the cavity field is blocked
        if (a == 0.0) return 1.0;
        denom += p.g * p.g / a;
    }
    return 1.0 - p.kappa / denom;
}

TransportResult propagate_pulse(const CVec& phi_in, const PulseGrid& grid, const CavityParams& p, AtomState atom) {
    grid.validate();
    p.validate();
    if (phi_in.size() != grid.M) throw std::invalid_argument("pulse length does not match the grid");
    const double e_in = phi_in.squaredNorm();
    if (!(e_in > 0)) throw std::invalid_argument("zero input pulse");
    check_edges(phi_in, e_in, grid);

    Eigen::FFT<double> fft;
    std::vector<cplx> spec;
    fft.fwd(spec, to_std(phi_in));
    for (int k = 0; k < grid.M; ++k) spec[size_t(k)] *= reflection_coefficient(-bin_frequency(k, grid), p, atom);
    std::vector<cplx> out;
    fft.inv(out, spec);

    TransportResult r;
    r.phi_out = from_std(out);
    check_edges(r.phi_out, e_in, grid);
    r.leakage = std::clamp(1.0 - r.phi_out.squaredNorm() / e_in, 0.0, 1.0);
    r.shape_fidelity = shape_fidelity(phi_in, r.phi_out, 0.0, grid);
    r.delay = centroid(r.phi_out, grid) - centroid(phi_in, grid);
    return r;
}

double shape_fidelity(const CVec& phi_in, const CVec& phi_out, double shift, const PulseGrid& grid) {
    if (phi_in.size() != phi_out.size() || phi_in.size() != grid.M) throw std::invalid_argument("grid mismatch");
    const double a = phi_in.norm(), b = phi_out.norm();
    if (!(a > 0) || !(b > 0)) throw std::invalid_argument("zero-norm pulse");
    CVec ref = shifted(phi_in, shift, grid);
    return std::min(1.0, std::abs(ref.dot(phi_out)) / (ref.norm() * b));
}

double average_leakage(double Ps) {
    if (!(Ps >= 0 && Ps <= 1)) throw std::invalid_argument("probability out of range");
    return Ps / 4;
}

double centroid(const CVec& phi, const PulseGrid& grid) {
    double w = 0, m = 0;
    for (int i = 0; i < phi.size(); ++i) {
        double a = std::norm(phi(i));
        w += a;
        m += a * grid.time(i);
    }
    if (!(w > 0)) throw std::invalid_argument("zero-norm pulse");
    return m / w;
}

double delay_between(const CVec& out_g0, const CVec& out_g1, const PulseGrid& grid) {
    return centroid(out_g0, grid) - centroid(out_g1, grid);
}

SweepRow transport_point(const CavityParams& p, const PulseGrid& grid) {
    const CVec in = grid.gaussian();
    TransportResult r0 = propagate_pulse(in, grid, p, AtomState::g0);
    TransportResult r1 = propagate_pulse(in, grid, p, AtomState::g1);
    SweepRow row;
    row.C = p.cooperativity();
    row.infid_g0 = 1 - r0.shape_fidelity;
    row.infid_g1 = 1 - r1.shape_fidelity;
    row.infid_plus = (row.infid_g0 + row.infid_g1) / 2;
    row.delay01 = r0.delay - r1.delay;
    // the reference moves to the midpoint between the two output delays
    const double shift = r1.delay + row.delay01 / 2;
    row.infid_corrected =
        (2 - shape_fidelity(in, r0.phi_out, shift, grid) - shape_fidelity(in, r1.phi_out, shift, grid)) / 2;
    row.avg_leakage = average_leakage(r1.leakage);
    return row;
}

double corrected_plus_infidelity(const CavityParams& p, const PulseGrid& grid) {
    return transport_point(p, grid).infid_corrected;
}

DepthResult max_depth(double C, double L, double F_target, const PulseGrid& grid, double gamma_s) {
    if (!(F_target > 0 && F_target < 1)) throw std::invalid_argument("target fidelity must be in (0,1)");
    if (!(L >= 0 && L <= 1)) throw std::invalid_argument("loss must be in [0,1]");
    SweepRow row = transport_point(CavityParams::from_cooperativity(C, gamma_s), grid);
    DepthResult d;
    d.bulk_fidelity = (1 - row.infid_corrected) * (1 - row.avg_leakage) * (1 - L);
    d.depth = depth_for(d.bulk_fidelity, F_target);
    return d;
}

std::vector<SweepRow> sweep_cooperativity(const std::vector<double>& Cs, const CavityParams& tmpl, const PulseGrid& grid,
                                          int threads) {
    std::vector<SweepRow> rows(Cs.size());
    parallel_for(Cs.size(), threads, [&](size_t i) {
        CavityParams p = CavityParams::from_cooperativity(Cs[i], tmpl.gamma_s, tmpl.kappa);
        p.kappa_i = tmpl.kappa_i;
        rows[i] = transport_point(p, grid);
        rows[i].C = Cs[i];
    });
    return rows;
}

std::vector<double> log_space(double lo, double hi, int n) {
    if (!(lo > 0 && hi >= lo) || n < 1) throw std::invalid_argument("bad log range");
    std::vector<double> v(static_cast<size_t>(n));
    if (n == 1) return {lo};
    const double a = std::log10(lo), b = std::log10(hi);
    for (int i = 0; i < n; ++i) v[size_t(i)] = std::pow(10.0, a + (b - a) * i / (n - 1));
    v.front() = lo;
    v.back() = hi;
    return v;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "C,infid_g0,infid_g1,infid_plus,infid_corrected,avg_leakage\n";
    char buf[256];
    for (auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.6e,%.6e,%.6e,%.6e,%.6e,%.6e\n", r.C, r.infid_g0, r.infid_g1, r.infid_plus,
                      r.infid_corrected, r.avg_leakage);
        out += buf;
    }
    return out;
}

std::vector<DepthCell> depth_map(const std::vector<double>& Cs, const std::vector<double>& Ls, double F_target,
                                 const PulseGrid& grid, double gamma_s, int threads) {
    // transport depends on C only; the loss enters the bulk factor
    std::vector<SweepRow> rows(Cs.size());
    parallel_for(Cs.size(), threads,
                 [&](size_t i) { rows[i] = transport_point(CavityParams::from_cooperativity(Cs[i], gamma_s), grid); });
    if (!(F_target > 0 && F_target < 1)) throw std::invalid_argument("target fidelity must be in (0,1)");
    std::vector<DepthCell> cells;
    for (size_t i = 0; i < Cs.size(); ++i)
        for (double L : Ls) {
            if (!(L >= 0 && L <= 1)) throw std::invalid_argument("loss must be in [0,1]");
            DepthCell c{Cs[i], L, {}};
            c.r.bulk_fidelity = (1 - rows[i].infid_corrected) * (1 - rows[i].avg_leakage) * (1 - L);
            c.r.depth = depth_for(c.r.bulk_fidelity, F_target);
            cells.push_back(c);
        }
    return cells;
}

std::string depth_csv(const std::vector<DepthCell>& cells) {
    std::string out = "C,L,D,bulk_fidelity\n";
    char buf[160];
    for (auto& c : cells) {
        std::snprintf(buf, sizeof buf, "%.6e,%.6e,%d,%.10e\n", c.C, c.L, c.r.depth, c.r.bulk_fidelity);
        out += buf;
    }
    return out;
}

}  // namespace sdq
