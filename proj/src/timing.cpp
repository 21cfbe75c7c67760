#include "sdq/timing.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace sdq {

namespace {

constexpr double kEps = 1e-9;

std::string at(const XInstr& x) { return "line " + std::to_string(x.line) + ": "; }

bool same_guard(const std::vector<Cond>& a, const std::vector<Cond>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!equal(a[i], b[i])) return false;
    return true;
}

std::string fmt(double t) {
    std::ostringstream os;
    os << t;
    return os.str();
}

}  // namespace

std::vector<SwitchEvent> schedule(const Expanded& x, TimeBase base) {
    const double ring = x.config.bins() * x.config.dt;
    std::vector<SwitchEvent> out;
    double frame = 0.0;
    double last = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < x.code.size(); ++i) {
        const XInstr& in = x.code[i];
        if (in.op != Opcode::OPEN && in.op != Opcode::CLOS) continue;
        double t = in.time;
        if (base == TimeBase::frames) {
            t = frame + in.time;
            if (t < last - kEps) {
                double k = std::ceil((last - t - kEps) / ring);
                frame += k * ring;
                t = frame + in.time;
            }
            last = t;
        }
        out.push_back({in.op, t, i});
    }
    return out;
}

TimingReport check_timing(const Expanded& x, const std::vector<SwitchEvent>& events) {
    TimingReport rep;
    rep.events = events;
    const double dt = x.config.dt;
    const int N = x.config.bins();
    const double ring = N * dt;
    const int n = x.config.n_photons;

    struct Window {
        double open, close;
        int photon;
        size_t open_idx, close_idx;
    };
    std::vector<Window> windows;

    // (a) alternation
    bool unbalanced = false;
    for (size_t i = 0; i < events.size(); ++i) {
        const XInstr& in = x.code[events[i].code_index];
        Opcode want = i % 2 == 0 ? Opcode::OPEN : Opcode::CLOS;
        if (events[i].op != want) {
            rep.violations.push_back(at(in) + "unbalanced switch events (" + opcode_name(events[i].op) +
                                     " without matching " + opcode_name(want) + ")");
            unbalanced = true;
            break;
        }
        if (i % 2 == 1) {
            const SwitchEvent& o = events[i - 1];
            if (events[i].time < o.time - kEps)
                rep.violations.push_back(at(in) + "switch closes at " + fmt(events[i].time) + " before it opens at " +
                                         fmt(o.time));
            windows.push_back({o.time, events[i].time, -1, o.code_index, events[i].code_index});
        }
    }
    if (!unbalanced && events.size() % 2 == 1)
        rep.violations.push_back(at(x.code[events.back().code_index]) + "unbalanced switch events (OPEN never closed)");
    if (unbalanced) return rep;

    // (b) each window covers exactly one occupied bin
    for (Window& w : windows) {
        const XInstr& in = x.code[w.open_idx];
        long k0 = long(std::ceil((w.open - kEps) / dt));
        long k1 = long(std::floor((w.close + kEps) / dt));
        long count = k1 - k0 + 1;
        if (count != 1) {
            rep.violations.push_back(at(in) + "switch window [" + fmt(w.open) + ", " + fmt(w.close) + "] covers " +
                                     std::to_string(std::max(0L, count)) + " time bins");
            continue;
        }
        long bin = ((k0 % N) + N) % N;
        if (bin >= n) {
            rep.violations.push_back(at(in) + "switch window at " + fmt(w.open) + " covers empty time bin " +
                                     std::to_string(bin));
            continue;
        }
        w.photon = int(bin);
    }

    // (c) overlap
    for (size_t i = 1; i < windows.size(); ++i)
        if (windows[i].open < windows[i - 1].close - kEps)
            rep.violations.push_back(at(x.code[windows[i].open_idx]) + "switch window at " + fmt(windows[i].open) +
                                     " overlaps the window closing at " + fmt(windows[i - 1].close));

    // (d) extraction / return pairing
    for (size_t i = 0; i + 1 < windows.size(); i += 2) {
        const Window& a = windows[i];
        const Window& b = windows[i + 1];
        if (a.photon < 0 || b.photon < 0) continue;
        const XInstr& in = x.code[b.open_idx];
        if (b.photon != a.photon) {
            rep.violations.push_back(at(in) + "photon " + photon_name(b.photon) + " extracted while " +
                                     photon_name(a.photon) + " is inside the scattering unit");
            continue;
        }
        if (std::abs(b.open - a.open - ring) > kEps) {
            rep.violations.push_back(at(in) + "photon " + photon_name(a.photon) + " returns at " + fmt(b.open) +
                                     ", not one ring period after extraction at " + fmt(a.open));
            continue;
        }
        if (!same_guard(x.code[a.open_idx].guard, x.code[b.close_idx].guard) ||
            !same_guard(x.code[a.open_idx].guard, x.code[a.close_idx].guard) ||
            !same_guard(x.code[a.open_idx].guard, x.code[b.open_idx].guard)) {
            rep.violations.push_back(at(in) + "extraction and return of " + photon_name(a.photon) +
                                     " are under different conditions");
            continue;
        }
        rep.slots.push_back({a.photon, a.open, b.close_idx});
    }
    // (e) nothing left in transit
    if (windows.size() % 2 == 1)
        rep.violations.push_back(at(x.code[windows.back().open_idx]) + "photon never returned to the ring");
    return rep;
}

TimingReport analyze_timing(const Expanded& x, TimeBase base) { return check_timing(x, schedule(x, base)); }

std::vector<std::string> validate_timing(const Expanded& x, TimeBase base) {
    return analyze_timing(x, base).violations;
}

int ring_cycles(const Expanded& x) { return int(analyze_timing(x).slots.size()); }

double survival_of(const Expanded& x, double loss) { return std::pow(1.0 - loss, ring_cycles(x)); }

}  // namespace sdq
