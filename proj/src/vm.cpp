#include "sdq/vm.hpp"

#include "sdq/device.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace sdq {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

using Regs = std::vector<signed char>;

bool guard_holds(const XInstr& in, const Regs& regs) {
    for (const Cond& c : in.guard) {
        double a = evaluate(c.lhs, regs), b = evaluate(c.rhs, regs);
        bool eq = std::abs(a - b) < 1e-9;
        if (eq != c.eq) return false;
    }
    return true;
}

void collect_reads(const ExprPtr& e, std::vector<int>& out) {
    if (!e) return;
    if (e->kind == Expr::Kind::Var) {
        if (e->reg >= 0) out.push_back(e->reg);
        return;
    }
    collect_reads(e->lhs, out);
    collect_reads(e->rhs, out);
}

std::uint64_t merge_key(const StateVector& s, const Regs& regs) {
    std::uint64_t h = 0x84222325cbf29ce4ULL;
    auto mix = [&](std::uint64_t v) { h = splitmix(h ^ v); };
    for (signed char r : regs) mix(std::uint64_t(std::uint8_t(r)));
    Eigen::Index k = 0;
    s.amp.cwiseAbs2().maxCoeff(&k);
    const cplx ph = std::conj(s.amp(k)) / std::abs(s.amp(k));
    for (Eigen::Index i = 0; i < s.amp.size(); ++i) {
        const cplx a = s.amp(i) * ph;
        mix(std::uint64_t(std::llround(a.real() * 1e6)));
        mix(std::uint64_t(std::llround(a.imag() * 1e6)));
    }
    return h;
}

// Expanded program plus the timing-derived scatter table.
struct Machine {
    Expanded x;
    std::vector<int> scatter;  // code index -> photon, -1 if none
    size_t readout_start = 0;
    double loss_factor = 1.0;

    Machine(const Program& p, const RunConfig& cfg) {
        DeviceConfig dc = cfg.device;
        if (cfg.input && dc.n_photons == 0) {
            int n = 0;
            while ((Eigen::Index(1) << n) < cfg.input->size()) ++n;
            dc.n_photons = n;
        }
        x = expand(p, dc);
        if (x.config.n_photons <= 0) x.config.n_photons = std::max(1, dc.n_photons);
        TimingReport rep = analyze_timing(x, cfg.timebase);
        if (!rep.violations.empty()) {
            std::string msg = "timing violations:";
            for (auto& v : rep.violations) msg += "\n  " + v;
            throw std::runtime_error(msg);
        }
        scatter.assign(x.code.size(), -1);
        for (auto& s : rep.slots) scatter[s.apply_at] = s.photon;
        if (cfg.loss_enabled) loss_factor = 1.0 - x.config.loss;
        Program body = strip_readout(p);
        readout_start = body.top.size() == p.top.size() ? x.code.size() : expand(body, x.config).code.size();
    }

    StateVector initial(const RunConfig& cfg) const {
        if (cfg.input) {
            if (cfg.input->size() != (Eigen::Index(1) << x.config.n_photons))
                throw std::invalid_argument("input state does not match the photon count");
            return StateVector::from_photons(*cfg.input);
        }
        return StateVector::ground(x.config.n_photons);
    }

    // Everything except MEAS. Returns false for MEAS that must be handled by
    // the caller (guard holds).
    bool step(size_t pc, StateVector& s, const Regs& regs) const {
        const XInstr& in = x.code[pc];
        switch (in.op) {
            case Opcode::OPEN: return true;
            case Opcode::CLOS:
                if (scatter[pc] >= 0) {
                    s.survival *= loss_factor;  // the slot is spent either way
                    if (guard_holds(in, regs)) scatter_pass(s, scatter[pc]);
                }
                return true;
            case Opcode::ROTX:
                if (guard_holds(in, regs)) apply_1q(s, s.atom(), Rx(evaluate(in.operand, regs)));
                return true;
            case Opcode::ROTY:
                if (guard_holds(in, regs)) apply_1q(s, s.atom(), Ry(evaluate(in.operand, regs)));
                return true;
            case Opcode::INIT:
                if (guard_holds(in, regs)) init_atom(s, in.init);
                return true;
            case Opcode::MEAS: return !guard_holds(in, regs);
        }
        return true;
    }

    // live_before[i]: registers read at or after i before being overwritten
    std::vector<std::vector<bool>> liveness() const {
        const size_t nr = x.registers.size();
        std::vector<std::vector<bool>> live(x.code.size() + 1, std::vector<bool>(nr, false));
        for (size_t i = x.code.size(); i-- > 0;) {
            std::vector<bool> l = live[i + 1];
            const XInstr& in = x.code[i];
            if (in.op == Opcode::MEAS && in.guard.empty()) l[size_t(in.reg)] = false;
            std::vector<int> reads;
            collect_reads(in.operand, reads);
            for (auto& c : in.guard) {
                collect_reads(c.lhs, reads);
                collect_reads(c.rhs, reads);
            }
            for (int r : reads) l[size_t(r)] = true;
            live[i] = std::move(l);
        }
        return live;
    }
};

void dfs(const Machine& m, size_t pc, StateVector s, Regs regs, std::vector<int> outcome, double prob,
         std::optional<StateVector> snap, BranchSet& out) {
    for (; pc < m.x.code.size(); ++pc) {
        if (pc == m.readout_start) snap = s;
        if (m.step(pc, s, regs)) continue;
        const XInstr& in = m.x.code[pc];
        double p1 = probability_of_one(s, s.atom());
        for (int bit = 0; bit < 2; ++bit) {
            double pb = bit ? p1 : 1.0 - p1;
            if (prob * pb < kPruneBelow) {
                if (pb > 0.0 || prob * pb > 0.0) {
                    ++out.pruned;
                    out.pruned_probability += prob * pb;
                } else {
                    ++out.pruned;
                }
                continue;
            }
            StateVector t = s;
            project(t, t.atom(), bit);
            Regs r = regs;
            r[size_t(in.reg)] = (signed char)bit;
            std::vector<int> o = outcome;
            o.push_back(bit);
            dfs(m, pc + 1, std::move(t), std::move(r), std::move(o), prob * pb, snap, out);
        }
        return;
    }
    BranchResult b;
    b.outcome = std::move(outcome);
    b.probability = prob;
    b.survival = s.survival;
    b.pre_readout = snap ? *snap : s;
    b.state = std::move(s);
    out.branches.push_back(std::move(b));
}

BranchResult run_shot(const Machine& m, const RunConfig& cfg, std::uint64_t shot) {
    StateVector s = m.initial(cfg);
    Regs regs(m.x.registers.size(), -1);
    BranchResult b;
    std::uint64_t draws = 0;
    bool snapped = false;
    for (size_t pc = 0; pc < m.x.code.size(); ++pc) {
        if (pc == m.readout_start) {
            b.pre_readout = s;
            snapped = true;
        }
        if (m.step(pc, s, regs)) continue;
        Measurement r = measure(s, s.atom(), uniform_draw(cfg.seed, shot, draws++));
        regs[size_t(m.x.code[pc].reg)] = (signed char)r.bit;
        b.outcome.push_back(r.bit);
        b.probability *= r.probability;
    }
    if (!snapped) b.pre_readout = s;
    b.survival = s.survival;
    b.state = std::move(s);
    return b;
}

bool is_readout(const Stmt& s) {
    return s.kind == Stmt::Kind::Comment || (s.kind == Stmt::Kind::Call && s.name == "LOAD") ||
           (s.kind == Stmt::Kind::Instr && s.op == Opcode::MEAS);
}

}  // namespace

double uniform_draw(std::uint64_t seed, std::uint64_t shot, std::uint64_t draw) {
    std::uint64_t h = splitmix(splitmix(splitmix(seed) ^ shot) + draw);
    return double(h >> 11) * 0x1.0p-53;
}

CVec photons_of(const StateVector& s) {
    const Eigen::Index half = s.amp.size() / 2;
    CVec c0 = s.amp.head(half), c1 = s.amp.tail(half);
    CVec v = c0.squaredNorm() >= c1.squaredNorm() ? c0 : c1;
    return v / v.norm();
}

double photon_fidelity(const StateVector& s, const CVec& t) {
    const Eigen::Index half = s.amp.size() / 2;
    if (t.size() != half) throw std::invalid_argument("dimension mismatch");
    double f = std::norm(t.dot(s.amp.head(half))) + std::norm(t.dot(s.amp.tail(half)));
    return std::sqrt(std::min(1.0, f));
}

Program strip_readout(const Program& p) {
    Program out = p;
    size_t end = out.top.size();
    while (end > 0 && is_readout(out.top[end - 1])) --end;
    // keep comments that precede real statements
    bool any = false;
    for (size_t i = end; i < out.top.size(); ++i) any |= out.top[i].kind != Stmt::Kind::Comment;
    if (any) out.top.resize(end);
    return out;
}

std::vector<BranchResult> run_sampled(const Program& p, const RunConfig& cfg) {
    if (cfg.shots < 1) throw std::invalid_argument("shots must be at least 1");
    Machine m(p, cfg);
    std::vector<BranchResult> out(size_t(cfg.shots));
    int threads = cfg.threads > 0 ? cfg.threads : int(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, cfg.shots);
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<size_t>(threads));
    auto worker = [&](int id) {
        try {
            for (int k = next++; k < cfg.shots; k = next++) out[size_t(k)] = run_shot(m, cfg, std::uint64_t(k));
        } catch (...) {
            errors[size_t(id)] = std::current_exception();
            next = cfg.shots;
        }
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

BranchSet run_branches(const Program& p, const RunConfig& cfg) {
    Machine m(p, cfg);
    int meas = m.x.meas_count();
    if (meas > kMaxEnumeratedMeas)
        throw std::runtime_error("branch enumeration limited to " + std::to_string(kMaxEnumeratedMeas) +
                                 " measurements, program has " + std::to_string(meas));
    BranchSet out;
    dfs(m, 0, m.initial(cfg), Regs(m.x.registers.size(), -1), {}, 1.0, std::nullopt, out);
    return out;
}

Verification verify_program(const Program& p, const CMat& target, const RunConfig& cfg) {
    if (target.rows() != target.cols()) throw std::invalid_argument("target is not square");
    int n = 0;
    while ((Eigen::Index(1) << n) < target.rows()) ++n;
    if ((Eigen::Index(1) << n) != target.rows()) throw std::invalid_argument("target dimension is not a power of two");

    Program body = strip_readout(p);
    RunConfig rc = cfg;
    if (rc.device.n_photons == 0) rc.device.n_photons = std::max(n, 1);
    if (rc.device.n_photons != n) throw std::invalid_argument("target size does not match the photon count");
    rc.input = CVec::Zero(target.rows());
    rc.input->setZero();
    (*rc.input)(0) = 1.0;
    Machine m(body, rc);
    auto live = m.liveness();

    std::vector<CVec> inputs;
    for (Eigen::Index k = 0; k < target.rows(); ++k) inputs.push_back(CVec::Unit(target.rows(), k));
    std::mt19937_64 rng(cfg.seed ^ 0x5eedULL);
    std::normal_distribution<double> nd;
    for (int r = 0; r < 2; ++r) {
        CVec v(target.rows());
        for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = cplx(nd(rng), nd(rng));
        inputs.push_back(v / v.norm());
    }

    struct Node {
        StateVector s;
        Regs regs;
        double p;
    };
    constexpr size_t kMaxNodes = 1 << 16;

    Verification ver;
    ver.inputs = inputs.size();
    const int fallback_shots = cfg.shots > 1 ? cfg.shots : kFallbackShots;
    for (const CVec& in : inputs) {
        CVec t = target * in;
        t /= t.norm();
        std::vector<Node> nodes;
        bool overflow = false;
        nodes.push_back({StateVector::from_photons(in), Regs(m.x.registers.size(), -1), 1.0});
        for (size_t pc = 0; pc < m.x.code.size(); ++pc) {
            const XInstr& ins = m.x.code[pc];
            std::vector<Node> next;
            bool branched = false;
            for (Node& nd : nodes) {
                if (m.step(pc, nd.s, nd.regs)) {
                    next.push_back(std::move(nd));
                    continue;
                }
                branched = true;
                double p1 = probability_of_one(nd.s, nd.s.atom());
                for (int bit = 0; bit < 2; ++bit) {
                    double pb = bit ? p1 : 1.0 - p1;
                    if (nd.p * pb < kPruneBelow) {
                        if (pb > 0) ++ver.pruned;
                        continue;
                    }
                    Node t{nd.s, nd.regs, nd.p * pb};
                    project(t.s, t.s.atom(), bit);
                    t.regs[size_t(ins.reg)] = (signed char)bit;
                    next.push_back(std::move(t));
                }
            }
            nodes = std::move(next);
            if (branched || ins.op == Opcode::INIT) {
                // forget dead registers, then merge equal branches
                for (Node& nd : nodes)
                    for (size_t r = 0; r < nd.regs.size(); ++r)
                        if (!live[pc + 1][r]) nd.regs[r] = -1;
                // Candidates are bucketed by a coarse phase-free key; two equal
                // states that straddle a rounding edge just stay unmerged.
                std::vector<Node> merged;
                std::unordered_map<std::uint64_t, std::vector<size_t>> buckets;
                for (Node& nd : nodes) {
                    std::uint64_t key = merge_key(nd.s, nd.regs);
                    auto& bucket = buckets[key];
                    bool found = false;
                    for (size_t i : bucket) {
                        Node& mg = merged[i];
                        if (mg.regs != nd.regs) continue;
                        if (std::abs(mg.s.amp.dot(nd.s.amp)) >= 1.0 - 1e-12) {
                            mg.p += nd.p;
                            found = true;
                            break;
                        }
                    }
                    if (!found) {
                        bucket.push_back(merged.size());
                        merged.push_back(std::move(nd));
                    }
                }
                nodes = std::move(merged);
                if (nodes.size() > kMaxNodes) {
                    overflow = true;
                    break;
                }
            }
        }
        if (overflow) {
            // too many distinct branches: sample instead (a lower bound)
            ver.exhaustive = false;
            ver.samples += size_t(fallback_shots);
            RunConfig sc = rc;
            sc.input = in;
            for (int k = 0; k < fallback_shots; ++k) {
                BranchResult b = run_shot(m, sc, (std::uint64_t(&in - inputs.data()) << 32) + std::uint64_t(k));
                ver.worst_infidelity = std::max(ver.worst_infidelity, 1.0 - photon_fidelity(b.state, t));
            }
            ++ver.final_branches;
            continue;
        }
        for (const Node& nd : nodes) ver.worst_infidelity = std::max(ver.worst_infidelity, 1.0 - photon_fidelity(nd.s, t));
        ver.final_branches += nodes.size();
    }
    return ver;
}

double survival_of(const Program& p, const DeviceConfig& cfg) {
    Expanded x = expand(p, cfg);
    return survival_of(x, cfg.loss);
}

}  // namespace sdq
