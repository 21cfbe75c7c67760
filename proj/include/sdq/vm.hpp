#pragma once

#include "sdq/isa.hpp"
#include "sdq/qstate.hpp"
#include "sdq/timing.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sdq {

struct RunConfig {
    std::uint64_t seed = 0;
    int shots = 1;
    bool loss_enabled = false;
    DeviceConfig device;  // n_photons / N inferred from the program when 0
    int threads = 0;      // 0: hardware concurrency
    TimeBase timebase = TimeBase::frames;
    std::optional<CVec> input;  // photon register at the start; default |0..0>
};

struct BranchResult {
    std::vector<int> outcome;  // MEAS results in execution order
    double probability = 1.0;
    StateVector state;        // at the end of the program
    StateVector pre_readout;  // where the trailing readout section starts
    double survival = 1.0;
};

struct BranchSet {
    std::vector<BranchResult> branches;
    size_t pruned = 0;  // branches dropped below the probability floor
    double pruned_probability = 0.0;
};

inline constexpr double kPruneBelow = 1e-12;
inline constexpr int kMaxEnumeratedMeas = 24;

// One result per shot, ordered by shot index. Each shot draws from a
// counter-based stream keyed by (seed, shot, draw), so results do not depend
// on the thread count.
std::vector<BranchResult> run_sampled(const Program& p, const RunConfig& cfg);

// Every measurement outcome, depth first. At most 24 MEAS in the expanded
// stream.
BranchSet run_branches(const Program& p, const RunConfig& cfg);

struct Verification {
    double worst_infidelity = 0.0;
    size_t inputs = 0;
    size_t final_branches = 0;  // after merging, summed over inputs
    size_t pruned = 0;
    bool exhaustive = true;  // false if some input fell back to sampling
    size_t samples = 0;      // shots drawn by the fallback
};

inline constexpr int kFallbackShots = 512;

// Worst 1 - F over all branches and inputs (computational basis plus two
// random superpositions), F = sqrt(<t|rho_photons|t>) with t = target*input.
// A trailing readout section (top-level LOAD calls and MEAS) is ignored.
// Branches are enumerated breadth first; branches with the same live
// registers and the same state up to phase are merged, so long programs stay
// tractable. If an input still exceeds 65536 distinct branches, that input
// is sampled instead (cfg.shots, or 512) and the result only bounds the worst
// case from below.
Verification verify_program(const Program& p, const CMat& target, const RunConfig& cfg = {});

// Program without its trailing top-level LOAD/MEAS/comment statements.
Program strip_readout(const Program& p);

double survival_of(const Program& p, const DeviceConfig& cfg);

// Photon register of a state whose atom is (close to) a product factor:
// the larger atom component, normalized.
CVec photons_of(const StateVector& s);

// sqrt(<t|rho_photons|t>) for a normalized photon vector t
double photon_fidelity(const StateVector& s, const CVec& t);

// uniform [0,1) from the counter-based generator
double uniform_draw(std::uint64_t seed, std::uint64_t shot, std::uint64_t draw);

}  // namespace sdq
