#pragma once

#include "sdq/isa.hpp"

#include <string>
#include <vector>

namespace sdq {

// How OPEN/CLOS times in an expanded stream are read.
//   frames:  relative to the current ring cycle; each event is pushed forward
//            by whole ring periods N*dt until the timeline is non-decreasing.
//   literal: already absolute.
enum class TimeBase { frames, literal };

struct SwitchEvent {
    Opcode op = Opcode::OPEN;
    double time = 0.0;  // absolute
    size_t code_index = 0;
};

// One round trip through the scattering unit: extraction window followed by
// the return window one ring period later. The pass takes effect at the
// return window's CLOS.
struct ScatterSlot {
    int photon = -1;
    double extract = 0.0;  // OPEN time of the extraction window
    size_t apply_at = 0;   // code index of the return CLOS
};

struct TimingReport {
    std::vector<std::string> violations;
    std::vector<ScatterSlot> slots;
    std::vector<SwitchEvent> events;
};

std::vector<SwitchEvent> schedule(const Expanded& x, TimeBase base = TimeBase::frames);

// Checks a timeline of absolute events. Empty violation list iff
//  - OPEN/CLOS alternate,
//  - every window covers exactly one bin centre k*dt and that bin holds a photon,
//  - windows do not overlap (touching is fine),
//  - an extraction is followed directly by the same photon's return N*dt later,
//    under the same guard, so only one photon is ever inside the unit,
//  - no photon is still outside the ring at the end.
TimingReport check_timing(const Expanded& x, const std::vector<SwitchEvent>& events);

TimingReport analyze_timing(const Expanded& x, TimeBase base = TimeBase::frames);
std::vector<std::string> validate_timing(const Expanded& x, TimeBase base = TimeBase::frames);

// (1-L) per scheduled scatter slot. Guarded slots count whether or not they
// fire, so the result is the same on every branch.
double survival_of(const Expanded& x, double loss);
int ring_cycles(const Expanded& x);

}  // namespace sdq
