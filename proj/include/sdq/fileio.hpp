#pragma once

#include "sdq/qstate.hpp"
#include "sdq/vm.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sdq {

// Square complex matrix as whitespace-separated "re im" pairs in row-major
// order, any line breaks, '#' comments. The dimension is inferred.
CMat parse_matrix(std::string_view text);
std::string format_matrix(const CMat& m);

std::string read_file(const std::string& path);

// Writes to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

// Round to 12 significant digits (the precision of reports).
double round12(double v);

// JSON run report: {branches: [{outcome, probability, survival}], seed,
// shots, worst_infidelity}, keys sorted, one shot per branch entry.
std::string run_report(std::uint64_t seed, int shots, const std::vector<BranchResult>& shots_out,
                       double worst_infidelity);

// Largest photon infidelity of any shot's pre-readout state against the
// first shot's.
double worst_shot_infidelity(const std::vector<BranchResult>& shots);

}  // namespace sdq
