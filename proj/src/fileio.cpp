#include "sdq/fileio.hpp"

#include "sdq/expr.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sdq {

CMat parse_matrix(std::string_view text) {
    std::vector<double> vals;
    int line = 1;
    size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (c == '#') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else if (c == ' ' || c == '\t' || c == '\r' || c == ',') {
            ++i;
        } else {
            size_t j = i;
            while (j < text.size() && !std::isspace((unsigned char)text[j]) && text[j] != ',' && text[j] != '#') ++j;
            std::string tok(text.substr(i, j - i));
            size_t used = 0;
            double v = 0;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size() || !std::isfinite(v)) throw ParseError(line, 1, "not a number: '" + tok + "'");
            vals.push_back(v);
            i = j;
        }
    }
    if (vals.empty() || vals.size() % 2) throw ParseError(line, 1, "expected an even, non-zero count of reals");
    const size_t n2 = vals.size() / 2;
    const auto d = Eigen::Index(std::llround(std::sqrt(double(n2))));
    if (size_t(d * d) != n2) throw ParseError(line, 1, std::to_string(n2) + " entries do not form a square matrix");
    CMat m(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) {
            size_t k = size_t(r * d + c) * 2;
            m(r, c) = cplx(vals[k], vals[k + 1]);
        }
    return m;
}

std::string format_matrix(const CMat& m) {
    std::string out;
    char buf[64];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%s%.17g %.17g", c ? "  " : "", m(r, c).real(), m(r, c).imag());
            out += buf;
        }
        out += '\n';
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot replace " + path + ": " + ec.message());
    }
}

double round12(double v) {
    if (!std::isfinite(v)) return v;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

std::string run_report(std::uint64_t seed, int shots, const std::vector<BranchResult>& shots_out,
                       double worst_infidelity) {
    // keys in sorted order, one branch per line
    std::string out = "{\n \"branches\": [";
    for (size_t i = 0; i < shots_out.size(); ++i) {
        const BranchResult& b = shots_out[i];
        nlohmann::json e;
        e["outcome"] = b.outcome;
        e["probability"] = round12(b.probability);
        e["survival"] = round12(b.survival);
        out += (i ? ",\n  " : "\n  ") + e.dump();
    }
    out += shots_out.empty() ? "],\n" : "\n ],\n";
    out += " \"seed\": " + nlohmann::json(seed).dump() + ",\n";
    out += " \"shots\": " + nlohmann::json(shots).dump() + ",\n";
    out += " \"worst_infidelity\": " + nlohmann::json(round12(worst_infidelity)).dump() + "\n}\n";
    return out;
}

double worst_shot_infidelity(const std::vector<BranchResult>& shots) {
    if (shots.empty()) return 0.0;
    const CVec ref = photons_of(shots.front().pre_readout);
    double worst = 0.0;
    for (const BranchResult& b : shots) worst = std::max(worst, 1.0 - photon_fidelity(b.pre_readout, ref));
    // fidelities a hair above one round to a negative infidelity
    return std::max(0.0, worst);
}

}  // namespace sdq
