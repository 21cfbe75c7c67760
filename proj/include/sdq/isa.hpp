#pragma once

#include "sdq/device.hpp"
#include "sdq/expr.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace sdq {

enum class Opcode { OPEN, CLOS, ROTX, ROTY, MEAS, INIT };

const char* opcode_name(Opcode op);

struct Cond {
    ExprPtr lhs, rhs;
    bool eq = true;  // == or !=
};

bool equal(const Cond& a, const Cond& b);

struct Stmt {
    enum class Kind { Instr, Call, If, Comment, Define };
    Kind kind = Kind::Instr;
    int line = 0;

    Opcode op = Opcode::OPEN;  // Instr
    ExprPtr operand;           // time / angle / register (Var)
    AtomInit state = AtomInit::g0;  // INIT

    std::string name;           // Call target
    std::vector<ExprPtr> args;  // Call

    Cond cond;               // If
    std::vector<Stmt> body;  // If

    std::string text;   // Comment, without the leading '#'
    size_t macro = 0;   // Define: index into Program::macros
};

struct Macro {
    std::string name;
    std::vector<std::string> params;
    std::vector<Stmt> body;
    int line = 0;
};

struct Program {
    std::vector<Macro> macros;
    std::vector<Stmt> top;  // statements, comments and Define markers in file order

    const Macro* find(std::string_view name) const;
    // top-level statements that are neither comments nor macro definitions
    std::vector<const Stmt*> body() const;
};

Program parse(std::string_view text);
std::string print(const Program& p);
bool equal(const Program& a, const Program& b);

// Statement helpers used by the compiler.
Stmt make_instr(Opcode op, ExprPtr operand);
Stmt make_init(AtomInit which);
Stmt make_call(std::string name, std::vector<ExprPtr> args);
Stmt make_comment(std::string text);
std::string photon_name(int index);  // 0 -> "q1"

struct DeviceConfig {
    int n_photons = 0;  // 0: infer from the program
    double dt = 1.0;    // time-bin spacing
    int N = 0;          // bins around the ring; 0: use n_photons
    double loss = 0.0;  // per ring cycle

    int bins() const { return N > 0 ? N : n_photons; }
};

struct XInstr {
    Opcode op = Opcode::OPEN;
    ExprPtr operand;        // ROTX/ROTY: resolved angle (registers bound)
    double time = 0.0;      // OPEN/CLOS: time relative to the current ring cycle
    AtomInit init = AtomInit::g0;
    int reg = -1;           // MEAS target
    std::vector<Cond> guard;  // all must hold
    int line = 0;
};

struct Expanded {
    std::vector<XInstr> code;
    std::vector<std::string> registers;
    int max_photon = -1;
    DeviceConfig config;  // photon and bin counts filled in

    int register_index(std::string_view name) const;
    int meas_count() const;
};

// Inline macros, bind parameters, resolve Δt, N, t_<photon>, π. Register
// expressions stay symbolic.
Expanded expand(const Program& p, const DeviceConfig& cfg = {});

}  // namespace sdq
