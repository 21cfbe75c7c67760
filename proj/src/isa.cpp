#include "sdq/isa.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <set>

namespace sdq {

const char* opcode_name(Opcode op) {
    switch (op) {
        case Opcode::OPEN: return "OPEN";
        case Opcode::CLOS: return "CLOS";
        case Opcode::ROTX: return "ROTX";
        case Opcode::ROTY: return "ROTY";
        case Opcode::MEAS: return "MEAS";
        case Opcode::INIT: return "INIT";
    }
    return "?";
}

namespace {

bool opcode_from(std::string_view w, Opcode& op) {
    static const std::pair<const char*, Opcode> table[] = {
        {"OPEN", Opcode::OPEN}, {"CLOS", Opcode::CLOS}, {"ROTX", Opcode::ROTX},
        {"ROTY", Opcode::ROTY}, {"MEAS", Opcode::MEAS}, {"INIT", Opcode::INIT}};
    for (auto& [name, o] : table)
        if (w == name) {
            op = o;
            return true;
        }
    return false;
}

std::string_view trim(std::string_view s) {
    size_t a = 0, b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return s.substr(a, b - a);
}

bool parse_state(std::string_view s, AtomInit& out) {
    // accept |x> and |x⟩
    std::string t(s);
    const std::string ket = "\xE2\x9F\xA9";
    if (t.size() >= ket.size() && t.compare(t.size() - ket.size(), ket.size(), ket) == 0)
        t = t.substr(0, t.size() - ket.size()) + ">";
    if (t == "|g0>") out = AtomInit::g0;
    else if (t == "|g1>") out = AtomInit::g1;
    else if (t == "|+>") out = AtomInit::plus;
    else return false;
    return true;
}

const char* state_text(AtomInit a) {
    switch (a) {
        case AtomInit::g0: return "|g0>";
        case AtomInit::g1: return "|g1>";
        case AtomInit::plus: return "|+>";
    }
    return "?";
}

bool is_identifier(std::string_view s) { return !s.empty() && ident_start(s, 0) && ident_end(s, 0) == s.size(); }

struct Frame {
    int level;
    std::vector<Stmt>* list;
    bool fresh;
    int opener_line;
};

class LineParser {
public:
    explicit LineParser(std::string_view text) : text_(text) {}

    Program run() {
        frames_.push_back({0, &prog_.top, false, 0});
        size_t pos = 0;
        int lineno = 0;
        while (pos <= text_.size()) {
            size_t nl = text_.find('\n', pos);
            if (nl == std::string_view::npos) nl = text_.size();
            ++lineno;
            line(text_.substr(pos, nl - pos), lineno);
            pos = nl + 1;
        }
        if (frames_.back().fresh) throw ParseError(frames_.back().opener_line, 1, "expected an indented block");
        check();
        return std::move(prog_);
    }

private:
    std::string_view text_;
    Program prog_;
    std::vector<Frame> frames_;
    char indent_char_ = 0;

    void line(std::string_view raw, int lineno) {
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        size_t ws = 0;
        while (ws < raw.size() && (raw[ws] == ' ' || raw[ws] == '\t')) ++ws;
        std::string_view rest = raw.substr(ws);
        if (trim(rest).empty()) return;

        std::string_view lead = raw.substr(0, ws);
        int level = 0;
        if (!lead.empty()) {
            bool tabs = lead.find('\t') != std::string_view::npos;
            bool spaces = lead.find(' ') != std::string_view::npos;
            if (tabs && spaces) throw ParseError(lineno, 1, "mixed tabs and spaces in indentation");
            char c = tabs ? '\t' : ' ';
            if (indent_char_ == 0) indent_char_ = c;
            if (indent_char_ != c) throw ParseError(lineno, 1, "mixed tabs and spaces in indentation");
            if (c == '\t') {
                level = int(lead.size());
            } else {
                if (lead.size() % 4 != 0) throw ParseError(lineno, 1, "indentation is not a multiple of 4 spaces");
                level = int(lead.size() / 4);
            }
        }

        size_t hash = rest.find('#');
        std::string_view code = trim(hash == std::string_view::npos ? rest : rest.substr(0, hash));
        std::string comment;
        if (hash != std::string_view::npos) {
            std::string_view c = rest.substr(hash + 1);
            while (!c.empty() && (c.back() == ' ' || c.back() == '\t')) c.remove_suffix(1);
            comment = std::string(c);
        }
        int col0 = int(ws) + 1 + int(rest.find(code.empty() ? rest : code));

        if (code.empty()) {
            // attach to the deepest open block not deeper than the comment
            size_t k = frames_.size();
            while (k > 1 && frames_[k - 1].level > level) --k;
            Stmt s = make_comment(comment);
            s.line = lineno;
            frames_[k - 1].list->push_back(std::move(s));
            return;
        }

        if (frames_.back().fresh) {
            if (level != frames_.back().level) throw ParseError(lineno, 1, "expected an indented block");
            frames_.back().fresh = false;
        } else {
            while (frames_.size() > 1 && frames_.back().level > level) frames_.pop_back();
            if (frames_.back().level != level) throw ParseError(lineno, 1, "unexpected indentation");
        }
        std::vector<Stmt>& list = *frames_.back().list;
        if (hash != std::string_view::npos) {
            Stmt c = make_comment(comment);
            c.line = lineno;
            list.push_back(std::move(c));
        }
        statement(code, lineno, col0, level, list);
    }

    void statement(std::string_view code, int lineno, int col0, int level, std::vector<Stmt>& list) {
        size_t sp = code.find_first_of(" \t");
        std::string_view word = code.substr(0, sp);
        std::string_view rest = sp == std::string_view::npos ? std::string_view{} : trim(code.substr(sp));
        int rest_col = col0 + int(sp == std::string_view::npos ? code.size() : code.find(rest, sp));

        if (word == "define") {
            if (level != 0) throw ParseError(lineno, col0, "macro definitions must be at top level");
            if (rest.empty() || rest.back() != ':') throw ParseError(lineno, col0, "expected ':' after macro header");
            std::string_view header = trim(rest.substr(0, rest.size() - 1));
            Macro m;
            m.line = lineno;
            size_t i = 0;
            bool first = true;
            while (i < header.size()) {
                while (i < header.size() && (header[i] == ' ' || header[i] == '\t')) ++i;
                size_t j = i;
                while (j < header.size() && header[j] != ' ' && header[j] != '\t') ++j;
                if (j == i) break;
                std::string_view tok = header.substr(i, j - i);
                if (!is_identifier(tok)) throw ParseError(lineno, rest_col + int(i), "bad name '" + std::string(tok) + "'");
                if (first) m.name = std::string(tok);
                else m.params.emplace_back(tok);
                first = false;
                i = j;
            }
            if (m.name.empty()) throw ParseError(lineno, col0, "missing macro name");
            Opcode dummy;
            if (opcode_from(m.name, dummy)) throw ParseError(lineno, col0, "macro name collides with an opcode");
            if (prog_.find(m.name)) throw ParseError(lineno, col0, "macro '" + m.name + "' defined twice");
            std::set<std::string> seen;
            for (auto& p : m.params)
                if (!seen.insert(p).second) throw ParseError(lineno, col0, "duplicate parameter '" + p + "'");
            prog_.macros.push_back(std::move(m));
            Stmt d;
            d.kind = Stmt::Kind::Define;
            d.line = lineno;
            d.macro = prog_.macros.size() - 1;
            list.push_back(std::move(d));
            frames_.push_back({level + 1, &prog_.macros.back().body, true, lineno});
            return;
        }

        if (word == "if") {
            if (rest.empty() || rest.back() != ':') throw ParseError(lineno, col0, "expected ':' after condition");
            std::string_view c = rest.substr(0, rest.size() - 1);
            size_t op = c.find("==");
            bool eq = true;
            if (op == std::string_view::npos) {
                op = c.find("!=");
                eq = false;
            }
            if (op == std::string_view::npos) throw ParseError(lineno, rest_col, "condition needs == or !=");
            Stmt s;
            s.kind = Stmt::Kind::If;
            s.line = lineno;
            s.cond.lhs = parse_expr(c.substr(0, op), lineno, rest_col);
            s.cond.rhs = parse_expr(c.substr(op + 2), lineno, rest_col + int(op) + 2);
            s.cond.eq = eq;
            list.push_back(std::move(s));
            frames_.push_back({level + 1, &list.back().body, true, lineno});
            return;
        }

        Opcode op;
        if (opcode_from(word, op)) {
            if (rest.empty()) throw ParseError(lineno, col0, std::string("arity mismatch: ") + opcode_name(op) + " takes one operand");
            Stmt s;
            s.kind = Stmt::Kind::Instr;
            s.line = lineno;
            s.op = op;
            if (op == Opcode::INIT) {
                if (!parse_state(rest, s.state)) throw ParseError(lineno, rest_col, "INIT expects |g0>, |g1> or |+>");
            } else if (op == Opcode::MEAS) {
                if (!is_identifier(rest)) throw ParseError(lineno, rest_col, "arity mismatch: MEAS takes one register name");
                s.operand = var(std::string(rest));
            } else {
                s.operand = parse_expr(rest, lineno, rest_col);
            }
            list.push_back(std::move(s));
            return;
        }

        if (!is_identifier(word)) throw ParseError(lineno, col0, "unknown instruction '" + std::string(word) + "'");
        Stmt s;
        s.kind = Stmt::Kind::Call;
        s.line = lineno;
        s.name = std::string(word);
        size_t i = 0;
        while (i < rest.size()) {
            while (i < rest.size() && (rest[i] == ' ' || rest[i] == '\t')) ++i;
            size_t j = i;
            while (j < rest.size() && rest[j] != ' ' && rest[j] != '\t') ++j;
            if (j == i) break;
            s.args.push_back(parse_expr(rest.substr(i, j - i), lineno, rest_col + int(i)));
            i = j;
        }
        list.push_back(std::move(s));
    }

    void check_calls(const std::vector<Stmt>& list) {
        for (const Stmt& s : list) {
            if (s.kind == Stmt::Kind::Call) {
                const Macro* m = prog_.find(s.name);
                if (!m) throw ParseError(s.line, 1, "unknown instruction or macro '" + s.name + "'");
                if (m->params.size() != s.args.size())
                    throw ParseError(s.line, 1,
                                     "arity mismatch: " + s.name + " takes " + std::to_string(m->params.size()) +
                                         " arguments, got " + std::to_string(s.args.size()));
            } else if (s.kind == Stmt::Kind::If) {
                check_calls(s.body);
            }
        }
    }

    static void callees(const std::vector<Stmt>& list, std::vector<std::string>& out) {
        for (const Stmt& s : list) {
            if (s.kind == Stmt::Kind::Call) out.push_back(s.name);
            if (s.kind == Stmt::Kind::If) callees(s.body, out);
        }
    }

    void check() {
        check_calls(prog_.top);
        for (const Macro& m : prog_.macros) check_calls(m.body);
        // recursion: depth-first search with colours
        std::map<std::string, int> colour;
        std::function<void(const Macro&)> visit = [&](const Macro& m) {
            colour[m.name] = 1;
            std::vector<std::string> cs;
            callees(m.body, cs);
            for (auto& c : cs) {
                int col = colour[c];
                if (col == 1) throw ParseError(m.line, 1, "recursive macro '" + c + "'");
                if (col == 0) visit(*prog_.find(c));
            }
            colour[m.name] = 2;
        };
        for (const Macro& m : prog_.macros)
            if (colour[m.name] == 0) visit(m);
    }
};

void print_stmts(const std::vector<Stmt>& list, const Program& p, int depth, std::string& out);

void print_stmt(const Stmt& s, const Program& p, int depth, std::string& out) {
    std::string ind(size_t(depth), '\t');
    switch (s.kind) {
        case Stmt::Kind::Comment: out += ind + "#" + s.text + "\n"; return;
        case Stmt::Kind::Instr:
            out += ind + opcode_name(s.op) + " ";
            if (s.op == Opcode::INIT) out += state_text(s.state);
            else out += to_string(s.operand);
            out += "\n";
            return;
        case Stmt::Kind::Call:
            out += ind + s.name;
            for (auto& a : s.args) out += " " + to_string(a);
            out += "\n";
            return;
        case Stmt::Kind::If:
            out += ind + "if " + to_string(s.cond.lhs) + (s.cond.eq ? " == " : " != ") + to_string(s.cond.rhs) + ":\n";
            print_stmts(s.body, p, depth + 1, out);
            return;
        case Stmt::Kind::Define: {
            const Macro& m = p.macros.at(s.macro);
            if (!out.empty() && out.substr(out.size() >= 2 ? out.size() - 2 : 0) != "\n\n") out += "\n";
            out += "define " + m.name;
            for (auto& a : m.params) out += " " + a;
            out += ":\n";
            print_stmts(m.body, p, 1, out);
            out += "\n";
            return;
        }
    }
}

void print_stmts(const std::vector<Stmt>& list, const Program& p, int depth, std::string& out) {
    for (const Stmt& s : list) print_stmt(s, p, depth, out);
}

bool equal_stmts(const std::vector<Stmt>& a, const std::vector<Stmt>& b, const Program& pa, const Program& pb);

bool equal_macro(const Macro& a, const Macro& b, const Program& pa, const Program& pb) {
    return a.name == b.name && a.params == b.params && equal_stmts(a.body, b.body, pa, pb);
}

bool equal_stmt(const Stmt& a, const Stmt& b, const Program& pa, const Program& pb) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Stmt::Kind::Comment: return a.text == b.text;
        case Stmt::Kind::Instr:
            if (a.op != b.op) return false;
            return a.op == Opcode::INIT ? a.state == b.state : equal(a.operand, b.operand);
        case Stmt::Kind::Call:
            if (a.name != b.name || a.args.size() != b.args.size()) return false;
            for (size_t i = 0; i < a.args.size(); ++i)
                if (!equal(a.args[i], b.args[i])) return false;
            return true;
        case Stmt::Kind::If: return equal(a.cond, b.cond) && equal_stmts(a.body, b.body, pa, pb);
        case Stmt::Kind::Define: return equal_macro(pa.macros.at(a.macro), pb.macros.at(b.macro), pa, pb);
    }
    return false;
}

bool equal_stmts(const std::vector<Stmt>& a, const std::vector<Stmt>& b, const Program& pa, const Program& pb) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!equal_stmt(a[i], b[i], pa, pb)) return false;
    return true;
}

// ---------------------------------------------------------------- expansion

ExprPtr raw_num(double v) {
    Expr e;
    e.kind = Expr::Kind::Num;
    e.value = v;
    return std::make_shared<const Expr>(std::move(e));
}

ExprPtr fold(const ExprPtr& e) {
    using K = Expr::Kind;
    if (e->kind == K::Num || e->kind == K::Var) return e;
    if (e->kind == K::Neg) {
        ExprPtr a = fold(e->lhs);
        if (a->kind == K::Num) return raw_num(-a->value);
        return a == e->lhs ? e : neg(a);
    }
    ExprPtr a = fold(e->lhs), b = fold(e->rhs);
    if (a->kind == K::Num && b->kind == K::Num) {
        std::vector<signed char> none;
        return raw_num(evaluate(binary(e->kind, a, b), none));
    }
    if (a == e->lhs && b == e->rhs) return e;
    return binary(e->kind, a, b);
}

using Env = std::map<std::string, ExprPtr>;

class Expander {
public:
    Expander(const Program& p, const DeviceConfig& cfg, bool dry) : p_(p), cfg_(cfg), dry_(dry) {}

    Expanded run() {
        for (const Stmt& s : p_.top)
            if (s.kind != Stmt::Kind::Define) walk_one(s, Env{}, 0);
        out_.config = cfg_;
        return std::move(out_);
    }

private:
    const Program& p_;
    DeviceConfig cfg_;
    bool dry_;
    Expanded out_;
    std::vector<Cond> guard_;
    std::map<std::string, int> regs_;
    std::vector<bool> written_;

    [[noreturn]] static void fail(int line, const std::string& msg) { throw ParseError(line, 1, msg); }

    int photon_of(const ExprPtr& arg, int line) {
        if (arg->kind == Expr::Kind::Num) {
            double v = arg->value;
            if (v < 0 || v != std::floor(v)) fail(line, "photon index must be a non-negative integer");
            return int(v);
        }
        if (arg->kind == Expr::Kind::Var) {
            const std::string& n = arg->name;
            if (n.size() >= 2 && n[0] == 'q' && n.find_first_not_of("0123456789", 1) == std::string::npos) {
                int k = std::stoi(n.substr(1));
                if (k < 1) fail(line, "photon names start at q1");
                return k - 1;
            }
        }
        fail(line, "'" + to_string(arg) + "' is not a photon reference");
    }

    // Parameter substitution only; names that are not parameters survive.
    ExprPtr subst(const ExprPtr& e, const Env& env, int line) {
        using K = Expr::Kind;
        switch (e->kind) {
            case K::Num: return e;
            case K::Var: {
                auto it = env.find(e->name);
                if (it != env.end()) return it->second;
                if (e->name.rfind("t_", 0) == 0) {
                    auto jt = env.find(e->name.substr(2));
                    if (jt != env.end()) return var("t_" + photon_name(photon_of(jt->second, line)));
                }
                return e;
            }
            case K::Neg: return neg(subst(e->lhs, env, line));
            default: return binary(e->kind, subst(e->lhs, env, line), subst(e->rhs, env, line));
        }
    }

    ExprPtr bind(const ExprPtr& e, int line) {
        using K = Expr::Kind;
        switch (e->kind) {
            case K::Num: return e;
            case K::Var: {
                const std::string& n = e->name;
                if (n == "π" || n == "pi") return raw_num(kPi);
                if (n == "Δt" || n == "dt") return raw_num(cfg_.dt);
                if (n == "N") return raw_num(double(cfg_.bins()));
                if (n.rfind("t_", 0) == 0) {
                    int k = photon_of(var(n.substr(2)), line);
                    if (cfg_.n_photons > 0 && k >= cfg_.n_photons)
                        fail(line, "photon " + photon_name(k) + " out of range");
                    out_.max_photon = std::max(out_.max_photon, k);
                    return raw_num(k * cfg_.dt);
                }
                auto it = regs_.find(n);
                if (it == regs_.end() || !written_[size_t(it->second)])
                    fail(line, "register '" + n + "' read before write");
                Expr v = *e;
                v.reg = it->second;
                return std::make_shared<const Expr>(std::move(v));
            }
            case K::Neg: return neg(bind(e->lhs, line));
            default: return binary(e->kind, bind(e->lhs, line), bind(e->rhs, line));
        }
    }

    ExprPtr resolve(const ExprPtr& e, const Env& env, int line) { return fold(bind(subst(e, env, line), line)); }

    void walk(const std::vector<Stmt>& list, const Env& env, int depth) {
        for (const Stmt& s : list) walk_one(s, env, depth);
    }

    void walk_one(const Stmt& s, const Env& env, int depth) {
        switch (s.kind) {
            case Stmt::Kind::Comment:
            case Stmt::Kind::Define: return;
            case Stmt::Kind::Instr: instr(s, env); return;
            case Stmt::Kind::If: {
                Cond c{resolve(s.cond.lhs, env, s.line), resolve(s.cond.rhs, env, s.line), s.cond.eq};
                guard_.push_back(c);
                walk(s.body, env, depth);
                guard_.pop_back();
                return;
            }
            case Stmt::Kind::Call: {
                if (depth > 64) fail(s.line, "macro nesting too deep");
                const Macro* m = p_.find(s.name);
                if (!m) fail(s.line, "unknown macro '" + s.name + "'");
                if (m->params.size() != s.args.size()) fail(s.line, "arity mismatch calling " + s.name);
                Env inner;
                for (size_t i = 0; i < m->params.size(); ++i) inner[m->params[i]] = subst(s.args[i], env, s.line);
                walk(m->body, inner, depth + 1);
                return;
            }
        }
    }

    void instr(const Stmt& s, const Env& env) {
        XInstr x;
        x.op = s.op;
        x.line = s.line;
        x.guard = guard_;
        switch (s.op) {
            case Opcode::OPEN:
            case Opcode::CLOS: {
                ExprPtr t = resolve(s.operand, env, s.line);
                if (t->kind != Expr::Kind::Num) fail(s.line, "switch time depends on a register");
                x.time = t->value;
                break;
            }
            case Opcode::ROTX:
            case Opcode::ROTY: x.operand = resolve(s.operand, env, s.line); break;
            case Opcode::MEAS: {
                ExprPtr r = subst(s.operand, env, s.line);
                if (r->kind != Expr::Kind::Var) fail(s.line, "MEAS target must be a register name");
                auto [it, fresh] = regs_.emplace(r->name, int(regs_.size()));
                if (fresh) {
                    out_.registers.push_back(r->name);
                    written_.push_back(false);
                }
                x.reg = it->second;
                break;
            }
            case Opcode::INIT: x.init = s.state; break;
        }
        out_.code.push_back(std::move(x));
        // written only after the instruction, so MEAS m cannot read m
        if (s.op == Opcode::MEAS) written_[size_t(out_.code.back().reg)] = true;
        (void)dry_;
    }
};

}  // namespace

bool equal(const Cond& a, const Cond& b) { return a.eq == b.eq && equal(a.lhs, b.lhs) && equal(a.rhs, b.rhs); }

const Macro* Program::find(std::string_view name) const {
    for (const Macro& m : macros)
        if (m.name == name) return &m;
    return nullptr;
}

std::vector<const Stmt*> Program::body() const {
    std::vector<const Stmt*> out;
    for (const Stmt& s : top)
        if (s.kind != Stmt::Kind::Comment && s.kind != Stmt::Kind::Define) out.push_back(&s);
    return out;
}

Program parse(std::string_view text) { return LineParser(text).run(); }

std::string print(const Program& p) {
    std::string out;
    print_stmts(p.top, p, 0, out);
    return out;
}

bool equal(const Program& a, const Program& b) { return equal_stmts(a.top, b.top, a, b); }

Stmt make_instr(Opcode op, ExprPtr operand) {
    Stmt s;
    s.kind = Stmt::Kind::Instr;
    s.op = op;
    s.operand = std::move(operand);
    return s;
}

Stmt make_init(AtomInit which) {
    Stmt s;
    s.kind = Stmt::Kind::Instr;
    s.op = Opcode::INIT;
    s.state = which;
    return s;
}

Stmt make_call(std::string name, std::vector<ExprPtr> args) {
    Stmt s;
    s.kind = Stmt::Kind::Call;
    s.name = std::move(name);
    s.args = std::move(args);
    return s;
}

Stmt make_comment(std::string text) {
    Stmt s;
    s.kind = Stmt::Kind::Comment;
    s.text = std::move(text);
    return s;
}

std::string photon_name(int index) { return "q" + std::to_string(index + 1); }

int Expanded::register_index(std::string_view name) const {
    for (size_t i = 0; i < registers.size(); ++i)
        if (registers[i] == name) return int(i);
    return -1;
}

int Expanded::meas_count() const {
    int n = 0;
    for (auto& x : code)
        if (x.op == Opcode::MEAS) ++n;
    return n;
}

Expanded expand(const Program& p, const DeviceConfig& cfg) {
    DeviceConfig c = cfg;
    if (c.dt <= 0) throw std::invalid_argument("time-bin spacing must be positive");
    if (c.n_photons == 0 || c.N == 0) {
        // first pass only discovers which photons are addressed
        DeviceConfig probe = c;
        probe.n_photons = 0;
        if (probe.N == 0) probe.N = 1;
        Expanded x = Expander(p, probe, true).run();
        if (c.n_photons == 0) c.n_photons = x.max_photon + 1;
    }
    if (c.N == 0) c.N = c.n_photons;
    if (c.N < c.n_photons) throw std::invalid_argument("ring must hold at least one bin per photon");
    return Expander(p, c, false).run();
}

}  // namespace sdq
