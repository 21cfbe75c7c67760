// sdq: compile circuits, run and verify programs, sweep the cavity model.
// Exit codes: 0 success, 1 verification failure, 2 input error.

#include "sdq/compiler.hpp"
#include "sdq/fileio.hpp"
#include "sdq/transport.hpp"
#include "sdq/vm.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>

using namespace sdq;

namespace {

constexpr int kOk = 0, kFailed = 1, kInputError = 2;

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-")
        std::cout << content;
    else
        write_file_atomic(path, content);
}

std::uint64_t default_seed() {
    const char* env = std::getenv("SDQ_SEED");
    if (!env || !*env) return 0;
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (*end) throw std::invalid_argument(std::string("SDQ_SEED is not an unsigned integer: ") + env);
    return v;
}

struct CompileArgs {
    std::string circuit, out, mode = "explicit", cz = "measured";
};

int cmd_compile(const CompileArgs& a) {
    CompileOptions opt;
    opt.mode = a.mode == "folded" ? CompileMode::folded : CompileMode::explicit_corrections;
    opt.cz = a.cz == "via_swap" ? CzStrategy::via_swap : CzStrategy::measured;
    Program p = compile_circuit(parse_circuit(read_file(a.circuit)), opt);
    emit(a.out, print(p));
    return kOk;
}

struct RunArgs {
    std::string program, report;
    int shots = 1;
    std::optional<std::uint64_t> seed;
    double loss = 0.0;
    int threads = 0;
};

int cmd_run(const RunArgs& a) {
    Program p = parse(read_file(a.program));
    RunConfig rc;
    rc.seed = a.seed ? *a.seed : default_seed();
    rc.shots = a.shots;
    rc.threads = a.threads;
    rc.device.loss = a.loss;
    rc.loss_enabled = a.loss > 0;
    auto shots = run_sampled(p, rc);
    emit(a.report, run_report(rc.seed, rc.shots, shots, worst_shot_infidelity(shots)));
    return kOk;
}

struct VerifyArgs {
    std::string program, target;
    double tol = 1e-6;
    std::optional<std::uint64_t> seed;
};

int cmd_verify(const VerifyArgs& a) {
    Program p = parse(read_file(a.program));
    CMat target = parse_matrix(read_file(a.target));
    RunConfig rc;
    rc.seed = a.seed ? *a.seed : default_seed();
    Verification v = verify_program(p, target, rc);
    std::printf("worst_infidelity %.12g\n", v.worst_infidelity);
    if (!v.exhaustive)
        std::printf("note: branch count exceeded the merge limit; %zu sampled shots give a lower bound\n", v.samples);
    return v.worst_infidelity <= a.tol ? kOk : kFailed;
}

struct GridArgs {
    double tau = 100, window = 500, gamma_ratio = 0.2;
    int samples = 4096, threads = 0;

    PulseGrid grid() const { return PulseGrid::centered(tau, window, samples); }
};

void add_grid_flags(CLI::App* sc, GridArgs& g) {
    sc->add_option("--tau", g.tau, "pulse width (1/kappa)")->check(CLI::PositiveNumber);
    sc->add_option("--window", g.window, "time window T (1/kappa)")->check(CLI::PositiveNumber);
    sc->add_option("--samples", g.samples, "grid samples, a power of two")->check(CLI::PositiveNumber);
    sc->add_option("--gamma-ratio", g.gamma_ratio, "gamma_s / kappa")->check(CLI::PositiveNumber);
    sc->add_option("--threads", g.threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
}

struct SweepArgs {
    double cmin = 1, cmax = 1e5;
    int points = 30;
    GridArgs grid;
    std::string out;
};

int cmd_sweep(const SweepArgs& a) {
    if (a.cmin < 1 || a.cmax < a.cmin) throw std::invalid_argument("need 1 <= cmin <= cmax");
    CavityParams tmpl;
    tmpl.gamma_s = a.grid.gamma_ratio;
    auto rows = sweep_cooperativity(log_space(a.cmin, a.cmax, a.points), tmpl, a.grid.grid(), a.grid.threads);
    emit(a.out, sweep_csv(rows));
    return kOk;
}

struct DepthArgs {
    double target = 0.5, cmin = 10, cmax = 1e5, lmin = 1e-5, lmax = 1e-2;
    int cpoints = 9, lpoints = 4;
    GridArgs grid;
    std::string out;
};

int cmd_depth(const DepthArgs& a) {
    if (a.cmin < 1 || a.cmax < a.cmin) throw std::invalid_argument("need 1 <= cmin <= cmax");
    auto cells = depth_map(log_space(a.cmin, a.cmax, a.cpoints), log_space(a.lmin, a.lmax, a.lpoints), a.target,
                           a.grid.grid(), a.grid.gamma_ratio, a.grid.threads);
    emit(a.out, depth_csv(cells));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sdq: programs for a single-atom, synthetic-dimension photonic processor"};
    app.require_subcommand(1, 1);

    CompileArgs ca;
    auto* c = app.add_subcommand("compile", "compile a circuit file to a program");
    c->add_option("--circuit", ca.circuit, "circuit file")->required();
    c->add_option("--mode", ca.mode, "explicit or folded corrections")
        ->check(CLI::IsMember({"explicit", "folded"}));
    c->add_option("--cz", ca.cz, "measured or via_swap")->check(CLI::IsMember({"measured", "via_swap"}));
    c->add_option("--out", ca.out, "output .sdq (default: stdout)");

    RunArgs ra;
    auto* r = app.add_subcommand("run", "sample shots of a program");
    r->add_option("--program", ra.program, "program file")->required();
    r->add_option("--shots", ra.shots, "number of shots")->check(CLI::PositiveNumber);
    r->add_option("--seed", ra.seed, "seed (default: $SDQ_SEED or 0)");
    r->add_option("--loss", ra.loss, "photon loss per ring cycle")->check(CLI::Range(0.0, 1.0));
    r->add_option("--threads", ra.threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
    r->add_option("--report", ra.report, "JSON report path (default: stdout)");

    VerifyArgs va;
    auto* v = app.add_subcommand("verify", "worst-case infidelity against a target unitary");
    v->add_option("--program", va.program, "program file")->required();
    v->add_option("--target", va.target, "matrix file, row-major re/im pairs")->required();
    v->add_option("--tol", va.tol, "pass threshold")->check(CLI::NonNegativeNumber);
    v->add_option("--seed", va.seed, "seed for the random test inputs (default: $SDQ_SEED or 0)");

    SweepArgs sa;
    auto* s = app.add_subcommand("transport-sweep", "shape infidelity and leakage against cooperativity");
    s->add_option("--cmin", sa.cmin, "smallest cooperativity");
    s->add_option("--cmax", sa.cmax, "largest cooperativity");
    s->add_option("--points", sa.points, "log-spaced points")->check(CLI::PositiveNumber);
    add_grid_flags(s, sa.grid);
    s->add_option("--out", sa.out, "CSV path (default: stdout)");

    DepthArgs da;
    auto* d = app.add_subcommand("depth-map", "achievable depth over cooperativity and loss");
    d->add_option("--target", da.target, "success probability to keep")->check(CLI::Range(0.0, 1.0));
    d->add_option("--cmin", da.cmin, "smallest cooperativity");
    d->add_option("--cmax", da.cmax, "largest cooperativity");
    d->add_option("--cpoints", da.cpoints, "log-spaced cooperativities")->check(CLI::PositiveNumber);
    d->add_option("--lmin", da.lmin, "smallest loss per cycle")->check(CLI::PositiveNumber);
    d->add_option("--lmax", da.lmax, "largest loss per cycle")->check(CLI::PositiveNumber);
    d->add_option("--lpoints", da.lpoints, "log-spaced losses")->check(CLI::PositiveNumber);
    add_grid_flags(d, da.grid);
    d->add_option("--out", da.out, "CSV path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kInputError;
    }

    try {
        if (*c) return cmd_compile(ca);
        if (*r) return cmd_run(ra);
        if (*v) return cmd_verify(va);
        if (*s) return cmd_sweep(sa);
        if (*d) return cmd_depth(da);
    } catch (const ParseError& e) {
        std::cerr << "sdq: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "sdq: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}
