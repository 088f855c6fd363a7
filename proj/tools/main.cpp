#include <iostream>

#include "CLI11.hpp"

#include "broker/simplex.hpp"
#include "commands.hpp"

int main(int argc, char **argv) {
    using namespace brokerctl;
    CLI::App app{"Optimal data-broker mechanisms on the Hotelling line: closed forms, LP oracle, welfare."};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    std::string scenario;
    std::string engine = "both";
    std::string out;
    std::string param;
    std::string target;
    double from = 0.0;
    double to = 0.0;
    double step = 1.0;
    bool debug_lp = false;
    Overrides over;
    std::size_t grid = 0;
    double tol = 0.0;

    const auto add_common = [&](CLI::App *c) {
        c->add_option("--grid", grid, "Replace the population with a uniform grid of N types");
        c->add_option("--tol", tol, "Feasibility tolerance");
    };

    auto *solve = app.add_subcommand("solve", "Solve a scenario and write a result file");
    solve->add_option("--scenario", scenario, "Scenario file (JSON)")->required();
    solve->add_option("--engine", engine, "analytic, lp or both")->check(CLI::IsMember({"analytic", "lp", "both"}));
    solve->add_option("--out", out, "Result file (default: stdout)");
    solve->add_flag("--debug-lp", debug_lp, "Print the LP to stderr");
    add_common(solve);

    auto *verify = app.add_subcommand("verify", "Run audits and invariant checks on a scenario or result file");
    verify->add_option("--scenario", scenario, "Scenario or result file (JSON)")->required();
    add_common(verify);

    auto *sweep = app.add_subcommand("sweep", "Sweep one parameter and write CSV");
    sweep->add_option("--scenario", scenario, "Base scenario file (JSON)")->required();
    sweep->add_option("--param", param, "H, L, t, V or N")->required();
    sweep->add_option("--from", from, "First value")->required();
    sweep->add_option("--to", to, "Last value")->required();
    sweep->add_option("--step", step, "Step")->required();
    sweep->add_option("--out", out, "CSV file (default: stdout)");
    add_common(sweep);

    auto *repro = app.add_subcommand("repro", "Reproduce a canonical result");
    repro->add_option("target", target, "example1, table1, theorem1, prop2 or prop3")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalidInput;
    }
    if (grid) over.grid = grid;
    if (tol > 0.0) over.tolerance = tol;

    try {
        if (*repro) return cmd_repro(target, std::cout);
        if (*verify) return cmd_verify(scenario, over, std::cout);
        auto s = load_scenario(scenario);
        apply(over, s);
        if (*solve) return cmd_solve(s, engine, out, debug_lp);
        return cmd_sweep(s, param, from, to, step, out);
    } catch (const broker::lp::SolverFailure &e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kSolverFailure;
    } catch (const std::invalid_argument &e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kInvalidInput;
    } catch (const nlohmann::json::exception &e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kInvalidInput;
    }
}
