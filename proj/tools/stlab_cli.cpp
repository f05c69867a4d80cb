// stlab: run one scenario file.
//
//   stlab --config scenarios/stab.cfg [--out DIR] [--threads N] [--exact-linear] [--accept]
//
// Exit status: 0 success, 2 acceptance failure (with --accept), 1 error.

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "stlab/errors.hpp"
#include "stlab/io.hpp"
#include "stlab/parallel.hpp"
#include "stlab/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Stokes-transport scenario runner"};
    std::string config, out;
    int threads = 0;
    bool exact_linear = false, accept = false, schema = false;
    app.add_option("--config", config, "scenario file");
    app.add_option("--out", out, "output directory (overrides output.dir)");
    app.add_option("--threads", threads, "worker threads (default: STLAB_THREADS or 1)")->check(CLI::PositiveNumber);
    app.add_flag("--exact-linear", exact_linear, "exact per-mode propagation (linear mode only)");
    app.add_flag("--accept", accept, "evaluate the acceptance checks and set the exit status");
    app.add_flag("--schema", schema, "print the scenario key table and exit");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    if (schema) {
        std::cout << stlab::schema_markdown();
        return 0;
    }
    if (config.empty()) {
        std::cerr << "error: --config is required\n";
        return 1;
    }
    if (threads > 0) stlab::set_thread_count(threads);

    try {
        stlab::Scenario sc = stlab::load_scenario(config);
        stlab::RunOptions opt{out, exact_linear, accept};
        stlab::ScenarioOutcome res = stlab::run_scenario(sc, opt);
        for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
        for (const auto& c : res.checks)
            std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << stlab::fmt_double(c.value) << " (bound "
                      << c.bound << (c.enforced ? "" : ", report only") << ")\n";
        std::cout << "outputs in " << res.out_dir << "\n";
        if (accept && !res.accepted()) return 2;
        return 0;
    } catch (const stlab::BlowUpError& e) {
        std::cerr << "error: blow-up: " << e.what() << " (last valid time " << stlab::fmt_double(e.time) << ")\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return 1;
}
