// Command-line front end. Options are shared by all subcommands and may also
// come from a flat key=value file given with --config; flags win over the file.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "balsel/commands.hpp"

int main(int argc, char** argv) {
    using namespace balsel;

    CLI::App app{"Balanced-mode sensor and actuator selection"};
    app.set_config("--config", "", "key=value file with default option values");
    app.require_subcommand(1, 1);
    app.fallthrough();

    RunConfig cfg;
    std::string generate;
    std::vector<long long> seeds;
    long long cap = -1;

    app.add_option("--model", cfg.model_path, "model file (matrix text format)");
    app.add_option("--generate", generate, "random model n,p,q,seed[,discrete]");
    app.add_option("--rank", cfg.rank, "balanced rank r (also the sensor/actuator budget)");
    app.add_option("--budget", cfg.budget, "subset size for bruteforce (defaults to --rank)");
    app.add_flag("--no-collocate", cfg.no_collocate, "forbid a sensor at any chosen actuator location");
    app.add_option("--metric", cfg.metric, "objective: logdet, trace or h2")
        ->check(CLI::IsMember({"logdet", "trace", "h2"}));
    app.add_option("--seeds", seeds, "seed list, comma separated")->delimiter(',');
    app.add_option("--ensemble-count", cfg.ensemble_count, "random selections per (seed, r)");
    app.add_option("--out", cfg.out, "output file, or directory for gramians and gl-demo");
    app.add_option("--cap", cap, "enumeration cap (default 1e6, or BALSEL_CAP)");
    app.add_option("--gl-params", cfg.gl_params, "Ginzburg-Landau parameter file (key=value)");
    app.add_option("--freq-grid", cfg.freq_grid, "gain frequencies lo,hi,count (log spaced)");
    app.add_option("--sizes", cfg.sizes, "scaling: state dimensions")->delimiter(',');
    app.add_option("--ranks", cfg.ranks, "scaling: ranks at the largest size")->delimiter(',');
    app.add_option("--repeats", cfg.repeats, "scaling: timing repetitions (minimum is kept)");

    app.add_subcommand("gramians", "write controllability and observability gramians");
    app.add_subcommand("select", "balanced-mode pivoted-QR selection with objectives and bounds");
    app.add_subcommand("bruteforce", "enumerate every sensor subset and rank the QR choice");
    app.add_subcommand("bench-random", "QR objective against random selections over r");
    app.add_subcommand("gl-demo", "Ginzburg-Landau placement, closed-loop H2 and controller gains");
    app.add_subcommand("scaling", "time pivoted QR against n and r");

    try {
        app.parse(argc, argv);
        cfg.command = app.get_subcommands().front()->get_name();
        if (!generate.empty()) cfg.generate = GeneratorSpec::parse(generate);
        for (long long s : seeds) {
            if (s < 0) throw ParseError("--seeds must be non-negative");
            cfg.seeds.push_back(static_cast<std::uint64_t>(s));
        }
        if (cap >= 0) cfg.cap = static_cast<std::uint64_t>(cap);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_parse;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return exit_parse;
    }
    return run_command(cfg, std::cout, std::cerr);
}
