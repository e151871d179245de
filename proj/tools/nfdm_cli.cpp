#include "nfdm/experiment.hpp"
#include "nfdm/log.hpp"
#include "nfdm/selftest.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

using namespace nfdm;

namespace {

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2, kSelftest = 3 };

struct Common {
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
};

ExperimentConfig load_config(const std::string& path, const Common& common) {
    auto kv = KeyValueConfig::load(path);
    if (common.seed) kv.set("seed", std::to_string(*common.seed));
    if (common.workers) kv.set("workers", std::to_string(*common.workers));
    return ExperimentConfig::from_kv(kv);
}

template <class Fn>
void with_output(const std::string& path, Fn fn) {
    if (path.empty()) {
        fn(std::cout);
        return;
    }
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot open output file '" + path + "'");
    fn(os);
    if (!os) throw Error("failed writing '" + path + "'");
}

int cmd_simulate(const std::string& config, const Common& common) {
    const auto cfg = load_config(config, common);
    const auto rows = run_sweep(cfg);
    with_output(common.out, [&](std::ostream& os) { write_csv(os, rows); });
    return kOk;
}

int cmd_bounds(const std::string& config, const Common& common) {
    const auto cfg = load_config(config, common);
    const auto rows = run_bounds(cfg);
    with_output(common.out, [&](std::ostream& os) { write_bounds_csv(os, rows); });
    for (const auto& b : rows) {
        std::fprintf(stderr,
                     "ps_dbm=%g semianalytic: %zu sequences (%s), pe_lower=%.4g pe_approx=%.4g pe_upper=%.4g; "
                     "counting: %zu bursts (%s), pe=%.4g\n",
                     b.row.ps_dbm, b.semianalytic_sequences, b.semianalytic_converged ? "converged" : "not converged",
                     b.row.pe_lower, b.row.pe_approx, b.row.pe_upper, b.counting_bursts,
                     b.counting_converged ? "converged" : "not converged", b.row.pe);
    }
    return kOk;
}

int cmd_demo(const std::string& config, const Common& common) {
    const auto cfg = load_config(config, common);
    const auto demo = demo_causality(cfg);
    with_output(common.out, [&](std::ostream& os) { write_demo_csv(os, demo, cfg.normalization()); });
    std::fprintf(stderr, "t_k=%g ps deviation_before=%.3e deviation_after=%.3e\n",
                 demo.t_k * cfg.normalization().T0 * 1e12, demo.deviation_before, demo.deviation_after);
    if (demo.deviation_before > 1e-4) throw Error("waveforms differ before t_k");
    return kOk;
}

int cmd_selftest(const std::string& fault) {
    const auto suites = run_selftest(fault_from_string(fault));
    bool ok = true;
    for (const auto& s : suites) {
        std::printf("%-12s %s  %.2f s\n", s.suite.c_str(), s.passed() ? "PASS" : "FAIL", s.wall_time_s);
        for (const auto& i : s.invariants)
            if (!i.passed) std::printf("  FAIL %s: %s\n", i.name.c_str(), i.detail.c_str());
        ok = ok && s.passed();
    }
    return ok ? kOk : kSelftest;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NFDM transmission simulator"};
    app.require_subcommand(1);
    Common common;
    bool verbose = false;
    std::string config;
    std::string fault = "none";

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config, "Configuration file")->required();
        sub->add_option("--out", common.out, "Output CSV path (default stdout)");
        sub->add_option("--seed", common.seed, "Master seed, overrides the config");
        sub->add_option("--workers", common.workers, "Worker threads, overrides the config");
        sub->add_flag("--verbose", verbose, "Progress on stderr");
    };
    auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo sweep");
    add_common(simulate);
    auto* bounds = app.add_subcommand("bounds", "Semianalytic estimates and counting convergence");
    add_common(bounds);
    auto* demo = app.add_subcommand("demo-causality", "Waveforms of two bursts sharing a prefix");
    add_common(demo);
    auto* selftest = app.add_subcommand("selftest", "Run the invariant suites");
    selftest->add_option("--inject-fault", fault, "Fault to inject (glme-tolerance)");
    selftest->add_flag("--verbose", verbose, "Progress on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }
    set_verbose(verbose);
    try {
        if (*simulate) return cmd_simulate(config, common);
        if (*bounds) return cmd_bounds(config, common);
        if (*demo) return cmd_demo(config, common);
        return cmd_selftest(fault);
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kRuntime;
    }
}
