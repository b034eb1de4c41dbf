// Command-line front end; talks to the library exclusively through the
// C interface in rshlab.h.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rshlab.h"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::string seed;
    bool no_cache = false;
    bool quiet = false;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Config file (flat key = value text)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out_dir, "Output directory (overrides run.out_dir)");
    cmd->add_option("--seed", opts.seed, "Disorder seed (overrides model.seed)");
    cmd->add_flag("--no-cache", opts.no_cache, "Disable the spectrum cache");
    cmd->add_flag("--quiet", opts.quiet, "Suppress the report on stdout");
    cmd->add_option("--set", opts.overrides,
                    "Extra key=value override, applied after the config file (repeatable)");
}

int report_failure() {
    std::fprintf(stderr, "error: %s\n", rsh_last_error());
    return 1;
}

// Layering: built-in defaults, then the config file, then flags.
rsh_config* build_config(const CommonOpts& opts, int* status) {
    rsh_config* cfg = opts.config_path.empty() ? rsh_config_create()
                                               : rsh_config_load(opts.config_path.c_str());
    if (!cfg) {
        *status = report_failure();
        return nullptr;
    }
    const auto apply = [&](const std::string& key, const std::string& value) {
        if (cfg && rsh_config_set(cfg, key.c_str(), value.c_str()) != 0) {
            *status = report_failure();
            rsh_config_free(cfg);
            cfg = nullptr;
        }
    };
    for (const std::string& pair : opts.overrides) {
        const auto eq = pair.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", pair.c_str());
            if (cfg) rsh_config_free(cfg);
            *status = 1;
            return nullptr;
        }
        apply(pair.substr(0, eq), pair.substr(eq + 1));
    }
    if (!opts.out_dir.empty()) apply("run.out_dir", opts.out_dir);
    if (!opts.seed.empty()) apply("model.seed", opts.seed);
    if (opts.no_cache) apply("run.cache", "off");
    if (cfg) {
        const int rc = rsh_config_validate(cfg);
        if (rc != 0) {
            std::fprintf(stderr, "error: %s\n", rsh_last_error());
            rsh_config_free(cfg);
            *status = rc;
            return nullptr;
        }
    }
    return cfg;
}

enum class Mode { kCompare, kSweep, kDiagnose };

int run_mode(Mode mode, const CommonOpts& opts) {
    int status = 0;
    rsh_config* cfg = build_config(opts, &status);
    if (!cfg) return status;

    rsh_report* report = nullptr;
    int rc = 0;
    switch (mode) {
        case Mode::kCompare: rc = rsh_run_compare(cfg, &report); break;
        case Mode::kSweep: rc = rsh_run_sweep(cfg, &report); break;
        case Mode::kDiagnose: rc = rsh_run_diagnose(cfg, &report); break;
    }
    if (rc != 0) std::fprintf(stderr, "error: %s\n", rsh_last_error());
    if (report && !opts.quiet) std::printf("%s\n", rsh_report_json(report));
    rsh_report_free(report);
    rsh_config_free(cfg);
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for microcanonical reduced states of a small system "
                 "coupled to part of a disordered spin chain"};
    app.require_subcommand(1);
    int result = 0;

    CommonOpts compare_opts;
    CLI::App* compare =
        app.add_subcommand("compare", "Microcanonical vs bare / renormalized / mean-field "
                                      "canonical states at one parameter point");
    add_common(compare, compare_opts);
    compare->callback([&] { result = run_mode(Mode::kCompare, compare_opts); });

    CommonOpts sweep_opts;
    CLI::App* sweep =
        app.add_subcommand("sweep", "Comparison pipeline over the configured parameter grid");
    add_common(sweep, sweep_opts);
    sweep->callback([&] { result = run_mode(Mode::kSweep, sweep_opts); });

    CommonOpts diagnose_opts;
    CLI::App* diagnose = app.add_subcommand(
        "diagnose", "Structure diagnostics (overlap statistics, element hierarchy, "
                    "observable flatness, spreading widths, random-vector checks)");
    add_common(diagnose, diagnose_opts);
    diagnose->callback([&] { result = run_mode(Mode::kDiagnose, diagnose_opts); });

    CLI::App* cache = app.add_subcommand("cache", "Spectrum cache maintenance");
    cache->require_subcommand(1);
    std::string cache_dir;

    CLI::App* cache_stats = cache->add_subcommand("stats", "Entry count and total bytes");
    cache_stats->add_option("--dir", cache_dir, "Cache directory")->required();
    cache_stats->callback([&] {
        uint64_t entries = 0, bytes = 0;
        const int rc = rsh_cache_stats(cache_dir.c_str(), &entries, &bytes);
        if (rc != 0) {
            std::fprintf(stderr, "error: %s\n", rsh_last_error());
            result = rc;
            return;
        }
        std::printf("{\"entries\": %llu, \"bytes\": %llu}\n",
                    static_cast<unsigned long long>(entries),
                    static_cast<unsigned long long>(bytes));
    });

    CLI::App* cache_clear = cache->add_subcommand("clear", "Remove every cache entry");
    cache_clear->add_option("--dir", cache_dir, "Cache directory")->required();
    cache_clear->callback([&] {
        const int rc = rsh_cache_clear(cache_dir.c_str());
        if (rc != 0) {
            std::fprintf(stderr, "error: %s\n", rsh_last_error());
            result = rc;
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;  // command-line problems are configuration errors
    }
    return result;
}
