#include "rshlab.h"

#include <cstring>
#include <exception>
#include <string>

#include "json.hpp"
#include "rsh/config.hpp"
#include "rsh/errors.hpp"
#include "rsh/pipeline.hpp"
#include "rsh/spectrum_cache.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kNumericError = 2;
constexpr int kPartialFailure = 3;

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

int classify(const std::exception& e) {
    return dynamic_cast<const rsh::ConfigError*>(&e) ? kConfigError : kNumericError;
}

}  // namespace

struct rsh_config {
    rsh::ExperimentConfig cfg;
};

struct rsh_report {
    std::string json_text;
};

extern "C" {

rsh_config* rsh_config_create(void) {
    try {
        return new rsh_config{};
    } catch (const std::exception& e) {
        set_error(e.what());
        return nullptr;
    }
}

rsh_config* rsh_config_load(const char* path) {
    if (!path) {
        set_error("rsh_config_load: path is NULL");
        return nullptr;
    }
    try {
        return new rsh_config{rsh::load_config(path)};
    } catch (const std::exception& e) {
        set_error(e.what());
        return nullptr;
    }
}

rsh_config* rsh_config_parse(const char* text) {
    if (!text) {
        set_error("rsh_config_parse: text is NULL");
        return nullptr;
    }
    try {
        return new rsh_config{rsh::parse_config(text)};
    } catch (const std::exception& e) {
        set_error(e.what());
        return nullptr;
    }
}

int rsh_config_set(rsh_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) {
        set_error("rsh_config_set: NULL argument");
        return kConfigError;
    }
    try {
        rsh::apply_config_override(cfg->cfg, key, value);
        return kOk;
    } catch (const std::exception& e) {
        set_error(e.what());
        return classify(e);
    }
}

int rsh_config_validate(const rsh_config* cfg) {
    if (!cfg) {
        set_error("rsh_config_validate: config is NULL");
        return kConfigError;
    }
    try {
        rsh::validate_config(cfg->cfg);
        return kOk;
    } catch (const std::exception& e) {
        set_error(e.what());
        return classify(e);
    }
}

char* rsh_config_serialize(const rsh_config* cfg) {
    if (!cfg) {
        set_error("rsh_config_serialize: config is NULL");
        return nullptr;
    }
    try {
        const std::string text = rsh::serialize_config(cfg->cfg);
        char* out = new char[text.size() + 1];
        std::memcpy(out, text.c_str(), text.size() + 1);
        return out;
    } catch (const std::exception& e) {
        set_error(e.what());
        return nullptr;
    }
}

void rsh_config_free(rsh_config* cfg) { delete cfg; }

int rsh_run_compare(const rsh_config* cfg, rsh_report** out) {
    if (out) *out = nullptr;
    if (!cfg) {
        set_error("rsh_run_compare: config is NULL");
        return kConfigError;
    }
    try {
        rsh::validate_config(cfg->cfg);
        const nlohmann::json rep = rsh::run_comparison(cfg->cfg);
        if (out) *out = new rsh_report{rep.dump(2)};
        return kOk;
    } catch (const std::exception& e) {
        set_error(e.what());
        return classify(e);
    }
}

int rsh_run_sweep(const rsh_config* cfg, rsh_report** out) {
    if (out) *out = nullptr;
    if (!cfg) {
        set_error("rsh_run_sweep: config is NULL");
        return kConfigError;
    }
    try {
        rsh::validate_config(cfg->cfg);
        const rsh::SweepSummary summary = rsh::run_sweep(cfg->cfg);
        if (out) {
            nlohmann::json rep;
            rep["n_points"] = summary.points.size();
            rep["n_failed"] = summary.n_failed;
            rep["fits"] = summary.fits;
            rep["csv_path"] = summary.csv_path.string();
            *out = new rsh_report{rep.dump(2)};
        }
        if (summary.n_failed > 0) {
            set_error(std::to_string(summary.n_failed) + " of " +
                      std::to_string(summary.points.size()) + " sweep points failed");
            return kPartialFailure;
        }
        return kOk;
    } catch (const std::exception& e) {
        set_error(e.what());
        return classify(e);
    }
}

int rsh_run_diagnose(const rsh_config* cfg, rsh_report** out) {
    if (out) *out = nullptr;
    if (!cfg) {
        set_error("rsh_run_diagnose: config is NULL");
        return kConfigError;
    }
    try {
        rsh::validate_config(cfg->cfg);
        const nlohmann::json rep = rsh::run_diagnose(cfg->cfg);
        if (out) *out = new rsh_report{rep.dump(2)};
        return kOk;
    } catch (const std::exception& e) {
        set_error(e.what());
        return classify(e);
    }
}

const char* rsh_report_json(const rsh_report* report) {
    return report ? report->json_text.c_str() : nullptr;
}

void rsh_report_free(rsh_report* report) { delete report; }

int rsh_cache_stats(const char* dir, uint64_t* entries, uint64_t* bytes) {
    if (!dir) {
        set_error("rsh_cache_stats: dir is NULL");
        return kConfigError;
    }
    try {
        const rsh::SpectrumCache cache{dir};
        const auto stats = cache.stats();
        if (entries) *entries = stats.entries;
        if (bytes) *bytes = stats.bytes;
        return kOk;
    } catch (const std::exception& e) {
        set_error(e.what());
        return classify(e);
    }
}

int rsh_cache_clear(const char* dir) {
    if (!dir) {
        set_error("rsh_cache_clear: dir is NULL");
        return kConfigError;
    }
    try {
        rsh::SpectrumCache{dir}.clear();
        return kOk;
    } catch (const std::exception& e) {
        set_error(e.what());
        return classify(e);
    }
}

const char* rsh_last_error(void) { return g_last_error.c_str(); }

void rsh_string_free(char* text) { delete[] text; }

const char* rsh_version(void) { return "0.1.0"; }

}  // extern "C"
