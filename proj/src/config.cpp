#include "rsh/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rsh/errors.hpp"

namespace rsh {

namespace {

const std::vector<std::string> kKnownDiagnostics = {"gstats", "hierarchy", "eth", "width",
                                                    "typical"};

std::string trim(std::string s) {
    const auto notspace = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
    s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
    return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad number for " + key + ": '" + value + "'");
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer for " + key + ": '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad seed for " + key + ": '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "on" || value == "true" || value == "1") return true;
    if (value == "off" || value == "false" || value == "0") return false;
    throw ConfigError("config: bad flag for " + key + ": '" + value + "'");
}

}  // namespace

void apply_config_override(ExperimentConfig& cfg, const std::string& key,
                           const std::string& value) {
    ModelSpec& m = cfg.model;
    if (key == "model.preset") {
        if (value == "chaotic")
            apply_chaotic_preset(m);
        else if (value == "integrable")
            apply_integrable_preset(m);
        else
            throw ConfigError("config: unknown preset '" + value + "'");
    } else if (key == "model.n_spins_s") {
        m.n_spins_s = static_cast<Index>(parse_int(key, value));
    } else if (key == "model.n_spins_a") {
        m.n_spins_a = static_cast<Index>(parse_int(key, value));
    } else if (key == "model.n_spins_b") {
        m.n_spins_b = static_cast<Index>(parse_int(key, value));
    } else if (key == "model.epsilon") {
        m.epsilon = parse_double(key, value);
    } else if (key == "model.system_field") {
        m.system_field = parse_double(key, value);
    } else if (key == "model.interaction") {
        m.interaction_terms.clear();
        for (const auto& pair : split(value, ',')) {
            const auto parts = split(pair, ':');
            if (parts.size() != 2)
                throw ConfigError("config: interaction term must be label:label, got '" +
                                  pair + "'");
            m.interaction_terms.emplace_back(parts[0], parts[1]);
        }
    } else if (key == "model.j_xx") {
        m.env_couplings.j_xx = parse_double(key, value);
    } else if (key == "model.j_zz") {
        m.env_couplings.j_zz = parse_double(key, value);
    } else if (key == "model.j2_xx") {
        m.env_couplings.j2_xx = parse_double(key, value);
    } else if (key == "model.j2_zz") {
        m.env_couplings.j2_zz = parse_double(key, value);
    } else if (key == "model.hz") {
        m.env_fields.hz = parse_double(key, value);
    } else if (key == "model.hx") {
        m.env_fields.hx = parse_double(key, value);
    } else if (key == "model.disorder_width") {
        m.disorder_width = parse_double(key, value);
    } else if (key == "model.seed") {
        m.seed = parse_u64(key, value);
    } else if (key == "window.fraction") {
        cfg.window_fraction = parse_double(key, value);
    } else if (key == "window.center_fraction") {
        cfg.window_center_fraction = parse_double(key, value);
    } else if (key == "window.e_lo") {
        cfg.window_e_lo = parse_double(key, value);
    } else if (key == "window.width") {
        cfg.window_width = parse_double(key, value);
    } else if (key == "window.statistical_min") {
        cfg.statistical_min = static_cast<Index>(parse_int(key, value));
    } else if (key == "sweep.epsilons") {
        cfg.epsilon_sweep.clear();
        for (const auto& item : split(value, ','))
            cfg.epsilon_sweep.push_back(parse_double(key, item));
    } else if (key == "sweep.sizes") {
        cfg.size_sweep.clear();
        for (const auto& item : split(value, ','))
            cfg.size_sweep.push_back(static_cast<Index>(parse_int(key, item)));
    } else if (key == "sweep.seeds") {
        cfg.seeds.clear();
        for (const auto& item : split(value, ',')) cfg.seeds.push_back(parse_u64(key, item));
    } else if (key == "run.diagnostics") {
        cfg.diagnostics.clear();
        if (value == "all") {
            cfg.diagnostics = kKnownDiagnostics;
        } else if (value != "none") {
            for (const auto& name : split(value, ',')) {
                if (std::find(kKnownDiagnostics.begin(), kKnownDiagnostics.end(), name) ==
                    kKnownDiagnostics.end())
                    throw ConfigError("config: unknown diagnostic '" + name + "'");
                cfg.diagnostics.push_back(name);
            }
        }
    } else if (key == "run.out_dir") {
        cfg.out_dir = value;
    } else if (key == "run.cache_dir") {
        cfg.cache_dir = value;
    } else if (key == "run.cache") {
        cfg.use_cache = parse_bool(key, value);
    } else if (key == "run.cache_max_dim") {
        cfg.cache_max_dim = static_cast<Index>(parse_int(key, value));
    } else if (key == "run.workers") {
        cfg.workers = static_cast<int>(parse_int(key, value));
    } else if (key == "run.eps_p") {
        cfg.eps_p = parse_double(key, value);
    } else if (key == "run.eth_threshold") {
        cfg.eth_threshold = parse_double(key, value);
    } else if (key == "run.slack") {
        cfg.slack = parse_double(key, value);
    } else if (key == "run.sample_count") {
        cfg.sample_count = static_cast<Index>(parse_int(key, value));
    } else if (key == "run.typical_seeds") {
        cfg.typical_seeds = static_cast<Index>(parse_int(key, value));
    } else if (key == "run.renorm_tol") {
        cfg.renorm_tol = parse_double(key, value);
    } else if (key == "run.renorm_max_iter") {
        cfg.renorm_max_iter = static_cast<int>(parse_int(key, value));
    } else if (key == "run.dim_cap") {
        cfg.dim_cap = static_cast<Index>(parse_int(key, value));
    } else if (key == "run.allow_large") {
        cfg.allow_large = parse_bool(key, value);
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

bool ExperimentConfig::diagnostic_enabled(const std::string& name) const {
    return std::find(diagnostics.begin(), diagnostics.end(), name) != diagnostics.end();
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) +
                              " is not key = value: '" + line + "'");
        apply_config_override(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    validate_config(cfg);
    return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
    validate(cfg.model);
    if (cfg.dim_cap > kDefaultDimCap && !cfg.allow_large)
        throw ConfigError("config: run.dim_cap above " + std::to_string(kDefaultDimCap) +
                          " requires run.allow_large = on");
    if (cfg.window_width == 0.0 && !(cfg.window_fraction > 0.0))
        throw ConfigError("config: window.fraction must be positive");
    if (cfg.window_width < 0.0) throw ConfigError("config: window.width must be non-negative");
    if (!(cfg.eps_p > 0.0 && cfg.eps_p < 1.0))
        throw ConfigError("config: run.eps_p must lie in (0, 1)");
    if (cfg.workers < 0) throw ConfigError("config: run.workers must be >= 0");
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot read " + path.string());
    std::ostringstream buffer;
    buffer << is.rdbuf();
    return parse_config(buffer.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    char buf[64];
    const auto num = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    const ModelSpec& m = cfg.model;
    os << "model.n_spins_s = " << m.n_spins_s << "\n";
    os << "model.n_spins_a = " << m.n_spins_a << "\n";
    os << "model.n_spins_b = " << m.n_spins_b << "\n";
    os << "model.epsilon = " << num(m.epsilon) << "\n";
    os << "model.system_field = " << num(m.system_field) << "\n";
    os << "model.interaction = ";
    for (std::size_t l = 0; l < m.interaction_terms.size(); ++l)
        os << (l ? "," : "") << m.interaction_terms[l].first << ":"
           << m.interaction_terms[l].second;
    os << "\n";
    os << "model.j_xx = " << num(m.env_couplings.j_xx) << "\n";
    os << "model.j_zz = " << num(m.env_couplings.j_zz) << "\n";
    os << "model.j2_xx = " << num(m.env_couplings.j2_xx) << "\n";
    os << "model.j2_zz = " << num(m.env_couplings.j2_zz) << "\n";
    os << "model.hz = " << num(m.env_fields.hz) << "\n";
    os << "model.hx = " << num(m.env_fields.hx) << "\n";
    os << "model.disorder_width = " << num(m.disorder_width) << "\n";
    os << "model.seed = " << m.seed << "\n";
    os << "window.fraction = " << num(cfg.window_fraction) << "\n";
    os << "window.center_fraction = " << num(cfg.window_center_fraction) << "\n";
    os << "window.e_lo = " << num(cfg.window_e_lo) << "\n";
    os << "window.width = " << num(cfg.window_width) << "\n";
    os << "window.statistical_min = " << cfg.statistical_min << "\n";
    if (!cfg.epsilon_sweep.empty()) {
        os << "sweep.epsilons = ";
        for (std::size_t k = 0; k < cfg.epsilon_sweep.size(); ++k)
            os << (k ? "," : "") << num(cfg.epsilon_sweep[k]);
        os << "\n";
    }
    if (!cfg.size_sweep.empty()) {
        os << "sweep.sizes = ";
        for (std::size_t k = 0; k < cfg.size_sweep.size(); ++k)
            os << (k ? "," : "") << cfg.size_sweep[k];
        os << "\n";
    }
    if (!cfg.seeds.empty()) {
        os << "sweep.seeds = ";
        for (std::size_t k = 0; k < cfg.seeds.size(); ++k) os << (k ? "," : "") << cfg.seeds[k];
        os << "\n";
    }
    os << "run.diagnostics = ";
    if (cfg.diagnostics.empty()) {
        os << "none";
    } else {
        for (std::size_t k = 0; k < cfg.diagnostics.size(); ++k)
            os << (k ? "," : "") << cfg.diagnostics[k];
    }
    os << "\n";
    os << "run.out_dir = " << cfg.out_dir << "\n";
    if (!cfg.cache_dir.empty()) os << "run.cache_dir = " << cfg.cache_dir << "\n";
    os << "run.cache = " << (cfg.use_cache ? "on" : "off") << "\n";
    os << "run.cache_max_dim = " << cfg.cache_max_dim << "\n";
    os << "run.workers = " << cfg.workers << "\n";
    os << "run.eps_p = " << num(cfg.eps_p) << "\n";
    os << "run.eth_threshold = " << num(cfg.eth_threshold) << "\n";
    os << "run.slack = " << num(cfg.slack) << "\n";
    os << "run.sample_count = " << cfg.sample_count << "\n";
    os << "run.typical_seeds = " << cfg.typical_seeds << "\n";
    os << "run.renorm_tol = " << num(cfg.renorm_tol) << "\n";
    os << "run.renorm_max_iter = " << cfg.renorm_max_iter << "\n";
    os << "run.dim_cap = " << cfg.dim_cap << "\n";
    os << "run.allow_large = " << (cfg.allow_large ? "on" : "off") << "\n";
    return os.str();
}

}  // namespace rsh
