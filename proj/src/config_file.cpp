#include "levylab/config_file.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace levylab {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value '" + s + "' for " + where);
    }
}

std::uint64_t to_u64(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad integer value '" + s + "' for " + where);
    }
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream iss(s);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

LevyTriplet parse_triplet(const std::map<std::string, std::string>& sec) {
    static const std::vector<std::string> allowed = {
        "drift", "sigma", "atoms", "density", "density_scale",
        "density_lo", "density_hi", "density_panels"};
    require_known_keys(sec, allowed, "[triplet]");
    const double drift = sec.count("drift") ? to_double(sec.at("drift"), "drift") : 0.0;
    const double sigma = sec.count("sigma") ? to_double(sec.at("sigma"), "sigma") : 0.0;

    if (sec.count("atoms")) {
        if (sec.count("density"))
            throw ConfigError("[triplet] takes either atoms or a density, not both");
        std::vector<JumpAtom> atoms;
        for (const auto& tok : split_ws(sec.at("atoms"))) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos)
                throw ConfigError("atoms entries must be position:intensity, got '" + tok +
                                  "'");
            atoms.push_back(JumpAtom{to_double(tok.substr(0, colon), "atom position"),
                                     to_double(tok.substr(colon + 1), "atom intensity")});
        }
        try {
            return LevyTriplet(drift, sigma, JumpMeasure::from_atoms(std::move(atoms)));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("invalid triplet: ") + e.what());
        }
    }
    if (sec.count("density")) {
        const std::string kind = sec.at("density");
        if (kind != "uniform")
            throw ConfigError("unsupported density kind '" + kind + "' (only: uniform)");
        const double scale =
            sec.count("density_scale") ? to_double(sec.at("density_scale"), "density_scale")
                                       : 1.0;
        if (!sec.count("density_lo") || !sec.count("density_hi"))
            throw ConfigError("density needs density_lo and density_hi");
        const double lo = to_double(sec.at("density_lo"), "density_lo");
        const double hi = to_double(sec.at("density_hi"), "density_hi");
        const int panels = sec.count("density_panels")
                               ? static_cast<int>(to_u64(sec.at("density_panels"),
                                                         "density_panels"))
                               : 32;
        const double c = scale / (hi - lo);
        try {
            return LevyTriplet(drift, sigma,
                               JumpMeasure::from_density([c](double) { return c; }, lo, hi,
                                                         panels));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("invalid triplet: ") + e.what());
        }
    }
    throw ConfigError("[triplet] needs atoms or a density");
}

}  // namespace

ConfigFile ConfigFile::parse_string(const std::string& text) {
    ConfigFile cfg;
    std::string section;
    std::istringstream iss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(iss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
            cfg.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        auto& target = section.empty() ? cfg.top : cfg.sections[section];
        if (target.count(key))
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key +
                              "'");
        target[key] = value;
    }
    return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

ExperimentConfig load_experiment_config(const ConfigFile& file) {
    static const std::vector<std::string> allowed_top = {"experiment", "seed",    "reps",
                                                         "horizon",    "gate",    "threads"};
    require_known_keys(file.top, allowed_top, "top level");
    for (const auto& [name, _] : file.sections)
        if (name != "triplet" && name != "params")
            throw ConfigError("unknown section [" + name + "]");

    ExperimentConfig cfg;
    if (!file.top.count("experiment")) throw ConfigError("missing key: experiment");
    if (!file.top.count("seed")) throw ConfigError("missing key: seed");
    if (!file.top.count("reps")) throw ConfigError("missing key: reps");
    cfg.experiment = file.top.at("experiment");
    cfg.seed = to_u64(file.top.at("seed"), "seed");
    cfg.reps = to_u64(file.top.at("reps"), "reps");
    if (cfg.reps < 2) throw ConfigError("reps must be >= 2");
    if (file.top.count("horizon")) cfg.horizon = to_double(file.top.at("horizon"), "horizon");
    if (!(cfg.horizon > 0.0)) throw ConfigError("horizon must be > 0");
    if (file.top.count("gate")) cfg.gate = to_double(file.top.at("gate"), "gate");
    if (!(cfg.gate > 0.0)) throw ConfigError("gate must be > 0");
    if (file.top.count("threads"))
        cfg.threads = static_cast<int>(to_u64(file.top.at("threads"), "threads"));

    if (!file.sections.count("triplet")) throw ConfigError("missing [triplet] section");
    cfg.triplet = parse_triplet(file.sections.at("triplet"));
    if (file.sections.count("params")) cfg.params = file.sections.at("params");
    return cfg;
}

ExperimentConfig load_experiment_config_path(const std::string& path) {
    return load_experiment_config(ConfigFile::parse_file(path));
}

double param_double(const std::map<std::string, std::string>& params,
                    const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : to_double(it->second, key);
}

int param_int(const std::map<std::string, std::string>& params, const std::string& key,
              int fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : static_cast<int>(to_u64(it->second, key));
}

std::vector<double> param_double_list(const std::map<std::string, std::string>& params,
                                      const std::string& key,
                                      const std::string& fallback) {
    auto it = params.find(key);
    const std::string raw = it == params.end() ? fallback : it->second;
    std::vector<double> out;
    for (const auto& tok : split_ws(raw)) out.push_back(to_double(tok, key));
    if (out.empty()) throw ConfigError("empty list for " + key);
    return out;
}

std::string param_string(const std::map<std::string, std::string>& params,
                         const std::string& key, const std::string& fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void require_known_keys(const std::map<std::string, std::string>& params,
                        const std::vector<std::string>& allowed,
                        const std::string& where) {
    for (const auto& [key, _] : params)
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("unknown key '" + key + "' in " + where);
}

}  // namespace levylab
