#include "cspread/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cspread {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t cut = line.find_first_of("#;");
        if (cut != std::string::npos) line.erase(cut);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error("config: unterminated section header at line " +
                                         std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw std::runtime_error("config: empty section name at line " +
                                         std::to_string(lineno));
            cfg.sections_[section];
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: expected key = value at line " +
                                     std::to_string(lineno));
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config: empty key at line " + std::to_string(lineno));
        if (section.empty())
            throw std::runtime_error("config: entry before any [section] at line " +
                                     std::to_string(lineno));
        cfg.sections_[section][key] = val;
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

bool Config::has(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s != sections_.end()) {
        auto k = s->second.find(key);
        if (k != s->second.end()) return k->second;
    }
    throw std::runtime_error("config: missing " + section + "." + key);
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    return has(section, key) ? get_string(section, key) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const {
    std::string v = get_string(section, key);
    try {
        std::size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw std::runtime_error("config: bad number for " + section + "." + key + ": " + v);
    }
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = get_string(section, key);
    try {
        std::size_t used = 0;
        int x = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw std::runtime_error("config: bad integer for " + section + "." + key + ": " + v);
    }
}

std::vector<std::string> Config::echo_lines() const {
    std::vector<std::string> out;
    for (const auto& [section, entries] : sections_)
        for (const auto& [key, val] : entries)
            out.push_back("# " + section + "." + key + " = " + val);
    return out;
}

JumpDiffusionParams jd_params_from_config(const Config& cfg) {
    JumpDiffusionParams p;
    p.r = cfg.get_double("model", "r");
    p.sigma1 = cfg.get_double("model", "sigma1");
    p.sigma2 = cfg.get_double("model", "sigma2");
    p.rho_B = cfg.get_double("model", "rho_B");
    p.lambda0 = cfg.get_double("model", "lambda0");
    p.lambda1 = cfg.get_double("model", "lambda1");
    p.lambda2 = cfg.get_double("model", "lambda2");
    p.muJ1 = cfg.get_double("model", "muJ1", 0.0);
    p.muJ2 = cfg.get_double("model", "muJ2", 0.0);
    p.sigJ1 = cfg.get_double("model", "sigJ1");
    p.sigJ2 = cfg.get_double("model", "sigJ2");
    p.mu01 = cfg.get_double("model", "mu01");
    p.mu02 = cfg.get_double("model", "mu02");
    p.sig01 = cfg.get_double("model", "sig01");
    p.sig02 = cfg.get_double("model", "sig02");
    p.rho_J = cfg.get_double("model", "rho_J", 0.0);
    p.s0 = {cfg.get_double("model", "s01"), cfg.get_double("model", "s02")};
    p.validate();
    return p;
}

TimeChangeParams tc_params_from_config(const Config& cfg) {
    TimeChangeParams p;
    p.r = cfg.get_double("model", "r");
    p.alpha0 = cfg.get_double("model", "alpha0");
    p.beta0 = cfg.get_double("model", "beta0");
    p.alpha1 = cfg.get_double("model", "alpha1");
    p.beta1 = cfg.get_double("model", "beta1");
    p.alpha2 = cfg.get_double("model", "alpha2");
    p.beta2 = cfg.get_double("model", "beta2");
    p.d1 = cfg.get_double("model", "d1", 1.0);
    p.d2 = cfg.get_double("model", "d2", 1.0);
    p.mu1 = cfg.get_double("model", "mu1");
    p.mu2 = cfg.get_double("model", "mu2");
    p.sigr1 = cfg.get_double("model", "sigr1");
    p.sigr2 = cfg.get_double("model", "sigr2");
    p.s0 = {cfg.get_double("model", "s01"), cfg.get_double("model", "s02")};
    p.validate();
    return p;
}

Contract contract_from_config(const Config& cfg, const std::array<double, 2>& s0) {
    Contract c;
    c.K = cfg.get_double("contract", "K", c.K);
    c.c = cfg.get_double("contract", "c", c.c);
    c.T = cfg.get_double("contract", "T", c.T);
    c.s0 = s0;
    c.validate();
    return c;
}

SchemeConfig scheme_from_config(const Config& cfg) {
    SchemeConfig sc;
    sc.level = cfg.get_int("scheme", "level", sc.level);
    sc.theta = cfg.get_double("scheme", "theta", sc.theta);
    sc.time_steps = cfg.get_int("scheme", "time_steps", sc.time_steps);
    sc.omega = cfg.get_double("scheme", "omega", sc.omega);
    sc.domain_length = cfg.get_double("scheme", "length", sc.domain_length);
    sc.x_lo = cfg.get_double("scheme", "x_lo", sc.x_lo);
    sc.solver_tol = cfg.get_double("scheme", "solver_tol", sc.solver_tol);
    sc.solver_maxit = cfg.get_int("scheme", "solver_maxit", sc.solver_maxit);
    sc.quad.radius_pi = cfg.get_int("scheme", "quad_radius_pi", sc.quad.radius_pi);
    sc.quad.fft_size = cfg.get_int("scheme", "quad_fft_size", sc.quad.fft_size);
    sc.validate();
    return sc;
}

} // namespace cspread
