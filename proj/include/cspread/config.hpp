#pragma once

#include <map>
#include <string>
#include <vector>

#include "cspread/models.hpp"
#include "cspread/pricer.hpp"
#include "cspread/types.hpp"

namespace cspread {

// INI-style config: [section] headers, key = value pairs, '#'/';' comments.
// Later duplicates of a key win.
class Config {
public:
    static Config load(const std::string& path);
    static Config parse(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;

    // one "# section.key = value" line per entry, sorted; meant for CSV headers
    std::vector<std::string> echo_lines() const;

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return sections_;
    }

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

// [model] section readers; both call validate() before returning
JumpDiffusionParams jd_params_from_config(const Config& cfg);
TimeChangeParams tc_params_from_config(const Config& cfg);

// [contract] section; spot levels are taken from the model block
Contract contract_from_config(const Config& cfg, const std::array<double, 2>& s0);

// [scheme] section; every key optional, defaults as in SchemeConfig
SchemeConfig scheme_from_config(const Config& cfg);

} // namespace cspread
