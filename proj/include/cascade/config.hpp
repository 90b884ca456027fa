#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cascade/core.hpp"

namespace cascade {

/// INI-style run configuration: [section] headers, key = value lines, '#' or
/// ';' comments. Values are kept verbatim; typed access names the offending
/// key on failure. Flag overrides replace file values.
class RunConfig {
  public:
    RunConfig() = default;

    static RunConfig parse_file(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw ConfigError("cannot open config '" + path + "'");
        std::ostringstream ss;
        ss << is.rdbuf();
        return parse_string(ss.str(), path);
    }

    static RunConfig parse_string(const std::string& text, const std::string& origin = "<string>") {
        RunConfig cfg;
        std::istringstream is(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const auto hash = line.find_first_of("#;");
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section");
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
            const std::string key = trim(line.substr(0, eq));
            const std::string val = trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            cfg.values_[section + "." + key] = val;
        }
        return cfg;
    }

    void set(const std::string& dotted_key, const std::string& value) {
        values_[dotted_key] = value;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& dflt = "") const {
        auto it = values_.find(key);
        return it == values_.end() ? dflt : it->second;
    }

    std::string require_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
        return it->second;
    }

    double get_double(const std::string& key, double dflt) const {
        auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        return to_double(key, it->second);
    }

    int get_int(const std::string& key, int dflt) const {
        auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        try {
            size_t pos = 0;
            const int v = std::stoi(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigError("config key '" + key + "': not an integer: '" + it->second + "'");
        }
    }

    bool get_bool(const std::string& key, bool dflt) const {
        auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
        if (it->second == "false" || it->second == "0" || it->second == "no") return false;
        throw ConfigError("config key '" + key + "': not a boolean: '" + it->second + "'");
    }

    /// Whitespace- or comma-separated list of doubles.
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& dflt) const {
        auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        std::vector<double> out;
        std::string s = it->second;
        for (char& c : s)
            if (c == ',') c = ' ';
        std::istringstream ss(s);
        std::string tok;
        while (ss >> tok) out.push_back(to_double(key, tok));
        return out;
    }

    /// List of 2D points "x,y x,y ..." (used for curve control points).
    std::vector<Vec2> get_points(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) return {};
        std::vector<Vec2> out;
        std::istringstream ss(it->second);
        std::string tok;
        while (ss >> tok) {
            const auto comma = tok.find(',');
            if (comma == std::string::npos)
                throw ConfigError("config key '" + key + "': expected x,y pairs");
            out.push_back({to_double(key, tok.substr(0, comma)), to_double(key, tok.substr(comma + 1))});
        }
        return out;
    }

    /// Effective configuration echo, deterministic order.
    std::string dump() const {
        std::ostringstream os;
        std::string cur_section;
        for (const auto& [k, v] : values_) {
            const auto dot = k.find('.');
            const std::string sec = k.substr(0, dot);
            if (sec != cur_section) {
                os << '[' << sec << "]\n";
                cur_section = sec;
            }
            os << k.substr(dot + 1) << " = " << v << '\n';
        }
        return os.str();
    }

  private:
    std::map<std::string, std::string> values_;

    static std::string trim(const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return "";
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    }

    static double to_double(const std::string& key, const std::string& s) {
        try {
            size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigError("config key '" + key + "': not a number: '" + s + "'");
        }
    }
};

}  // namespace cascade
