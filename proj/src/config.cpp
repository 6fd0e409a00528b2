#include "mmq/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mmq {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str());
}

Config Config::from_text(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": empty key");
        std::string full = section.empty() ? key : section + "." + key;
        if (cfg.values_.count(full))
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": duplicate key '" + full + "'");
        cfg.values_[full] = value;
    }
    return cfg;
}

std::string Config::text(const std::string& key, const std::string& def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
}

double Config::number(const std::string& key, double def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(it->second, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': not a number: '" +
                                    it->second + "'");
    }
    if (pos != it->second.size())
        throw std::invalid_argument("config key '" + key + "': not a number: '" +
                                    it->second + "'");
    return v;
}

double Config::require_number(const std::string& key) const {
    if (!has(key)) throw std::invalid_argument("config key '" + key + "' is required");
    return number(key, 0.0);
}

std::uint64_t Config::integer(const std::string& key, std::uint64_t def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(it->second, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': not a non-negative integer: '" +
                                    it->second + "'");
    }
    if (pos != it->second.size())
        throw std::invalid_argument("config key '" + key + "': not a non-negative integer: '" +
                                    it->second + "'");
    return static_cast<std::uint64_t>(v);
}

std::vector<double> Config::number_list(const std::string& key,
                                        const std::vector<double>& def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    std::vector<double> out;
    std::string item;
    std::istringstream in(it->second);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty())
            throw std::invalid_argument("config key '" + key + "': empty list entry");
        std::size_t pos = 0;
        double v = 0;
        try {
            v = std::stod(item, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("config key '" + key + "': not a number: '" + item + "'");
        }
        if (pos != item.size())
            throw std::invalid_argument("config key '" + key + "': not a number: '" + item + "'");
        out.push_back(v);
    }
    if (out.empty())
        throw std::invalid_argument("config key '" + key + "': empty list");
    return out;
}

void Config::restrict_keys(const std::vector<std::string>& allowed) const {
    for (const auto& [key, value] : values_) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

}  // namespace mmq
