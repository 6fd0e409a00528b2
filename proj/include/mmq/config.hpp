#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mmq {

// Line-oriented "key = value" configuration with [section] headers; keys are
// addressed as "section.key".  '#' starts a comment, blank lines are ignored.
// Lookups record which keys were consulted so unknown keys can be rejected.
class Config {
public:
    static Config from_file(const std::string& path);
    static Config from_text(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string text(const std::string& key, const std::string& def) const;
    double number(const std::string& key, double def) const;
    double require_number(const std::string& key) const;
    std::uint64_t integer(const std::string& key, std::uint64_t def) const;
    std::vector<double> number_list(const std::string& key,
                                    const std::vector<double>& def) const;

    // Throws invalid_argument naming the first key outside `allowed`.
    void restrict_keys(const std::vector<std::string>& allowed) const;

    // Used by CLI overrides (--seed, --out).
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace mmq
