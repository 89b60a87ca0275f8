#pragma once

// Minimal configuration format: key = value pairs grouped under [table]
// headers. Values are numbers, booleans, quoted strings, or flat arrays of
// numbers/strings. See docs/config.md for the grammar and the recognized
// keys per experiment.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace glelab {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigValue {
    std::variant<double, int64_t, bool, std::string, std::vector<double>,
                 std::vector<std::string>>
        v;

    double as_double() const;
    int64_t as_int() const;
    bool as_bool() const;
    const std::string& as_string() const;
    std::vector<double> as_double_list() const;
    std::vector<std::string> as_string_list() const;
};

class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text, const std::string& origin = "<config>");

    bool has(const std::string& table, const std::string& key) const;

    double get_double(const std::string& table, const std::string& key, double fallback) const;
    int64_t get_int(const std::string& table, const std::string& key, int64_t fallback) const;
    bool get_bool(const std::string& table, const std::string& key, bool fallback) const;
    std::string get_string(const std::string& table, const std::string& key,
                           const std::string& fallback) const;
    std::vector<double> get_double_list(const std::string& table, const std::string& key) const;
    std::vector<std::string> get_string_list(const std::string& table,
                                             const std::string& key) const;

    bool empty() const { return tables_.empty(); }

private:
    const ConfigValue* find(const std::string& table, const std::string& key) const;
    std::map<std::string, std::map<std::string, ConfigValue>> tables_;
};

}  // namespace glelab
