#include "glelab/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace glelab {

double ConfigValue::as_double() const {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* i = std::get_if<int64_t>(&v)) return static_cast<double>(*i);
    throw ConfigError("expected a number");
}

int64_t ConfigValue::as_int() const {
    if (const auto* i = std::get_if<int64_t>(&v)) return *i;
    if (const auto* d = std::get_if<double>(&v)) {
        const auto r = static_cast<int64_t>(*d);
        if (static_cast<double>(r) == *d) return r;
    }
    throw ConfigError("expected an integer");
}

bool ConfigValue::as_bool() const {
    if (const auto* b = std::get_if<bool>(&v)) return *b;
    throw ConfigError("expected a boolean");
}

const std::string& ConfigValue::as_string() const {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    throw ConfigError("expected a string");
}

std::vector<double> ConfigValue::as_double_list() const {
    if (const auto* l = std::get_if<std::vector<double>>(&v)) return *l;
    if (const auto* d = std::get_if<double>(&v)) return {*d};
    if (const auto* i = std::get_if<int64_t>(&v)) return {static_cast<double>(*i)};
    throw ConfigError("expected a number array");
}

std::vector<std::string> ConfigValue::as_string_list() const {
    if (const auto* l = std::get_if<std::vector<std::string>>(&v)) return *l;
    if (const auto* s = std::get_if<std::string>(&v)) return {*s};
    throw ConfigError("expected a string array");
}

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// strips a trailing comment that is not inside a quoted string
std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') quoted = !quoted;
        else if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

ConfigValue parse_scalar(const std::string& tok, const std::string& where) {
    if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"')
        return ConfigValue{tok.substr(1, tok.size() - 2)};
    if (tok == "true") return ConfigValue{true};
    if (tok == "false") return ConfigValue{false};
    // integer?
    {
        std::istringstream is(tok);
        int64_t i = 0;
        char c = 0;
        if ((is >> i) && !(is >> c) && tok.find_first_of(".eE") == std::string::npos)
            return ConfigValue{i};
    }
    {
        std::istringstream is(tok);
        double d = 0.0;
        char c = 0;
        if ((is >> d) && !(is >> c)) return ConfigValue{d};
    }
    throw ConfigError(where + ": cannot parse value '" + tok + "'");
}

ConfigValue parse_value(const std::string& raw, const std::string& where) {
    const std::string tok = trim(raw);
    if (tok.empty()) throw ConfigError(where + ": empty value");
    if (tok.front() == '[') {
        if (tok.back() != ']') throw ConfigError(where + ": unterminated array");
        const std::string inner = tok.substr(1, tok.size() - 2);
        std::vector<std::string> parts;
        std::string cur;
        bool quoted = false;
        for (char c : inner) {
            if (c == '"') quoted = !quoted;
            if (c == ',' && !quoted) {
                parts.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!trim(cur).empty() || !parts.empty()) parts.push_back(cur);
        std::vector<double> nums;
        std::vector<std::string> strs;
        bool all_num = true, any = false;
        for (const auto& p : parts) {
            const std::string t = trim(p);
            if (t.empty()) continue;
            any = true;
            const ConfigValue v = parse_scalar(t, where);
            if (std::holds_alternative<std::string>(v.v)) {
                all_num = false;
                strs.push_back(std::get<std::string>(v.v));
            } else {
                nums.push_back(v.as_double());
                strs.push_back(t);
            }
        }
        if (!any) return ConfigValue{std::vector<double>{}};
        if (all_num) return ConfigValue{nums};
        return ConfigValue{strs};
    }
    return parse_scalar(tok, where);
}

}  // namespace

Config Config::parse_string(const std::string& text, const std::string& origin) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::string table;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = origin + ":" + std::to_string(lineno);
        std::string s = trim(strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(where + ": unterminated table header");
            table = trim(s.substr(1, s.size() - 2));
            if (table.empty()) throw ConfigError(where + ": empty table name");
            cfg.tables_[table];
            continue;
        }
        const size_t eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const std::string key = trim(s.substr(0, eq));
        if (key.empty()) throw ConfigError(where + ": empty key");
        cfg.tables_[table][key] = parse_value(s.substr(eq + 1), where);
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

const ConfigValue* Config::find(const std::string& table, const std::string& key) const {
    const auto t = tables_.find(table);
    if (t == tables_.end()) return nullptr;
    const auto k = t->second.find(key);
    if (k == t->second.end()) return nullptr;
    return &k->second;
}

bool Config::has(const std::string& table, const std::string& key) const {
    return find(table, key) != nullptr;
}

double Config::get_double(const std::string& table, const std::string& key, double fallback) const {
    const auto* v = find(table, key);
    return v ? v->as_double() : fallback;
}

int64_t Config::get_int(const std::string& table, const std::string& key, int64_t fallback) const {
    const auto* v = find(table, key);
    return v ? v->as_int() : fallback;
}

bool Config::get_bool(const std::string& table, const std::string& key, bool fallback) const {
    const auto* v = find(table, key);
    return v ? v->as_bool() : fallback;
}

std::string Config::get_string(const std::string& table, const std::string& key,
                               const std::string& fallback) const {
    const auto* v = find(table, key);
    return v ? v->as_string() : fallback;
}

std::vector<double> Config::get_double_list(const std::string& table,
                                            const std::string& key) const {
    const auto* v = find(table, key);
    return v ? v->as_double_list() : std::vector<double>{};
}

std::vector<std::string> Config::get_string_list(const std::string& table,
                                                 const std::string& key) const {
    const auto* v = find(table, key);
    return v ? v->as_string_list() : std::vector<std::string>{};
}

}  // namespace glelab
