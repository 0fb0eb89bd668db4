#include "qregime/toml_lite.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "qregime/env.hpp" // ConfigError

namespace qregime {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Drops a trailing comment, respecting quoted strings.
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
        if (c == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

std::string parse_string_literal(const std::string& raw, int line_no) {
    if (raw.size() < 2 || raw.back() != '"')
        throw ConfigError("toml line " + std::to_string(line_no) + ": unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
        char c = raw[i];
        if (c == '\\' && i + 2 < raw.size()) {
            char n = raw[++i];
            switch (n) {
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                default:
                    throw ConfigError("toml line " + std::to_string(line_no) +
                                      ": unsupported escape \\" + std::string(1, n));
            }
        } else {
            out.push_back(c);
        }
    }
    return out;
}

TomlValue parse_value(const std::string& raw, int line_no);

std::vector<TomlValue> parse_array(const std::string& raw, int line_no) {
    std::vector<TomlValue> out;
    std::string inner = trim(raw.substr(1, raw.size() - 2));
    if (inner.empty()) return out;
    int depth = 0;
    bool in_string = false;
    std::string cur;
    for (std::size_t i = 0; i < inner.size(); ++i) {
        char c = inner[i];
        if (c == '"' && (i == 0 || inner[i - 1] != '\\')) in_string = !in_string;
        if (!in_string) {
            if (c == '[') ++depth;
            if (c == ']') --depth;
            if (c == ',' && depth == 0) {
                out.push_back(parse_value(trim(cur), line_no));
                cur.clear();
                continue;
            }
        }
        cur.push_back(c);
    }
    if (!trim(cur).empty()) out.push_back(parse_value(trim(cur), line_no));
    return out;
}

TomlValue parse_value(const std::string& raw, int line_no) {
    TomlValue v;
    if (raw.empty()) throw ConfigError("toml line " + std::to_string(line_no) + ": empty value");
    if (raw.front() == '"') {
        v.kind = TomlValue::Kind::String;
        v.str = parse_string_literal(raw, line_no);
        return v;
    }
    if (raw.front() == '[') {
        if (raw.back() != ']')
            throw ConfigError("toml line " + std::to_string(line_no) + ": unterminated array");
        v.kind = TomlValue::Kind::Array;
        v.array = parse_array(raw, line_no);
        return v;
    }
    if (raw == "true" || raw == "false") {
        v.kind = TomlValue::Kind::Boolean;
        v.boolean = raw == "true";
        return v;
    }
    // integer first, float as the fallback
    {
        std::int64_t i = 0;
        auto res = std::from_chars(raw.data(), raw.data() + raw.size(), i);
        if (res.ec == std::errc{} && res.ptr == raw.data() + raw.size()) {
            v.kind = TomlValue::Kind::Integer;
            v.integer = i;
            v.number = static_cast<double>(i);
            return v;
        }
    }
    {
        double d = 0.0;
        auto res = std::from_chars(raw.data(), raw.data() + raw.size(), d);
        if (res.ec == std::errc{} && res.ptr == raw.data() + raw.size()) {
            v.kind = TomlValue::Kind::Float;
            v.number = d;
            return v;
        }
    }
    throw ConfigError("toml line " + std::to_string(line_no) + ": cannot parse value '" + raw +
                      "'");
}

} // namespace

TomlTable TomlTable::parse(const std::string& text) {
    TomlTable t;
    std::istringstream in(text);
    std::string line, table;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("toml line " + std::to_string(line_no) +
                                  ": malformed table header");
            table = trim(line.substr(1, line.size() - 2));
            if (table.empty())
                throw ConfigError("toml line " + std::to_string(line_no) + ": empty table name");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("toml line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("toml line " + std::to_string(line_no) + ": empty key");
        std::string full = table.empty() ? key : table + "." + key;
        if (t.entries_.count(full))
            throw ConfigError("toml line " + std::to_string(line_no) + ": duplicate key '" +
                              full + "'");
        t.entries_.emplace(full, parse_value(value, line_no));
    }
    return t;
}

TomlTable TomlTable::parse_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open config file " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

const TomlValue& TomlTable::require(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("config is missing required key '" + key + "'");
    return it->second;
}

std::string TomlTable::get_string(const std::string& key) const {
    const TomlValue& v = require(key);
    if (v.kind != TomlValue::Kind::String)
        throw ConfigError("config key '" + key + "' must be a string");
    return v.str;
}

std::string TomlTable::get_string(const std::string& key, const std::string& fallback) const {
    return contains(key) ? get_string(key) : fallback;
}

std::int64_t TomlTable::get_int(const std::string& key) const {
    const TomlValue& v = require(key);
    if (v.kind != TomlValue::Kind::Integer)
        throw ConfigError("config key '" + key + "' must be an integer");
    return v.integer;
}

std::int64_t TomlTable::get_int(const std::string& key, std::int64_t fallback) const {
    return contains(key) ? get_int(key) : fallback;
}

std::uint64_t TomlTable::get_u64(const std::string& key, std::uint64_t fallback) const {
    if (!contains(key)) return fallback;
    std::int64_t v = get_int(key);
    if (v < 0) throw ConfigError("config key '" + key + "' must be non-negative");
    return static_cast<std::uint64_t>(v);
}

double TomlTable::get_double(const std::string& key) const {
    const TomlValue& v = require(key);
    if (v.kind != TomlValue::Kind::Float && v.kind != TomlValue::Kind::Integer)
        throw ConfigError("config key '" + key + "' must be a number");
    return v.number;
}

double TomlTable::get_double(const std::string& key, double fallback) const {
    return contains(key) ? get_double(key) : fallback;
}

bool TomlTable::get_bool(const std::string& key, bool fallback) const {
    if (!contains(key)) return fallback;
    const TomlValue& v = require(key);
    if (v.kind != TomlValue::Kind::Boolean)
        throw ConfigError("config key '" + key + "' must be a boolean");
    return v.boolean;
}

std::vector<std::int64_t> TomlTable::get_int_array(const std::string& key) const {
    const TomlValue& v = require(key);
    if (v.kind != TomlValue::Kind::Array)
        throw ConfigError("config key '" + key + "' must be an array");
    std::vector<std::int64_t> out;
    for (const auto& e : v.array) {
        if (e.kind != TomlValue::Kind::Integer)
            throw ConfigError("config key '" + key + "' must hold integers");
        out.push_back(e.integer);
    }
    return out;
}

std::vector<double> TomlTable::get_double_array(const std::string& key) const {
    const TomlValue& v = require(key);
    if (v.kind != TomlValue::Kind::Array)
        throw ConfigError("config key '" + key + "' must be an array");
    std::vector<double> out;
    for (const auto& e : v.array) {
        if (e.kind != TomlValue::Kind::Float && e.kind != TomlValue::Kind::Integer)
            throw ConfigError("config key '" + key + "' must hold numbers");
        out.push_back(e.number);
    }
    return out;
}

} // namespace qregime
