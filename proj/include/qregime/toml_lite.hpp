#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace qregime {

// Minimal TOML reader covering what experiment configs use: [table]
// headers, bare keys, strings, integers, floats, booleans, flat arrays and
// '#' comments. Entries are stored flat under "table.key".
struct TomlValue {
    enum class Kind { String, Integer, Float, Boolean, Array };
    Kind kind = Kind::String;
    std::string str;
    std::int64_t integer = 0;
    double number = 0.0;
    bool boolean = false;
    std::vector<TomlValue> array;
};

class TomlTable {
public:
    static TomlTable parse(const std::string& text);
    static TomlTable parse_file(const std::string& path);

    bool contains(const std::string& key) const { return entries_.count(key) > 0; }

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::int64_t> get_int_array(const std::string& key) const;
    std::vector<double> get_double_array(const std::string& key) const;

    const std::map<std::string, TomlValue>& entries() const { return entries_; }

private:
    std::map<std::string, TomlValue> entries_;
    const TomlValue& require(const std::string& key) const;
};

} // namespace qregime
