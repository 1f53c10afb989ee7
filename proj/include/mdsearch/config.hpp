#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace mdsearch {

// Minimal INI config: [section] headers, key = value lines, full-line # or ;
// comments, later duplicates win. Keys are stored flattened as "section.key";
// parse -> serialize -> parse is the identity on that map. Parse errors carry
// "<name>:<line>:" context.
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text,
                                   const std::string& name = "<config>");

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    void set(const std::string& key, const std::string& value);
    std::string serialize() const;
    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::string name_ = "<config>";
    std::map<std::string, std::string> entries_;
};

}  // namespace mdsearch
