#include "mdsearch/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mdsearch/errors.hpp"

namespace mdsearch {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& name, int line, const std::string& msg) {
    throw ConfigError(name + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& name) {
    ConfigFile cfg;
    cfg.name_ = name;
    std::istringstream in(text);
    std::string raw, section;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(name, lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) fail(name, lineno, "empty section name");
            if (section.find('.') != std::string::npos)
                fail(name, lineno, "section name must not contain '.'");
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos) fail(name, lineno, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) fail(name, lineno, "empty key");
        if (section.empty()) fail(name, lineno, "key outside any [section]");
        cfg.entries_[section + "." + key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

std::string ConfigFile::get(const std::string& key, const std::string& fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const char* s = it->second.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0')
        throw ConfigError(name_ + ": " + key + ": not a number: '" + it->second + "'");
    return v;
}

long long ConfigFile::get_int(const std::string& key, long long fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const char* s = it->second.c_str();
    char* end = nullptr;
    const long long v = std::strtoll(s, &end, 10);
    if (end == s || *end != '\0')
        throw ConfigError(name_ + ": " + key + ": not an integer: '" + it->second + "'");
    return v;
}

std::uint64_t ConfigFile::get_uint64(const std::string& key, std::uint64_t fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const char* s = it->second.c_str();
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0' || it->second[0] == '-')
        throw ConfigError(name_ + ": " + key + ": not an unsigned integer: '" + it->second +
                          "'");
    return v;
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(name_ + ": " + key + ": not a boolean: '" + v + "'");
}

void ConfigFile::set(const std::string& key, const std::string& value) {
    if (key.find('.') == std::string::npos)
        throw ConfigError("config keys must be section-qualified: " + key);
    entries_[key] = value;
}

std::string ConfigFile::serialize() const {
    std::ostringstream out;
    std::string section;
    for (const auto& [key, value] : entries_) {
        const size_t dot = key.find('.');
        const std::string sec = key.substr(0, dot);
        if (sec != section) {
            if (!section.empty()) out << "\n";
            out << "[" << sec << "]\n";
            section = sec;
        }
        out << key.substr(dot + 1) << " = " << value << "\n";
    }
    return out.str();
}

}  // namespace mdsearch
