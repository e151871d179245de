#include "nfdm/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace nfdm {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

bool parse_double(const std::string& s, double& v) {
    const auto* end = s.data() + s.size();
    const auto r = std::from_chars(s.data(), end, v);
    return r.ec == std::errc() && r.ptr == end;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& source) {
    KeyValueConfig cfg;
    cfg.source_ = source;
    std::stringstream ss(text);
    std::string raw;
    int line = 0;
    while (std::getline(ss, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        const std::string where = source + ":" + std::to_string(line) + ": ";
        if (eq == std::string::npos) throw ValidationError(where + "expected key = value");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty()) throw ValidationError(where + "empty key");
        if (value.empty()) throw ValidationError(where + "empty value for '" + key + "'");
        if (key.find_first_of(" \t") != std::string::npos) throw ValidationError(where + "invalid key '" + key + "'");
        if (cfg.entries_.count(key)) throw ValidationError(where + "duplicate key '" + key + "'");
        cfg.entries_[key] = {value, line};
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

void KeyValueConfig::set(const std::string& key, const std::string& value) { entries_[key] = {value, 0}; }

void KeyValueConfig::fail(const std::string& key, const std::string& what) const {
    const auto it = entries_.find(key);
    const std::string loc = it != entries_.end() && it->second.line > 0
                                ? source_ + ":" + std::to_string(it->second.line) + ": "
                                : source_ + ": ";
    throw ValidationError(loc + "'" + key + "' " + what);
}

const KeyValueConfig::Entry* KeyValueConfig::find(const std::string& key) const {
    used_.insert(key);
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    const auto* e = find(key);
    return e ? e->value : fallback;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    const auto* e = find(key);
    if (!e) return fallback;
    double v = 0.0;
    if (!parse_double(e->value, v)) fail(key, "expects a number, got '" + e->value + "'");
    return v;
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
    const auto* e = find(key);
    if (!e) return fallback;
    int v = 0;
    const auto* end = e->value.data() + e->value.size();
    const auto r = std::from_chars(e->value.data(), end, v);
    if (r.ec != std::errc() || r.ptr != end) fail(key, "expects an integer, got '" + e->value + "'");
    return v;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto* e = find(key);
    if (!e) return fallback;
    std::uint64_t v = 0;
    const auto* end = e->value.data() + e->value.size();
    const auto r = std::from_chars(e->value.data(), end, v);
    if (r.ec != std::errc() || r.ptr != end) fail(key, "expects an unsigned integer, got '" + e->value + "'");
    return v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    const auto* e = find(key);
    if (!e) return fallback;
    std::string v = e->value;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail(key, "expects a boolean, got '" + e->value + "'");
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key, const std::vector<double>& fallback) const {
    const auto* e = find(key);
    if (!e) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(e->value)) {
        double v = 0.0;
        if (!parse_double(item, v)) fail(key, "expects a list of numbers, got '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) fail(key, "is empty");
    return out;
}

std::vector<std::string> KeyValueConfig::get_string_list(const std::string& key,
                                                         const std::vector<std::string>& fallback) const {
    const auto* e = find(key);
    if (!e) return fallback;
    auto out = split_list(e->value);
    if (out.empty()) fail(key, "is empty");
    return out;
}

void KeyValueConfig::reject_unknown() const {
    for (const auto& [key, entry] : entries_)
        if (!used_.count(key)) fail(key, "is not a recognized key");
}

}  // namespace nfdm
