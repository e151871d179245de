#pragma once

#include "nfdm/signal.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace nfdm {

// Flat key = value text with dotted section names and # comments.
class KeyValueConfig {
public:
    static KeyValueConfig parse(const std::string& text, const std::string& source = "<config>");
    static KeyValueConfig load(const std::string& path);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    void set(const std::string& key, const std::string& value);

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_double_list(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<std::string> get_string_list(const std::string& key, const std::vector<std::string>& fallback) const;

    // Throws for every key that was never read.
    void reject_unknown() const;

private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    [[noreturn]] void fail(const std::string& key, const std::string& what) const;
    const Entry* find(const std::string& key) const;

    std::map<std::string, Entry> entries_;
    mutable std::set<std::string> used_;
    std::string source_;
};

}  // namespace nfdm
