#include "nfdm/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>
#include <set>

namespace nfdm {
namespace {
std::atomic<bool> g_verbose{false};
std::mutex g_mutex;
std::set<std::string> g_seen;
}  // namespace

void set_verbose(bool on) { g_verbose = on; }
bool verbose() { return g_verbose; }

void warn(const std::string& msg) {
    if (!g_verbose) return;
    std::lock_guard lock(g_mutex);
    std::cerr << "warning: " << msg << '\n';
}

void warn_once(const std::string& msg) {
    if (!g_verbose) return;
    std::lock_guard lock(g_mutex);
    if (!g_seen.insert(msg).second) return;
    std::cerr << "warning: " << msg << '\n';
}

void info(const std::string& msg) {
    if (!g_verbose) return;
    std::lock_guard lock(g_mutex);
    std::cerr << msg << '\n';
}

}  // namespace nfdm
