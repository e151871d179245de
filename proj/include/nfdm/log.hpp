#pragma once

#include <string>

namespace nfdm {

void set_verbose(bool on);
bool verbose();

// Writes to stderr when verbose output is enabled.
void warn(const std::string& msg);
void info(const std::string& msg);
// Like warn, but each distinct message is printed once per process.
void warn_once(const std::string& msg);

}  // namespace nfdm
