#pragma once

// JSON serialization of run traces and certificates.

#include "corectron/diagnostics.hpp"

#include <string>

namespace corectron::diag {

std::string encode_trace(const Trace& trace);
Trace decode_trace(const std::string& text);

void save_trace(const Trace& trace, const std::string& path);
Trace load_trace(const std::string& path);

}  // namespace corectron::diag
