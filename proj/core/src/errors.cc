#include "spvs/errors.h"

#include <atomic>
#include <iostream>

namespace spvs {
namespace {
std::atomic<bool> g_warnings_enabled{true};
}

void Warn(const std::string& message) {
  if (g_warnings_enabled.load()) std::cerr << "warning: " << message << '\n';
}

void SetWarningsEnabled(bool enabled) { g_warnings_enabled.store(enabled); }

}  // namespace spvs
