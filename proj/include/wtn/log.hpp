#pragma once

#include <spdlog/spdlog.h>

namespace wtn {

/// Library logger; writes to standard error.
spdlog::logger& logger();

}  // namespace wtn
