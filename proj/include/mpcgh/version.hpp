#pragma once

namespace mpcgh {
inline constexpr const char* kVersion = "0.1.0";
}
