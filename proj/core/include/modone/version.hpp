#pragma once

#define MODONE_VERSION "0.1.0"

namespace modone {
inline const char* version() { return MODONE_VERSION; }
}
