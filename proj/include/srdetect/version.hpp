#ifndef SRDETECT_VERSION_HPP
#define SRDETECT_VERSION_HPP

namespace srd {
inline constexpr const char* kVersion = "0.1.0";
}

#endif
