#ifndef BETALAB_VERSION_HPP
#define BETALAB_VERSION_HPP

namespace betalab {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace betalab

#endif
