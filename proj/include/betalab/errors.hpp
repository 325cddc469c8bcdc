#ifndef BETALAB_ERRORS_HPP
#define BETALAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace betalab {

/// Parameter outside the regime where the quantity is defined
/// (e.g. speed of coming down from infinity for alpha outside (1,2)).
class regime_error : public std::domain_error {
 public:
  explicit regime_error(const std::string& what) : std::domain_error(what) {}
};

/// Requested a path functional beyond the absorption time; the
/// time-changed process is extinct there.
class absorbed_error : public std::runtime_error {
 public:
  explicit absorbed_error(const std::string& what) : std::runtime_error(what) {}
};

/// The simulated grid ended before the requested quantity was reachable.
class horizon_error : public std::runtime_error {
 public:
  explicit horizon_error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid experiment configuration (bad flags, violated gates).
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace betalab

#endif
