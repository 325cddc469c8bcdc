#ifndef BETALAB_ALPHA_HPP
#define BETALAB_ALPHA_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include "betalab/errors.hpp"

namespace betalab {

/// Stability index of the Beta(2-alpha, alpha) coalescent and of the
/// associated stable branching mechanism.  Valid values lie in (0,2);
/// quantities tied to coming down from infinity additionally need (1,2).
class Alpha {
 public:
  explicit Alpha(double value) : value_(value) {
    if (!(value > 0.0) || !(value < 2.0) || !std::isfinite(value)) {
      throw std::domain_error("Alpha: value must lie in (0,2), got " +
                              std::to_string(value));
    }
  }

  double value() const { return value_; }

  bool in_cdi_regime() const { return value_ > 1.0 && value_ < 2.0; }

  /// Throws unless alpha is in (1,2), the coming-down-from-infinity regime.
  void require_cdi(const char* what) const {
    if (!in_cdi_regime()) {
      throw regime_error(std::string(what) +
                         ": requires alpha in (1,2), got " +
                         std::to_string(value_));
    }
  }

 private:
  double value_;
};

}  // namespace betalab

#endif
