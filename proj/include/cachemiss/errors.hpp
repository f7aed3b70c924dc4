#ifndef CACHEMISS_ERRORS_HPP
#define CACHEMISS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cachemiss {

/* Raised when a computation cannot reach its accuracy target even after
 * escalating to extended precision.  The message names the offending
 * quantity (typically the coefficient index) so callers can report it. */
class PrecisionError : public std::runtime_error {
public:
    explicit PrecisionError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cachemiss

#endif
