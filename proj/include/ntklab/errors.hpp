#pragma once

#include <stdexcept>
#include <string>

namespace ntklab {

// Training blew up (non-finite loss or weights). Carries the step at which
// it happened so callers can attach the partial trajectory.
class divergence_error : public std::runtime_error {
public:
    divergence_error(long iteration, const std::string& what)
        : std::runtime_error(what), iteration_(iteration) {}
    long iteration() const { return iteration_; }

private:
    long iteration_;
};

// Gram matrix could not be factorized even after jitter escalation.
class degenerate_gram_error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad config file or bad CLI arguments.
class config_error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ntklab
