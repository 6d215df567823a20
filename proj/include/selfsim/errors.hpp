#ifndef SELFSIM_ERRORS_HPP
#define SELFSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace selfsim {

// Bad values handed to a kernel (NaN entries, non-Hermitian input, ...).
struct invalid_input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Argument outside the supported range of a special function.
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// An iterative method stopped before reaching the requested tolerance.
// Carries the best value it had and the error it believes that value has.
struct accuracy_error : std::runtime_error {
    double best_estimate;
    double error_estimate;
    accuracy_error(const std::string& msg, double best, double err)
        : std::runtime_error(msg), best_estimate(best), error_estimate(err) {}
};

// A configuration that cannot produce a meaningful result
// (grid too coarse, truncation too small, divergent retained sum, ...).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Near-singular overlap matrix; carries the offending smallest eigenvalue.
struct conditioning_error : std::runtime_error {
    double smallest_eigenvalue;
    conditioning_error(const std::string& msg, double ev)
        : std::runtime_error(msg), smallest_eigenvalue(ev) {}
};

// Band crossing or phase ambiguity while fixing a Bloch gauge.
struct gauge_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Residue clusters too close to assign ladder membership.
struct ambiguity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Evaluation requested at (or too close to) the fixed point singularity.
struct singularity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Comparison region too small to be meaningful.
struct insufficient_overlap_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace selfsim

#endif
