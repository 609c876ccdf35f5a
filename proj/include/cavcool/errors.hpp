#pragma once

#include <stdexcept>
#include <string>

namespace cavcool {

// Thrown when a scattering denominator f(x) vanishes within tolerance.
// `denominator` names which one ("f(0)", "f(+nu)", "f(-nu)") or, for
// delta_opt, the singular detuning condition.
class singular_point_error : public std::runtime_error {
public:
    singular_point_error(const std::string& denominator, const std::string& msg)
        : std::runtime_error(msg), denominator_(denominator) {}
    const std::string& denominator() const noexcept { return denominator_; }

private:
    std::string denominator_;
};

class no_steady_state_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class degenerate_steady_state_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class truncation_leak_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class unreachable_target_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class fit_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ambiguous_match_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Linear-algebra/integration failures (residuals, step-size collapse, ...).
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cavcool
