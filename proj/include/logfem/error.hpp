#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace logfem {

/// Raised when a linear solve does not reach its contract. Carries the last
/// residual so callers can report it.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual, int iterations = 0)
        : std::runtime_error(what + " (residual " + format(residual) + ")"),
          residual_(residual),
          iterations_(iterations) {}

    [[nodiscard]] double residual() const { return residual_; }
    [[nodiscard]] int iterations() const { return iterations_; }

private:
    static std::string format(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3e", v);
        return buf;
    }

    double residual_;
    int iterations_;
};

}  // namespace logfem
