#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace aimdalloc {

/// Invalid configuration. Carries every violation found, not just the first.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations)
        : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& violations) {
        std::string msg = "invalid configuration";
        for (const auto& v : violations) {
            msg += "\n  - ";
            msg += v;
        }
        return msg;
    }

    std::vector<std::string> violations_;
};

/// Numerical failure inside the centralized solver. Carries the iterate at
/// which a non-finite cost or gradient was encountered.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& message, std::vector<double> point)
        : std::runtime_error(message), point_(std::move(point)) {}

    const std::vector<double>& point() const noexcept { return point_; }

private:
    std::vector<double> point_;
};

/// Vector/matrix extent does not match the declared resource or agent count.
class DimensionError : public std::invalid_argument {
public:
    DimensionError(const std::string& context, std::size_t expected, std::size_t actual)
        : std::invalid_argument(context + ": expected extent " + std::to_string(expected) +
                                ", got " + std::to_string(actual)),
          expected_(expected),
          actual_(actual) {}

    std::size_t expected() const noexcept { return expected_; }
    std::size_t actual() const noexcept { return actual_; }

private:
    std::size_t expected_;
    std::size_t actual_;
};

}  // namespace aimdalloc
