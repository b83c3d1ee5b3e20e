#pragma once

#include <stdexcept>
#include <string>

namespace evla {

/// Point or argument outside the domain an operation is defined on.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed configuration text. `line()` is 1-based, 0 when not tied to a line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// A parameter set violates one of its invariants.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownWavelength : public ConfigError {
public:
    explicit UnknownWavelength(int nm)
        : ConfigError("no optical registry entry for wavelength " + std::to_string(nm) +
                      " nm and no explicit coefficients given"),
          nm_(nm) {}
    int wavelength() const noexcept { return nm_; }

private:
    int nm_;
};

/// A square root in the branch factors has a non-positive argument.
class NonPositiveRadicand : public std::runtime_error {
public:
    NonPositiveRadicand(std::string region, std::string family, double radicand)
        : std::runtime_error("non-positive radicand " + std::to_string(radicand) + " for " +
                             family + " factor in region " + region),
          region_(std::move(region)), family_(std::move(family)) {}
    const std::string& region() const noexcept { return region_; }
    const std::string& family() const noexcept { return family_; }

private:
    std::string region_;
    std::string family_;
};

class SingularSystem : public std::runtime_error {
public:
    SingularSystem(std::string family, double condition_estimate)
        : std::runtime_error("singular " + family + " system (condition estimate " +
                             std::to_string(condition_estimate) + ")"),
          family_(std::move(family)), condition_(condition_estimate) {}
    const std::string& family() const noexcept { return family_; }
    double condition_estimate() const noexcept { return condition_; }

private:
    std::string family_;
    double condition_;
};

class DegenerateDenominator : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BracketExhausted : public std::runtime_error {
public:
    BracketExhausted(int found, int wanted)
        : std::runtime_error("eigenvalue bracket exhausted: found " + std::to_string(found) +
                             " of " + std::to_string(wanted) + " roots"),
          found_(found) {}
    int found() const noexcept { return found_; }

private:
    int found_;
};

class RankDeficient : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, long iterations, double residual)
        : std::runtime_error(what + " (iterations " + std::to_string(iterations) +
                             ", relative residual " + std::to_string(residual) + ")"),
          iterations_(iterations), residual_(residual) {}
    long iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    long iterations_;
    double residual_;
};

}  // namespace evla
