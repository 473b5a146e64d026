#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace spme {

/// Invalid physical or configuration parameter (m <= 1, nonpositive mass, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Operation evaluated outside its mathematical domain (t <= 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A diagnostic was asked about data that does not satisfy its hypotheses.
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// The scheme produced a non-finite value; carries the step that blew up.
class NumericalBlowupError : public std::runtime_error {
public:
    NumericalBlowupError(const std::string& what, std::size_t step)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"),
          step_(step) {}
    std::size_t step_index() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Time stepping stopped making progress (dt underflowed against t).
class StagnationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Travelling-wave species must share one orientation.
class MixedOrientationError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

/// A run was configured in a way the harness cannot honour
/// (front leaves the domain, study without an exact solution, ...).
class ConfigurationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scenario file rejected; all violations are collected before throwing.
class ScenarioError : public std::runtime_error {
public:
    explicit ScenarioError(std::vector<std::string> issues)
        : std::runtime_error(join(issues)), issues_(std::move(issues)) {}
    const std::vector<std::string>& issues() const noexcept { return issues_; }

private:
    static std::string join(const std::vector<std::string>& issues) {
        std::string all = "scenario rejected:";
        for (const auto& s : issues) {
            all += "\n  - ";
            all += s;
        }
        return all;
    }
    std::vector<std::string> issues_;
};

}  // namespace spme
