#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace clvkit {

/// Argument outside the mathematical domain of a function (x <= 0 for ln_gamma, a == 1, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Caller-supplied data violates a precondition (ordering, empty tables, bad windows).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed (non-finite evaluations, series that did not converge).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input that cannot be recovered row by row.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DuplicateIdError : public FormatError {
public:
    explicit DuplicateIdError(std::string id)
        : FormatError("duplicate transaction_id '" + id + "'"), id_(std::move(id)) {}

    [[nodiscard]] const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

/// Maximum-likelihood fit failure. Carries the best parameters found (natural scale).
class FitError : public std::runtime_error {
public:
    FitError(const std::string& what, std::vector<double> best_parameters)
        : std::runtime_error(what), best_(std::move(best_parameters)) {}

    [[nodiscard]] const std::vector<double>& best_parameters() const noexcept { return best_; }

private:
    std::vector<double> best_;
};

/// Receives non-fatal diagnostics. An empty handler discards them.
using WarningHandler = std::function<void(const std::string&)>;

inline void warn(const WarningHandler& handler, const std::string& message) {
    if (handler) handler(message);
}

} // namespace clvkit
