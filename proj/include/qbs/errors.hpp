// errors.hpp — Exception types shared by the qbs modules

#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qbs {

// Precondition violations throw std::invalid_argument; numerical failures
// throw one of the types below.
class ComputationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IntegrationError : public ComputationError {
public:
    IntegrationError(const std::string& what, double time_reached,
                     std::vector<std::complex<double>> state)
        : ComputationError(what), time_reached_(time_reached), state_(std::move(state)) {}

    double time_reached() const noexcept { return time_reached_; }
    const std::vector<std::complex<double>>& state() const noexcept { return state_; }

private:
    double time_reached_;
    std::vector<std::complex<double>> state_;
};

// Fock truncation too small for the requested parameters.
class TruncationError : public ComputationError {
public:
    TruncationError(const std::string& what, int suggested_dim)
        : ComputationError(what), suggested_dim_(suggested_dim) {}
    int suggested_dim() const noexcept { return suggested_dim_; }

private:
    int suggested_dim_;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace qbs
