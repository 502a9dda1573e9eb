// errors.hpp: exception types shared by every module.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lmem {

/// Bad argument or configuration value (maps to CLI exit code 1).
class InvalidParameter : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Base for failures of the numerics themselves (CLI exit code 2).
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class NumericalInstability : public NumericalError {
  public:
    NumericalInstability(const std::string& what, double dt) : NumericalError(what), dt_(dt) {}
    double dt() const noexcept { return dt_; }

  private:
    double dt_;
};

/// The universal retrieval mode still holds too much excitation at the end of its clock range.
class TailTooLarge : public NumericalError {
  public:
    TailTooLarge(const std::string& what, double tail) : NumericalError(what), tail_(tail) {}
    double tail() const noexcept { return tail_; }

  private:
    double tail_;
};

class InfeasibleTarget : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class ConvergenceFailure : public NumericalError {
  public:
    ConvergenceFailure(const std::string& what, std::vector<double> history)
        : NumericalError(what), history_(std::move(history)) {}
    const std::vector<double>& history() const noexcept { return history_; }

  private:
    std::vector<double> history_;
};

} // namespace lmem
