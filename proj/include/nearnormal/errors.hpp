#pragma once

#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace nearnormal {

/// Base error. Every failure names the stage that raised it and, when one
/// exists, the measured quantity that crossed its threshold.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& message,
        double margin = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(compose(stage, message, margin)),
        stage_(std::move(stage)),
        message_(message),
        margin_(margin) {}

  const std::string& stage() const noexcept { return stage_; }
  const std::string& message() const noexcept { return message_; }
  double margin() const noexcept { return margin_; }

 private:
  static std::string compose(const std::string& stage, const std::string& message, double margin) {
    std::ostringstream os;
    os << "[" << stage << "] " << message;
    if (margin == margin) os << " (measured " << margin << ")";
    return os.str();
  }

  std::string stage_;
  std::string message_;
  double margin_;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Input violates a documented precondition (non-Hermitian, invalid radii, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Matrix too far from normal for a unitary diagonalization.
class NotNormal : public Error {
 public:
  using Error::Error;
};

/// Unreadable, unwritable or malformed files.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Errors that mean "the construction left its small-commutator regime".
/// The CLI maps these to exit code 2; --force downgrades most of them.
class RegimeError : public Error {
 public:
  using Error::Error;
};

class GateViolation : public RegimeError {
 public:
  using RegimeError::RegimeError;
};

/// Singular values of a would-be unitary outside (0, 2).
class NotNearUnitary : public RegimeError {
 public:
  using RegimeError::RegimeError;
};

/// Spectrum of the final real part is not clustered near the integers.
class SpectrumDispersion : public RegimeError {
 public:
  using RegimeError::RegimeError;
};

/// An invertibility margin (sigma_min of a block-diagonal compression) collapsed.
class MarginFailure : public RegimeError {
 public:
  using RegimeError::RegimeError;
};

namespace detail {

template <class E>
[[noreturn]] void rethrow_staged(const E& e, const std::string& label) {
  throw E(label + "/" + e.stage(), e.message(), e.margin());
}

}  // namespace detail

/// Runs f, prefixing the stage of any library error with label (type preserved).
template <class F>
decltype(auto) staged(const std::string& label, F&& f) {
  try {
    return f();
  } catch (const GateViolation& e) {
    detail::rethrow_staged(e, label);
  } catch (const NotNearUnitary& e) {
    detail::rethrow_staged(e, label);
  } catch (const SpectrumDispersion& e) {
    detail::rethrow_staged(e, label);
  } catch (const MarginFailure& e) {
    detail::rethrow_staged(e, label);
  } catch (const RegimeError& e) {
    detail::rethrow_staged(e, label);
  } catch (const NotNormal& e) {
    detail::rethrow_staged(e, label);
  } catch (const PreconditionError& e) {
    detail::rethrow_staged(e, label);
  } catch (const DimensionMismatch& e) {
    detail::rethrow_staged(e, label);
  }
}

}  // namespace nearnormal
