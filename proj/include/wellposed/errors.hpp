#pragma once

#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>

namespace wellposed {

/// Dimension mismatch, non-finite entries, or an argument outside its domain.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A complex frequency hit (numerically) the spectrum of a generator.
class SpectrumError : public std::runtime_error {
 public:
  SpectrumError(std::complex<double> lambda, const std::string& what)
      : std::runtime_error(describe(lambda, what)), lambda_(lambda) {}

  std::complex<double> lambda() const noexcept { return lambda_; }

 private:
  static std::string describe(std::complex<double> lambda,
                              const std::string& what) {
    std::ostringstream os;
    os.precision(17);
    os << what << " (lambda = " << lambda.real();
    if (lambda.imag() != 0.0) os << (lambda.imag() < 0 ? " - " : " + ") << std::abs(lambda.imag()) << "i";
    os << ")";
    return os.str();
  }

  std::complex<double> lambda_;
};

/// I - D*Gamma (or I - Kbar) is singular, so the feedback loop has no
/// well-defined algebraic closure.
class FeedbackLoopError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The feedback operator fails the grid admissibility test.
class NotAdmissibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotControllableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotObservableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad command line or experiment configuration.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wellposed
