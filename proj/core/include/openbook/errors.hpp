#pragma once

#include <stdexcept>
#include <string>

namespace openbook {

/// Base class for all recoverable solver errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by sigma() when A + izC is singular, i.e. the caller claimed the
/// maximal-rank / self-adjointness hypotheses but they do not hold.
class LemmaHypothesesViolated : public Error {
 public:
  using Error::Error;
};

/// Thrown during trace elimination when the k x k trace-coefficient block of a
/// binding node is numerically singular.  Never regularized silently: the
/// ellipticity condition constrains A - lambda*C for lambda > 0, which says
/// nothing about A + mu*C with mu = 3/(2h) > 0.
class SingularTraceBlock : public Error {
 public:
  SingularTraceBlock(const std::string& binding_id, double h)
      : Error("singular trace block at binding '" + binding_id +
              "': A + (3/(2h))*C is not invertible at h = " +
              std::to_string(h) + "; try a different resolution"),
        binding(binding_id),
        resolution(h) {}
  std::string binding;
  double resolution;
};

/// Thrown when the shift-invert factorization fails because the shift hits an
/// eigenvalue.  Carries a perturbed shift the caller may retry with.
class ShiftCollision : public Error {
 public:
  ShiftCollision(double shift, double suggested)
      : Error("shift collision: factorization of K - shift*M failed at shift = " +
              std::to_string(shift) + "; retry with shift = " +
              std::to_string(suggested)),
        failed_shift(shift),
        suggested_shift(suggested) {}
  double failed_shift;
  double suggested_shift;
};

}  // namespace openbook
