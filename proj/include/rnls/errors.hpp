#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rnls {

// Base class for all library errors. Specific types exist so callers can
// distinguish recoverable conditions (MeshTangled, QuadratureUnderresolved)
// from fatal ones.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct MeshDegenerate : Error {
  explicit MeshDegenerate(const std::string& msg) : Error("mesh degenerate: " + msg) {}
};

struct NonFiniteField : Error {
  explicit NonFiniteField(const std::string& msg) : Error("non-finite field: " + msg) {}
};

struct ShootingBracketFailure : Error {
  explicit ShootingBracketFailure(const std::string& msg) : Error("shooting bracket failure: " + msg) {}
};

struct NonConvergence : Error {
  explicit NonConvergence(const std::string& msg) : Error("no convergence: " + msg) {}
};

struct ExponentMismatch : Error {
  explicit ExponentMismatch(const std::string& msg) : Error("exponent mismatch: " + msg) {}
};

struct MappedTimeOutOfDomain : Error {
  explicit MappedTimeOutOfDomain(const std::string& msg) : Error("mapped time out of domain: " + msg) {}
};

struct TimeOutOfRange : Error {
  explicit TimeOutOfRange(const std::string& msg) : Error("time out of range: " + msg) {}
};

struct SingularTime : Error {
  explicit SingularTime(const std::string& msg) : Error("singular time: " + msg) {}
};

struct QuadratureUnderresolved : Error {
  explicit QuadratureUnderresolved(const std::string& msg) : Error("quadrature underresolved: " + msg) {}
};

struct ZeroField : Error {
  explicit ZeroField(const std::string& msg) : Error("zero field: " + msg) {}
};

struct MeshTangled : Error {
  explicit MeshTangled(const std::string& msg) : Error("mesh tangled: " + msg) {}
};

struct RunDidNotBlowUp : Error {
  explicit RunDidNotBlowUp(const std::string& msg) : Error("run did not blow up: " + msg) {}
};

struct InsufficientDecades : Error {
  explicit InsufficientDecades(const std::string& msg) : Error("insufficient decades: " + msg) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& msg) : Error("domain error: " + msg) {}
};

struct WindowTooShort : Error {
  explicit WindowTooShort(const std::string& msg) : Error("window too short: " + msg) {}
};

struct SchemaError : Error {
  std::vector<std::string> issues;
  explicit SchemaError(std::vector<std::string> errs)
      : Error(join(errs)), issues(std::move(errs)) {}
 private:
  static std::string join(const std::vector<std::string>& errs) {
    std::string out = "config schema error:";
    for (const auto& e : errs) out += "\n  " + e;
    return out;
  }
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error("io error: " + msg) {}
};

}  // namespace rnls
