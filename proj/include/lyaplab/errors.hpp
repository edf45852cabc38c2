#pragma once

#include <stdexcept>
#include <string>

namespace lyaplab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// symbolic dynamics
class ScanCapExceeded : public Error { public: using Error::Error; };
class InadmissibleWrap : public Error { public: using Error::Error; };
class NotRecurrent : public Error { public: using Error::Error; };
class BudgetExceeded : public Error { public: using Error::Error; };
class IncompatibleLaw : public Error { public: using Error::Error; };

// cocycles
class DegenerateSample : public Error { public: using Error::Error; };
class DimensionError : public Error { public: using Error::Error; };

// Lyapunov norms
class IllConditionedSplitting : public Error { public: using Error::Error; };
class NonInvertibleRestriction : public Error { public: using Error::Error; };
class TailNotCertified : public Error { public: using Error::Error; };
class GateViolation : public Error { public: using Error::Error; };

// harness
class NoRecurrenceFound : public Error { public: using Error::Error; };

/// Configuration problem. `where` names the offending field (and line when known).
class ConfigError : public Error {
 public:
  ConfigError(std::string where, const std::string& what);
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

}  // namespace lyaplab
