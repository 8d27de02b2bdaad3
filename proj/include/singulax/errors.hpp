#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace singulax {

/// Base class for all library errors. Each error carries a short
/// machine-parsable code (E_DIM, E_RANK, ...) that the CLI prints as a
/// single-line prefix before exiting nonzero.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& what) : Error("E_DIM", what) {}
};

struct NotSymmetric : Error {
  explicit NotSymmetric(const std::string& what) : Error("E_SYM", what) {}
};

struct NotPsd : Error {
  explicit NotPsd(const std::string& what) : Error("E_PSD", what) {}
};

struct RankDeficient : Error {
  explicit RankDeficient(const std::string& what, int step = -1)
      : Error("E_RANK", what), step(step) {}
  int step;
};

struct InfeasibleData : Error {
  explicit InfeasibleData(const std::string& what) : Error("E_INFEASIBLE", what) {}
};

struct InconsistentStep : Error {
  explicit InconsistentStep(const std::string& what, int step = -1)
      : Error("E_STEP", what), step(step) {}
  int step;
};

struct ZeroDirection : Error {
  explicit ZeroDirection(const std::string& what) : Error("E_DIR", what) {}
};

struct SingularInnovation : Error {
  explicit SingularInnovation(const std::string& what) : Error("E_SINGULAR", what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error("E_CONFIG", what) {}
};

}  // namespace singulax
