#pragma once

#include <stdexcept>
#include <string>

namespace elsurv {

// Exit-code convention shared with the CLI: 2 usage, 3 data validation,
// 4 numerical failure.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& msg, int exit_code)
      : std::runtime_error(msg), code_(std::move(code)), exit_code_(exit_code) {}
  const std::string& code() const { return code_; }
  int exit_code() const { return exit_code_; }

 private:
  std::string code_;
  int exit_code_;
};

struct UsageError : Error {
  explicit UsageError(const std::string& m) : Error("usage", m, 2) {}
};
struct SchemaError : Error {
  explicit SchemaError(const std::string& m) : Error("schema", m, 3) {}
};
struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error("parse", m, 3) {}
};
struct ValidationError : Error {
  explicit ValidationError(const std::string& m) : Error("validation", m, 3) {}
};
struct HullViolation : Error {
  explicit HullViolation(const std::string& m) : Error("hull_violation", m, 4) {}
};
struct NoConvergence : Error {
  explicit NoConvergence(const std::string& m) : Error("no_convergence", m, 4) {}
};
struct SingularComponent : Error {
  explicit SingularComponent(const std::string& m) : Error("singular_component", m, 4) {}
};
struct SingularGram : Error {
  explicit SingularGram(const std::string& m) : Error("singular_gram", m, 4) {}
};
struct RankDeficient : Error {
  explicit RankDeficient(const std::string& m) : Error("rank_deficient", m, 4) {}
};
struct CertaintyUnit : Error {
  explicit CertaintyUnit(const std::string& m) : Error("certainty_unit", m, 4) {}
};
struct EmptyRespondents : Error {
  explicit EmptyRespondents(const std::string& m) : Error("empty_respondents", m, 4) {}
};
struct UnstableQuantile : Error {
  explicit UnstableQuantile(const std::string& m) : Error("unstable_quantile", m, 4) {}
};
struct DegenerateStatistic : Error {
  explicit DegenerateStatistic(const std::string& m) : Error("degenerate_statistic", m, 4) {}
};

}  // namespace elsurv
