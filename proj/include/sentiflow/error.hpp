#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sentiflow {

enum class ErrorKind {
  Io,
  Format,
  EmptyCorpus,
  Alignment,
  InsufficientData,
  Aggregation,
  Parameter,
  DegenerateSeries,
  SingularDesign,
  Config,
  Dependency,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "io";
    case ErrorKind::Format: return "format";
    case ErrorKind::EmptyCorpus: return "empty-corpus";
    case ErrorKind::Alignment: return "alignment";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::Aggregation: return "aggregation";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::DegenerateSeries: return "degenerate-series";
    case ErrorKind::SingularDesign: return "singular-design";
    case ErrorKind::Config: return "config";
    case ErrorKind::Dependency: return "dependency";
  }
  return "unknown";
}

/// Process exit code for a failure of the given kind: 2 config, 3 data, 4 numerical.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Dependency:
    case ErrorKind::Parameter:
      return 2;
    case ErrorKind::DegenerateSeries:
    case ErrorKind::SingularDesign:
      return 4;
    default:
      return 3;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace sentiflow
