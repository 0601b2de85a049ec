#include "treearch/error.hpp"

namespace treearch {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::SelfLoop: return "SelfLoop";
    case ErrorKind::DuplicateEdge: return "DuplicateEdge";
    case ErrorKind::NotATree: return "NotATree";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::NotAPermutation: return "NotAPermutation";
    case ErrorKind::Inconsistent: return "Inconsistent";
    case ErrorKind::InitialNotConnected: return "InitialNotConnected";
    case ErrorKind::InitialNotSubtree: return "InitialNotSubtree";
    case ErrorKind::EmptyBoundary: return "EmptyBoundary";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::DegenerateWeights: return "DegenerateWeights";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

namespace {
std::string format_message(ErrorKind kind, std::string_view module, const std::string& detail) {
  std::string msg(module);
  msg += ": ";
  msg += to_string(kind);
  if (!detail.empty()) {
    msg += ": ";
    msg += detail;
  }
  return msg;
}
}  // namespace

Error::Error(ErrorKind kind, std::string_view module, const std::string& detail)
    : std::runtime_error(format_message(kind, module, detail)), kind_(kind), module_(module) {}

InconsistentHistory::InconsistentHistory(std::size_t position, const std::string& detail)
    : Error(ErrorKind::Inconsistent, "tree_core",
            "position " + std::to_string(position) + (detail.empty() ? "" : ": " + detail)),
      position_(position) {}

}  // namespace treearch
