#pragma once

#include <stdexcept>
#include <string>

namespace adlab {

// Argument outside the domain of an A/D function or a model precondition.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed campaign configuration or serialized input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// External autopilot broke the line-delimited JSON protocol.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An analysis could not run on the given input (e.g. original run failed).
class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace adlab
