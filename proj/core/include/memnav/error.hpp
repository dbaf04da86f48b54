#pragma once

#include <stdexcept>
#include <string>

namespace memnav {

// Input file could not be parsed (malformed JSON, bad grid characters, ...).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Input parsed fine but violates a documented invariant (pmf does not sum
// to one, edge endpoint missing, ...). The message names the invariant.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A caller (usually a controller) broke an execution contract: traversing a
// blocked edge, claiming success away from the goal, claiming the goal is
// unreachable when it is not.
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

// A controller failed to halt within the step budget.
class RunawayPolicyError : public std::runtime_error {
 public:
  explicit RunawayPolicyError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace memnav
