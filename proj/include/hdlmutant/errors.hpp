#pragma once

#include <stdexcept>
#include <string>

namespace hdlmutant {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(int line, int col, std::string expected, std::string found)
      : Error("syntax error at " + std::to_string(line) + ":" +
              std::to_string(col) + ": expected " + expected + ", found '" +
              found + "'"),
        line_(line),
        col_(col),
        expected_(std::move(expected)) {}

  int line() const { return line_; }
  int col() const { return col_; }
  const std::string& expected() const { return expected_; }

 private:
  int line_;
  int col_;
  std::string expected_;
};

/// Recognized Verilog that lies outside the supported subset.
class UnsupportedConstruct : public Error {
 public:
  UnsupportedConstruct(std::string construct, int line = 0)
      : Error("unsupported construct: " + construct +
              (line > 0 ? " (line " + std::to_string(line) + ")" : "")),
        construct_(std::move(construct)) {}
  const std::string& construct() const { return construct_; }

 private:
  std::string construct_;
};

class UndeclaredIdentifier : public Error {
 public:
  UndeclaredIdentifier(std::string name, int line)
      : Error("undeclared identifier '" + name + "' (line " +
              std::to_string(line) + ")"),
        name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// Well-formed syntax that violates a design rule (widths, drivers, ...).
class SemanticError : public Error {
 public:
  using Error::Error;
};

class UnknownNode : public Error {
 public:
  using Error::Error;
};

class NoOutputs : public Error {
 public:
  NoOutputs() : Error("design has no output ports") {}
};

class CombinationalLoop : public Error {
 public:
  explicit CombinationalLoop(long time)
      : Error("combinational loop: no fixpoint at time " +
              std::to_string(time)),
        time_(time) {}
  long time() const { return time_; }

 private:
  long time_;
};

class StepLimitExceeded : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class CoverageMismatch : public Error {
 public:
  using Error::Error;
};

class NotZombie : public Error {
 public:
  using Error::Error;
};

class EmptyCorpus : public Error {
 public:
  EmptyCorpus() : Error("corpus contains no parseable files") {}
};

class EmptyModel : public Error {
 public:
  EmptyModel() : Error("fragment model has no weighted elements") {}
};

class UnseenContext : public Error {
 public:
  explicit UnseenContext(const std::string& prev)
      : Error("element '" + prev + "' never observed as a predecessor") {}
};

class NoViableFragment : public Error {
 public:
  using Error::Error;
};

class SimulationFailed : public Error {
 public:
  SimulationFailed(std::string which, const std::string& cause)
      : Error("simulation of " + which + " failed: " + cause),
        which_(std::move(which)) {}
  const std::string& which() const { return which_; }

 private:
  std::string which_;
};

class ToolNotFound : public Error {
 public:
  using Error::Error;
};

class WorkdirError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ArtifactsMissing : public Error {
 public:
  using Error::Error;
};

}  // namespace hdlmutant
