#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mrf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Assembly text could not be parsed. line/column are 1-based.
class AssemblyError : public Error {
 public:
  AssemblyError(std::size_t line, std::size_t column, const std::string& msg)
      : Error("line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// A structurally parsed TestCase breaks an invariant.
class ValidationError : public Error {
 public:
  static constexpr std::size_t kNoLocation = static_cast<std::size_t>(-1);

  explicit ValidationError(const std::string& msg) : Error(msg) {}
  ValidationError(std::size_t block, std::size_t index, const std::string& msg)
      : Error(msg), block_(block), index_(index) {}
  std::size_t block() const { return block_; }
  std::size_t index() const { return index_; }

 private:
  std::size_t block_ = kNoLocation;
  std::size_t index_ = kNoLocation;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// The interpreter hit an instruction it cannot execute.
class ExecutionFault : public Error {
 public:
  ExecutionFault(std::size_t pc, const std::string& msg)
      : Error("instruction " + std::to_string(pc) + ": " + msg), pc_(pc) {}
  std::size_t pc() const { return pc_; }

 private:
  std::size_t pc_;
};

class SpeculationDepthError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace mrf
