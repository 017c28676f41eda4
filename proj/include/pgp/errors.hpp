#ifndef PGP_ERRORS_HPP
#define PGP_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pgp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structural violation of a pose graph (unknown ids, broken odometry chain, ...).
class GraphError : public Error {
 public:
  using Error::Error;
};

/// Edge inversion/composition/combination could not be carried out.
class EdgeOpError : public Error {
 public:
  using Error::Error;
};

class OptimizerError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace pgp

#endif  // PGP_ERRORS_HPP
