#pragma once

#include <stdexcept>
#include <string>

namespace subgauss {

// Edge-list / measure-section parse failure; carries the 1-based line number.
class parse_error : public std::runtime_error {
public:
  parse_error(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

class resource_limit_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Restricted operator is singular (domain covers a whole component).
class zero_eigenvalue_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Fitted scale exponent beta <= 1.
class regularity_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// No admissible epsilon: F(eps)/eps * d_eps > t for every interval.
// Carries the smallest achievable value of g.
class below_resolution_error : public std::runtime_error {
public:
  below_resolution_error(double min_g, const std::string& what)
      : std::runtime_error(what), min_g_(min_g) {}
  double min_g() const { return min_g_; }

private:
  double min_g_;
};

class numeric_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace subgauss
