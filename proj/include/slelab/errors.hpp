#ifndef SLELAB_ERRORS_HPP_
#define SLELAB_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace slelab {

// Domain/precondition violations (bad parameter ranges, poles, orderings).
class domain_error : public std::domain_error {
 public:
  explicit domain_error(const std::string& what) : std::domain_error(what) {}
};

// Numerical failures (series did not converge, etc.).
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace slelab

#endif  // SLELAB_ERRORS_HPP_
