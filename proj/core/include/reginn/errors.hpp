#pragma once

#include <stdexcept>
#include <string>

namespace reginn {

// Bad scalar/config input: wrong sign, out-of-window exponent, malformed flag.
class ArgumentError : public std::invalid_argument {
 public:
  explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

// Objects wired together inconsistently: vector/basis mismatch, wrong dimensions.
class StructuralError : public std::logic_error {
 public:
  explicit StructuralError(const std::string& what) : std::logic_error(what) {}
};

// Linear algebra breakdown: CG stagnation, indefinite pivot, SVD failure.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// A study cell failed to terminate by the discrepancy principle.
class StudyError : public std::runtime_error {
 public:
  explicit StudyError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace reginn
