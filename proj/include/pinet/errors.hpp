#pragma once

#include <stdexcept>
#include <string>

namespace pinet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PINET_DEFINE_ERROR(Name)         \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  };

// netcore
PINET_DEFINE_ERROR(InvalidSpec)
PINET_DEFINE_ERROR(InvalidGraph)
PINET_DEFINE_ERROR(IndexError)
PINET_DEFINE_ERROR(IoError)

/// Malformed input line; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// perception
PINET_DEFINE_ERROR(DepthUnsupported)
PINET_DEFINE_ERROR(DivisionUndefined)
PINET_DEFINE_ERROR(EdgeAbsent)

// spectra
PINET_DEFINE_ERROR(NotSymmetric)
PINET_DEFINE_ERROR(ConvergenceFailure)
PINET_DEFINE_ERROR(RankDeficient)
PINET_DEFINE_ERROR(NotInvertible)
PINET_DEFINE_ERROR(ComplexRoots)
PINET_DEFINE_ERROR(NullspaceAmbiguous)
PINET_DEFINE_ERROR(DimensionMismatch)

// detect
PINET_DEFINE_ERROR(TooFewPoints)
PINET_DEFINE_ERROR(KTooLarge)
PINET_DEFINE_ERROR(LabelOutOfRange)

/// A node group (anchor-adjacent or not) holds fewer than K members.
class GroupTooSmall : public Error {
 public:
  enum class Group { adjacent, non_adjacent };

  GroupTooSmall(Group g, long size, long k)
      : Error(std::string("group '") + name(g) + "' has " + std::to_string(size) +
              " members, fewer than K=" + std::to_string(k)),
        group_(g) {}

  Group group() const noexcept { return group_; }

  static const char* name(Group g) noexcept {
    return g == Group::adjacent ? "adjacent" : "non-adjacent";
  }

 private:
  Group group_;
};

// bench
PINET_DEFINE_ERROR(UnknownAnchor)
PINET_DEFINE_ERROR(AnchorOutsideLCC)

/// An internal consistency check failed. Indicates a bug, not bad input.
PINET_DEFINE_ERROR(InvariantViolation)

#undef PINET_DEFINE_ERROR

}  // namespace pinet
