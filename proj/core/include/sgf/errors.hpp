#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sgf {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration or violated precondition (bad dimension, bad key, ...).
struct ConfigError : Error {
  using Error::Error;
};

// Geometric/analytic domain violations: radius out of range, t >= t0, p0 formula
// outside its domain, and similar.
struct DomainError : Error {
  using Error::Error;
};

// The singular potential was evaluated at a matrix with a zero eigenvalue.
struct SingularPotentialError : Error {
  using Error::Error;
};

// A time window (cylinder or strip) contains no snapshots.
struct EmptyWindowError : Error {
  using Error::Error;
};

// A shell ratio has an empty shell or a vanishing denominator.
struct UndefinedRatioError : Error {
  using Error::Error;
};

// A center does not admit enough valid shells for the requested infimum.
struct CoverageError : Error {
  using Error::Error;
};

// Grassmannian projection failed at every site.
struct ProjectionError : Error {
  using Error::Error;
};

// Snapshot file is malformed; `offset` is the byte position of the problem.
struct FormatError : Error {
  FormatError(const std::string& what, std::size_t offset_)
      : Error(what + " (byte offset " + std::to_string(offset_) + ")"), offset(offset_) {}
  std::size_t offset;
};

// The time integrator produced a non-finite field or a collapsed spectrum.
// For the singular family this is an expected, reportable outcome.
struct DivergenceError : Error {
  DivergenceError(const std::string& what, long step_, double t_, double sup_e_,
                  std::int64_t site_)
      : Error(what), step(step_), t(t_), sup_e(sup_e_), site(site_) {}
  long step;
  double t;
  double sup_e;
  std::int64_t site;
};

}  // namespace sgf
