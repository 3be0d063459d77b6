#pragma once

#include <stdexcept>
#include <string>

namespace mixphase {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Phi[z] requested for |z| below the visibility threshold.
class UndefinedPhase : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotHermitian : public Error {
 public:
  using Error::Error;
};

// Rotating-frame frequency Omega vanishes (V == omega and muB == 0).
class DegenerateFrame : public Error {
 public:
  using Error::Error;
};

// Both instantaneous eigenvalues coincide (V == 0 and muB == 0).
class DegenerateSpectrum : public Error {
 public:
  using Error::Error;
};

class DegenerateWeights : public Error {
 public:
  using Error::Error;
};

class UnitarityLoss : public Error {
 public:
  using Error::Error;
};

// Ensembles in one computation do not share a reference basis.
class BasisMismatch : public Error {
 public:
  using Error::Error;
};

// Rejected input values (negative muB, non-finite parameters, empty grids...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace mixphase
