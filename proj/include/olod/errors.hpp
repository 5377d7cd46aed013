#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace olod {

// Base class for every error the library throws deliberately. Catching this
// separates "the input or data was bad" from genuine programming errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- mesh ------------------------------------------------------------------
// Requested grid sizes are not powers of two or do not nest (nh % nEps != 0
// or nEps % nH != 0, per axis).
struct NonNested : Error {
  using Error::Error;
};
// Spatial dimension outside {1, 2}.
struct BadDimension : Error {
  using Error::Error;
};

// --- coeff -----------------------------------------------------------------
// An operation was called for the wrong spatial dimension (e.g. the 1-d
// harmonic-mean upscaling on a 2-d field).
struct DimensionError : Error {
  using Error::Error;
};

// --- corrector / linear algebra --------------------------------------------
// A linear system that should be regular came out singular and the fallback
// regularization also failed.
struct SingularSystem : Error {
  using Error::Error;
};
// A matrix that must be symmetric positive definite is not.
struct NotSPD : Error {
  using Error::Error;
};
// An element-local Gram matrix lost rank (degenerate coefficient data).
struct DegenerateElement : Error {
  using Error::Error;
};

// --- offline database ------------------------------------------------------
struct VersionMismatch : Error {
  using Error::Error;
};
struct ChecksumMismatch : Error {
  using Error::Error;
};
// Database was built for a different (d, nH, nEps, nh, k) tuple.
struct ManifestMeshMismatch : Error {
  using Error::Error;
};

// --- online ----------------------------------------------------------------
// A mu-strategy was applied to a defect model it does not support.
struct StrategyModelMismatch : Error {
  using Error::Error;
};

// --- eig -------------------------------------------------------------------
// An eigenvalue that must be real came out with a non-negligible imaginary
// part (non-symmetric Petrov-Galerkin pencil).
struct ComplexSpectrum : Error {
  using Error::Error;
};
// Fewer eigenpairs than requested exist below the trivial cutoff.
struct InsufficientPairs : Error {
  using Error::Error;
};
// Iterative solver ran out of iterations; carries the last residuals so the
// caller can decide whether "almost converged" is good enough to report.
struct NoConvergence : Error {
  std::vector<double> residuals;
  NoConvergence(const std::string& msg, std::vector<double> res)
      : Error(msg), residuals(std::move(res)) {}
};

// --- harness / CLI ---------------------------------------------------------
// Invalid experiment configuration (unknown keys, out-of-range values,
// unreadable files). The CLI maps this to exit code 2.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace olod
