#ifndef KNW_ERRORS_HPP
#define KNW_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace knw {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A pmf failed structural validation (sizes, negativity, normalization, duplicate states).
class InvalidPmf : public Error {
 public:
  using Error::Error;
};

// A weight pmf has zero variance, so weighted standardization is undefined.
class DegenerateTilde : public Error {
 public:
  using Error::Error;
};

// Malformed graph input (loops, out-of-range endpoints).
class InvalidGraph : public Error {
 public:
  using Error::Error;
};

// The site graph must be connected for setup construction.
class DisconnectedGraph : public Error {
 public:
  using Error::Error;
};

// A caller-provided ordering hint breaks the growth rule at `position`.
class InvalidOrderHint : public Error {
 public:
  InvalidOrderHint(std::size_t position, const std::string& what)
      : Error(what), position(position) {}
  std::size_t position;
};

// A site ordering is not a valid permutation for the requested operation.
class InvalidOrdering : public Error {
 public:
  using Error::Error;
};

// Inputs violate the constraints of the requested field variant.
class VariantConstraintViolation : public Error {
 public:
  using Error::Error;
};

// A conditional probability left [0,1] beyond tolerance: the covariance targets
// are infeasible for the given marginals at this configuration.
class RegularityViolation : public Error {
 public:
  RegularityViolation(int site, std::vector<int> base_sites, std::vector<int> base_states,
                      int state, double value, const std::string& what)
      : Error(what),
        site(site),
        base_sites(std::move(base_sites)),
        base_states(std::move(base_states)),
        state(state),
        value(value) {}
  int site;
  std::vector<int> base_sites;
  std::vector<int> base_states;  // state indices aligned with base_sites
  int state;                     // state index at `site`
  double value;                  // offending probability
};

// A conditional row was requested against a zero-probability conditioning event.
class ZeroBaseMarginal : public Error {
 public:
  using Error::Error;
};

// Enumeration would exceed the configured size guard.
class ExplosionGuard : public Error {
 public:
  using Error::Error;
};

// The Markov-mode sampler requires hat == pi termwise.
class HatPiMismatch : public Error {
 public:
  using Error::Error;
};

// The multiplication-route marginal is only defined for bases inside the
// already-simulated prefix.
class BaseOutsidePrefix : public Error {
 public:
  using Error::Error;
};

// An anchor correlation required by a closed-form family solver is zero.
class ZeroAnchorCorrelation : public Error {
 public:
  using Error::Error;
};

// No relabeling yields the anchors needed to parameterize the solution family.
class AnchorUnsatisfiable : public Error {
 public:
  using Error::Error;
};

// A solved hat pmf has a negative entry: the family parameter is out of range.
class InvalidHat : public Error {
 public:
  using Error::Error;
};

// A grid-only operation was invoked on a non-grid spec.
class NotAGrid : public Error {
 public:
  using Error::Error;
};

// Spec file IO or schema violation.
class SpecError : public Error {
 public:
  using Error::Error;
};

}  // namespace knw

#endif  // KNW_ERRORS_HPP
