#ifndef KNW_PMF_HPP
#define KNW_PMF_HPP

#include <cstddef>
#include <vector>

namespace knw {

inline constexpr double kPmfSumTol = 1e-12;

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

// Finite discrete pmf over strictly increasing real states. Probabilities are
// nonnegative and sum to one within kPmfSumTol; moments are cached at
// construction.
class Pmf {
 public:
  Pmf(std::vector<double> states, std::vector<double> probs);
  static Pmf uniform(std::vector<double> states);

  std::size_t size() const { return states_.size(); }
  double state(std::size_t u) const { return states_[u]; }
  double prob(std::size_t u) const { return probs_[u]; }
  const std::vector<double>& states() const { return states_; }
  const std::vector<double>& probs() const { return probs_; }
  const Moments& cached_moments() const { return moments_; }
  bool strictly_positive() const;

  bool operator==(const Pmf& other) const {
    return states_ == other.states_ && probs_ == other.probs_;
  }

 private:
  std::vector<double> states_;
  std::vector<double> probs_;
  Moments moments_;
};

Moments moments(const Pmf& pmf);

// Weighted standardization of state u: weight(u) * (state(u) - mean) / stddev.
// The pmf must have positive variance.
double tilde_z(const Pmf& tilde, std::size_t u);

// Covariance scaled by the weight pmfs' standard deviations.
double tilde_rho(double beta, const Pmf& tilde_s, const Pmf& tilde_t);

}  // namespace knw

#endif  // KNW_PMF_HPP
