#include "knw/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "knw/errors.hpp"

namespace knw {

Pmf::Pmf(std::vector<double> states, std::vector<double> probs)
    : states_(std::move(states)), probs_(std::move(probs)) {
  if (states_.empty()) throw InvalidPmf("pmf needs at least one state");
  if (states_.size() != probs_.size())
    throw InvalidPmf("pmf state/probability count mismatch");

  std::vector<std::size_t> idx(states_.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return states_[a] < states_[b]; });
  std::vector<double> sorted_states(states_.size()), sorted_probs(states_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    sorted_states[i] = states_[idx[i]];
    sorted_probs[i] = probs_[idx[i]];
  }
  states_ = std::move(sorted_states);
  probs_ = std::move(sorted_probs);

  double sum = 0.0;
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (!std::isfinite(states_[i])) throw InvalidPmf("pmf state is not finite");
    if (!std::isfinite(probs_[i]) || probs_[i] < 0.0)
      throw InvalidPmf("pmf probability is negative or not finite");
    if (i > 0 && states_[i] == states_[i - 1]) throw InvalidPmf("pmf has duplicate states");
    sum += probs_[i];
  }
  if (std::abs(sum - 1.0) > kPmfSumTol)
    throw InvalidPmf("pmf probabilities do not sum to one");

  double mean = 0.0;
  for (std::size_t i = 0; i < states_.size(); ++i) mean += probs_[i] * states_[i];
  double var = 0.0;
  for (std::size_t i = 0; i < states_.size(); ++i) {
    const double d = states_[i] - mean;
    var += probs_[i] * d * d;
  }
  moments_ = Moments{mean, var};
}

Pmf Pmf::uniform(std::vector<double> states) {
  const double w = 1.0 / static_cast<double>(states.size());
  std::vector<double> probs(states.size(), w);
  return Pmf(std::move(states), std::move(probs));
}

bool Pmf::strictly_positive() const {
  for (double p : probs_)
    if (p <= 0.0) return false;
  return true;
}

Moments moments(const Pmf& pmf) { return pmf.cached_moments(); }

double tilde_z(const Pmf& tilde, std::size_t u) {
  const Moments& m = tilde.cached_moments();
  if (m.variance <= 0.0) throw DegenerateTilde("weight pmf has zero variance");
  return tilde.prob(u) * (tilde.state(u) - m.mean) / std::sqrt(m.variance);
}

double tilde_rho(double beta, const Pmf& tilde_s, const Pmf& tilde_t) {
  const double vs = tilde_s.cached_moments().variance;
  const double vt = tilde_t.cached_moments().variance;
  if (vs <= 0.0 || vt <= 0.0) throw DegenerateTilde("weight pmf has zero variance");
  return beta / (std::sqrt(vs) * std::sqrt(vt));
}

}  // namespace knw
