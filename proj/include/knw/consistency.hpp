#ifndef KNW_CONSISTENCY_HPP
#define KNW_CONSISTENCY_HPP

#include <vector>

#include "knw/kernel.hpp"
#include "knw/pmf.hpp"

namespace knw {

// A fully-connected group of sites with its own dense covariance matrix;
// the closed-form joint law below only applies to such groups.
struct CliqueSpec {
  std::vector<Pmf> pi;
  std::vector<Pmf> tilde;
  std::vector<Pmf> hat;
  std::vector<std::vector<double>> beta;  // symmetric, zero diagonal

  int n() const { return static_cast<int>(pi.size()); }
};

// Extracts the clique over `sites`, which must be pairwise adjacent in the
// field's graph.
CliqueSpec clique_from_field(const FieldSpec& spec, const SiteSet& sites);

// Joint probability of one configuration (state indices aligned with the
// clique's site list) under the sequential construction along that listing:
// the product of the pi's plus one bilinear correction per pair, mixed by hat
// factors of earlier sites and pi factors of later ones. Defined for every
// covariance matrix, feasible or not, which makes it the right evaluator for
// scanning feasibility windows.
double joint_closed_form(const CliqueSpec& clique, const std::vector<int>& config);

// Worst |sum_x_j joint(n sites) - joint(n-1 sites)| over every dropped site and
// configuration; zero in exact arithmetic. Guarded by kOracleGuard.
double check_marginality(const CliqueSpec& clique);

// Every distinct quadruple must satisfy the two product identities
// rho_ij*rho_kl == rho_il*rho_jk == rho_ik*rho_jl.
bool correlation_multiplication_holds(const std::vector<std::vector<double>>& rho,
                                      double tol = 1e-12);

// Completes a correlation matrix from its free entries rho(0,k) for k=1..n-1
// (in `rho_first_row`) plus rho(1,n-1), so that the product identities hold.
// rho(0,1) and rho(0,n-1) anchor the construction and must be nonzero.
std::vector<std::vector<double>> solve_rho_family(const std::vector<double>& rho_first_row,
                                                  double rho_second_last);

struct PermutationReport {
  bool permutable = false;
  double residual = 0.0;  // worst triple-condition mismatch
  std::vector<std::vector<double>> y_hat;  // hat - pi per site and state
  bool cme_holds = false;                  // the quadruple product identities
  bool hat_equals_pi = false;
  bool anchor_found = false;
  double family_parameter = 0.0;  // y at the anchor site's extreme weight state
};

// Decides whether the clique's joint law is independent of simulation order.
// Two sites are always exchangeable; for three or more the triple conditions
// must vanish, and from four sites up the correlation product identities must
// hold as well unless hat == pi termwise.
PermutationReport check_permutation(const CliqueSpec& clique, double tol = 1e-10);

// One-parameter family of hat pmfs that keep a clique with the given weights
// and scaled correlations order-invariant. Anchors tilde_rho(0,1) and
// tilde_rho(0,n-1) must be nonzero; entries pushed below zero raise InvalidHat.
std::vector<Pmf> solve_hat_family(const std::vector<Pmf>& pi, const std::vector<Pmf>& tilde,
                                  const std::vector<std::vector<double>>& tilde_rho,
                                  double family_parameter);

// With hat == pi, a site whose covariances to the rest of the clique all
// vanish is independent of the rest: returns whether the enumerated joint
// factors accordingly (tolerance 1e-12). The zero-covariance precondition is
// enforced; hat != pi inputs are allowed and generally make this return false.
bool check_independence_reduction(const CliqueSpec& clique, int site_index);

}  // namespace knw

#endif  // KNW_CONSISTENCY_HPP
