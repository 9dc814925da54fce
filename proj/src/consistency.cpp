#include "knw/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "knw/errors.hpp"
#include "knw/oracle.hpp"

namespace knw {

namespace {

double weighted_deviation(const Pmf& tilde, std::size_t u) {
  const Moments m = tilde.cached_moments();
  if (m.variance <= 0.0) throw DegenerateTilde("weight pmf has zero variance");
  return tilde.prob(u) * (tilde.state(u) - m.mean) / m.variance;
}

std::size_t guarded_size(const CliqueSpec& clique) {
  std::size_t size = 1;
  for (const Pmf& pi : clique.pi) {
    if (size > kOracleGuard / pi.size())
      throw ExplosionGuard("clique enumeration exceeds the size guard");
    size *= pi.size();
  }
  return size;
}

CliqueSpec drop_site(const CliqueSpec& clique, int drop) {
  CliqueSpec sub;
  for (int i = 0; i < clique.n(); ++i) {
    if (i == drop) continue;
    sub.pi.push_back(clique.pi[static_cast<std::size_t>(i)]);
    sub.tilde.push_back(clique.tilde[static_cast<std::size_t>(i)]);
    sub.hat.push_back(clique.hat[static_cast<std::size_t>(i)]);
  }
  sub.beta.assign(static_cast<std::size_t>(sub.n()),
                  std::vector<double>(static_cast<std::size_t>(sub.n()), 0.0));
  for (int i = 0, a = 0; i < clique.n(); ++i) {
    if (i == drop) continue;
    for (int j = 0, b = 0; j < clique.n(); ++j) {
      if (j == drop) continue;
      sub.beta[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
          clique.beta[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      ++b;
    }
    ++a;
  }
  return sub;
}

void require_matching_states(const CliqueSpec& clique) {
  for (int i = 0; i < clique.n(); ++i) {
    const auto& states = clique.pi[static_cast<std::size_t>(i)].states();
    if (clique.tilde[static_cast<std::size_t>(i)].states() != states ||
        clique.hat[static_cast<std::size_t>(i)].states() != states)
      throw InvalidHat("site " + std::to_string(i) +
                       " mixes pmfs over different state lists");
  }
}

}  // namespace

CliqueSpec clique_from_field(const FieldSpec& spec, const SiteSet& sites) {
  for (std::size_t a = 0; a < sites.size(); ++a)
    for (std::size_t b = a + 1; b < sites.size(); ++b)
      if (!spec.graph.adjacent(sites[a], sites[b]))
        throw InvalidGraph("sites " + std::to_string(sites[a]) + " and " +
                           std::to_string(sites[b]) + " are not adjacent");
  CliqueSpec clique;
  for (int s : sites) {
    clique.pi.push_back(spec.pi[static_cast<std::size_t>(s)]);
    clique.tilde.push_back(spec.tilde[static_cast<std::size_t>(s)]);
    clique.hat.push_back(spec.hat[static_cast<std::size_t>(s)]);
  }
  const std::size_t n = sites.size();
  clique.beta.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (a != b) clique.beta[a][b] = spec.beta_at(sites[a], sites[b]);
  return clique;
}

double joint_closed_form(const CliqueSpec& clique, const std::vector<int>& config) {
  const int n = clique.n();
  if (static_cast<int>(config.size()) != n) throw Error("configuration length mismatch");

  std::vector<double> pi_val(static_cast<std::size_t>(n));
  std::vector<double> hat_val(static_cast<std::size_t>(n));
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const std::size_t u = static_cast<std::size_t>(config[static_cast<std::size_t>(i)]);
    pi_val[static_cast<std::size_t>(i)] = clique.pi[static_cast<std::size_t>(i)].prob(u);
    hat_val[static_cast<std::size_t>(i)] = clique.hat[static_cast<std::size_t>(i)].prob(u);
    v[static_cast<std::size_t>(i)] = weighted_deviation(clique.tilde[static_cast<std::size_t>(i)], u);
  }

  double base = 1.0;
  for (int k = 0; k < n; ++k) base *= pi_val[static_cast<std::size_t>(k)];

  double total = base;
  double pi_suffix = 1.0;
  for (int k = n - 1; k >= 1; --k) {
    // pair corrections with later site k: hat factors over sites before k,
    // leaving out the paired earlier site j, then pi factors after k
    if (k + 1 < n) pi_suffix *= pi_val[static_cast<std::size_t>(k + 1)];
    double inner = 0.0;
    for (int j = 0; j < k; ++j) {
      double hats = 1.0;
      for (int m = 0; m < k; ++m)
        if (m != j) hats *= hat_val[static_cast<std::size_t>(m)];
      inner += hats * clique.beta[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] *
               v[static_cast<std::size_t>(j)];
    }
    total += v[static_cast<std::size_t>(k)] * inner * pi_suffix;
  }
  return total;
}

double check_marginality(const CliqueSpec& clique) {
  const int n = clique.n();
  if (n < 2) return 0.0;
  guarded_size(clique);

  double worst = 0.0;
  for (int drop = 0; drop < n; ++drop) {
    const CliqueSpec sub = drop_site(clique, drop);
    std::vector<int> dims;
    std::size_t sub_size = 1;
    for (const Pmf& pi : sub.pi) {
      dims.push_back(static_cast<int>(pi.size()));
      sub_size *= pi.size();
    }
    std::vector<int> reduced(static_cast<std::size_t>(n - 1), 0);
    std::vector<int> full(static_cast<std::size_t>(n), 0);
    for (std::size_t c = 0; c < sub_size; ++c) {
      for (int i = 0, a = 0; i < n; ++i)
        if (i != drop) full[static_cast<std::size_t>(i)] = reduced[static_cast<std::size_t>(a++)];
      double summed = 0.0;
      const std::size_t d = clique.pi[static_cast<std::size_t>(drop)].size();
      for (std::size_t u = 0; u < d; ++u) {
        full[static_cast<std::size_t>(drop)] = static_cast<int>(u);
        summed += joint_closed_form(clique, full);
      }
      worst = std::max(worst, std::abs(summed - joint_closed_form(sub, reduced)));
      for (std::size_t a = 0; a < reduced.size(); ++a) {
        if (++reduced[a] < dims[a]) break;
        reduced[a] = 0;
      }
    }
  }
  return worst;
}

bool correlation_multiplication_holds(const std::vector<std::vector<double>>& rho, double tol) {
  const int n = static_cast<int>(rho.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          const auto at = [&](int a, int b) {
            return rho[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
          };
          const double p1 = at(i, j) * at(k, l);
          const double p2 = at(i, l) * at(j, k);
          const double p3 = at(i, k) * at(j, l);
          if (std::abs(p1 - p2) > tol || std::abs(p1 - p3) > tol) return false;
        }
  return true;
}

std::vector<std::vector<double>> solve_rho_family(const std::vector<double>& rho_first_row,
                                                  double rho_second_last) {
  const int n = static_cast<int>(rho_first_row.size()) + 1;
  if (n < 3) throw Error("the completion needs at least three sites");
  const double r01 = rho_first_row.front();
  const double r0n = rho_first_row.back();
  if (r01 == 0.0 || r0n == 0.0)
    throw ZeroAnchorCorrelation("anchor correlations (0,1) and (0,n-1) must be nonzero");

  std::vector<std::vector<double>> rho(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(n), 0.0));
  const auto set = [&](int a, int b, double value) {
    rho[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = value;
    rho[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = value;
  };
  for (int i = 0; i < n; ++i) rho[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
  for (int k = 1; k < n; ++k) set(0, k, rho_first_row[static_cast<std::size_t>(k - 1)]);
  set(1, n - 1, rho_second_last);
  for (int k = 2; k <= n - 2; ++k) {
    const double r0k = rho_first_row[static_cast<std::size_t>(k - 1)];
    set(1, k, rho_second_last * r0k / r0n);
    set(k, n - 1, rho_second_last * r0k / r01);
    for (int j = k + 1; j <= n - 2; ++j)
      set(k, j, r0k * rho_second_last * rho_first_row[static_cast<std::size_t>(j - 1)] /
                    (r01 * r0n));
  }
  return rho;
}

PermutationReport check_permutation(const CliqueSpec& clique, double tol) {
  require_matching_states(clique);
  const int n = clique.n();
  PermutationReport report;

  std::vector<std::vector<double>> z(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Pmf& tilde = clique.tilde[static_cast<std::size_t>(i)];
    for (std::size_t u = 0; u < tilde.size(); ++u)
      z[static_cast<std::size_t>(i)].push_back(tilde_z(tilde, u));
  }
  std::vector<std::vector<double>> rho(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int i = 0; i < n; ++i) {
    rho[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
    for (int j = i + 1; j < n; ++j) {
      const double r = tilde_rho(clique.beta[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                                 clique.tilde[static_cast<std::size_t>(i)],
                                 clique.tilde[static_cast<std::size_t>(j)]);
      rho[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = r;
      rho[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = r;
    }
  }

  double max_y = 0.0;
  for (int i = 0; i < n; ++i) {
    std::vector<double> y;
    const Pmf& pi = clique.pi[static_cast<std::size_t>(i)];
    const Pmf& hat = clique.hat[static_cast<std::size_t>(i)];
    for (std::size_t u = 0; u < pi.size(); ++u) {
      y.push_back(hat.prob(u) - pi.prob(u));
      max_y = std::max(max_y, std::abs(y.back()));
    }
    report.y_hat.push_back(std::move(y));
  }
  report.hat_equals_pi = max_y <= 1e-12;

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        const auto& zi = z[static_cast<std::size_t>(i)];
        const auto& zj = z[static_cast<std::size_t>(j)];
        const auto& zk = z[static_cast<std::size_t>(k)];
        const auto& yi = report.y_hat[static_cast<std::size_t>(i)];
        const auto& yj = report.y_hat[static_cast<std::size_t>(j)];
        const auto& yk = report.y_hat[static_cast<std::size_t>(k)];
        const double rij = rho[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        const double rik = rho[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        const double rjk = rho[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
        for (std::size_t a = 0; a < zi.size(); ++a)
          for (std::size_t b = 0; b < zj.size(); ++b)
            for (std::size_t c = 0; c < zk.size(); ++c) {
              const double t1 = zi[a] * zj[b] * rij * yk[c];
              const double t2 = zi[a] * zk[c] * rik * yj[b];
              const double t3 = zj[b] * zk[c] * rjk * yi[a];
              report.residual = std::max({report.residual, std::abs(t1 - t2),
                                          std::abs(t1 - t3), std::abs(t2 - t3)});
            }
      }

  report.cme_holds = correlation_multiplication_holds(rho);
  report.permutable =
      report.residual <= tol && (report.hat_equals_pi || n <= 3 || report.cme_holds);

  if (n >= 2) {
    const double r01 = rho[0][1];
    const double r0n = rho[0][static_cast<std::size_t>(n - 1)];
    report.anchor_found = r01 != 0.0 && r0n != 0.0;
  }
  std::size_t extreme = 0;
  for (std::size_t u = 1; u < z[0].size(); ++u)
    if (std::abs(z[0][u]) > std::abs(z[0][extreme])) extreme = u;
  report.family_parameter = report.y_hat[0][extreme];
  return report;
}

std::vector<Pmf> solve_hat_family(const std::vector<Pmf>& pi, const std::vector<Pmf>& tilde,
                                  const std::vector<std::vector<double>>& tilde_rho,
                                  double family_parameter) {
  const int n = static_cast<int>(pi.size());
  if (n < 3) throw Error("the hat family needs at least three sites");
  const double r01 = tilde_rho[0][1];
  const double r0n = tilde_rho[0][static_cast<std::size_t>(n - 1)];
  if (r01 == 0.0 || r0n == 0.0)
    throw ZeroAnchorCorrelation("anchor correlations (0,1) and (0,n-1) must be nonzero");

  std::vector<double> z0;
  for (std::size_t u = 0; u < tilde[0].size(); ++u) z0.push_back(tilde_z(tilde[0], u));
  std::size_t extreme = 0;
  for (std::size_t u = 1; u < z0.size(); ++u)
    if (std::abs(z0[u]) > std::abs(z0[extreme])) extreme = u;
  const double scale = family_parameter / z0[extreme];

  std::vector<Pmf> hats;
  for (int i = 0; i < n; ++i) {
    double site_factor = scale;
    if (i == n - 1)
      site_factor *= tilde_rho[1][static_cast<std::size_t>(n - 1)] / r01;
    else if (i > 0)
      site_factor *= tilde_rho[static_cast<std::size_t>(i)][static_cast<std::size_t>(n - 1)] / r0n;
    std::vector<double> probs;
    for (std::size_t u = 0; u < pi[static_cast<std::size_t>(i)].size(); ++u) {
      const double y = tilde_z(tilde[static_cast<std::size_t>(i)], u) * site_factor;
      const double h = pi[static_cast<std::size_t>(i)].prob(u) + y;
      if (h < 0.0)
        throw InvalidHat("family parameter pushes a mixing probability below zero at site " +
                         std::to_string(i));
      probs.push_back(h);
    }
    hats.emplace_back(pi[static_cast<std::size_t>(i)].states(), std::move(probs));
  }
  return hats;
}

bool check_independence_reduction(const CliqueSpec& clique, int site_index) {
  const int n = clique.n();
  if (site_index < 0 || site_index >= n) throw Error("site index out of range");
  for (int k = 0; k < n; ++k)
    if (k != site_index &&
        clique.beta[static_cast<std::size_t>(site_index)][static_cast<std::size_t>(k)] != 0.0)
      throw Error("site " + std::to_string(site_index) +
                  " still has a nonzero covariance inside the group");
  guarded_size(clique);

  const CliqueSpec sub = drop_site(clique, site_index);
  std::vector<int> dims;
  std::size_t sub_size = 1;
  for (const Pmf& pi : sub.pi) {
    dims.push_back(static_cast<int>(pi.size()));
    sub_size *= pi.size();
  }
  const Pmf& own = clique.pi[static_cast<std::size_t>(site_index)];
  std::vector<int> reduced(static_cast<std::size_t>(n - 1), 0);
  std::vector<int> full(static_cast<std::size_t>(n), 0);
  for (std::size_t c = 0; c < sub_size; ++c) {
    for (int i = 0, a = 0; i < n; ++i)
      if (i != site_index)
        full[static_cast<std::size_t>(i)] = reduced[static_cast<std::size_t>(a++)];
    const double rest = joint_closed_form(sub, reduced);
    for (std::size_t u = 0; u < own.size(); ++u) {
      full[static_cast<std::size_t>(site_index)] = static_cast<int>(u);
      if (std::abs(joint_closed_form(clique, full) - own.prob(u) * rest) > 1e-12) return false;
    }
    for (std::size_t a = 0; a < reduced.size(); ++a) {
      if (++reduced[a] < dims[a]) break;
      reduced[a] = 0;
    }
  }
  return true;
}

}  // namespace knw
