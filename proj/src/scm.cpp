#include "dcsgl/scm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dcsgl::scm {
namespace {

const char* kNames[kNumVars] = {"S~", "S*", "X", "C", "G", "R", "T~", "T"};

void check_table(const std::vector<double>& t, int rows, int cols, const char* name) {
  if (t.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
    throw std::invalid_argument(std::string("table ") + name + " has " + std::to_string(t.size()) + " entries, expected " +
                                std::to_string(rows * cols));
  for (int r = 0; r < rows; ++r) {
    double s = 0.0;
    for (int c = 0; c < cols; ++c) {
      double v = t[static_cast<std::size_t>(r * cols + c)];
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string("table ") + name + " has a negative or non-finite entry");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-12)
      throw std::invalid_argument(std::string("table ") + name + " row " + std::to_string(r) + " sums to " +
                                  std::to_string(s));
  }
}

double xlogx_ratio(double p, double q) { return p > 0.0 ? p * std::log(p / q) : 0.0; }

// sum p log(p_ab / (p_a p_b)) for a dense na x nb table
double mi_dense(const std::vector<double>& pab, int na, int nb) {
  std::vector<double> pa(na, 0.0), pb(nb, 0.0);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j) {
      pa[i] += pab[static_cast<std::size_t>(i * nb + j)];
      pb[j] += pab[static_cast<std::size_t>(i * nb + j)];
    }
  double mi = 0.0;
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j) {
      double p = pab[static_cast<std::size_t>(i * nb + j)];
      if (p > 0.0) mi += xlogx_ratio(p, pa[i] * pb[j]);
    }
  return std::max(0.0, mi);
}

int card(const JointTable& j, std::span<const int> vars) {
  int n = 1;
  for (int v : vars) n *= j.alphabet[v];
  return n;
}

void check_vars(std::span<const int> vars) {
  for (int v : vars)
    if (v < 0 || v >= kNumVars) throw std::invalid_argument("variable index " + std::to_string(v) + " out of range");
}

void check_disjoint(std::span<const int> a, std::span<const int> b, const char* what) {
  for (int x : a)
    if (std::find(b.begin(), b.end(), x) != b.end())
      throw std::invalid_argument(std::string(what) + ": variable sets overlap on " + kNames[x]);
}

std::vector<double> random_distribution(Rng& rng, int n, bool allow_degenerate) {
  std::vector<double> p(n, 0.0);
  double u = uniform01(rng);
  if (allow_degenerate && u < 0.2) {
    p[uniform_index(rng, n)] = 1.0;
    return p;
  }
  const bool sparse = allow_degenerate && u < 0.3 && n > 1;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    p[i] = -std::log(1.0 - uniform01(rng));
    if (sparse && uniform01(rng) < 0.4) p[i] = 0.0;
    s += p[i];
  }
  if (s <= 0.0) {
    p[uniform_index(rng, n)] = 1.0;
    return p;
  }
  for (auto& v : p) v /= s;
  return p;
}

std::vector<double> random_table(Rng& rng, int rows, int cols, bool allow_degenerate = true) {
  std::vector<double> t;
  t.reserve(static_cast<std::size_t>(rows * cols));
  for (int r = 0; r < rows; ++r) {
    auto row = random_distribution(rng, cols, allow_degenerate);
    t.insert(t.end(), row.begin(), row.end());
  }
  return t;
}

std::vector<double> identity_table(int n) {
  std::vector<double> t(static_cast<std::size_t>(n * n), 0.0);
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i * n + i)] = 1.0;
  return t;
}

// P(T|R) -> I(S~;T) through the exact marginal P(S~, R)
double mi_through_channel(const std::vector<double>& p_sr, int ns, int nr, const std::vector<double>& q, int nt) {
  std::vector<double> p_st(static_cast<std::size_t>(ns * nt), 0.0);
  for (int s = 0; s < ns; ++s)
    for (int r = 0; r < nr; ++r) {
      double w = p_sr[static_cast<std::size_t>(s * nr + r)];
      if (w == 0.0) continue;
      for (int t = 0; t < nt; ++t) p_st[static_cast<std::size_t>(s * nt + t)] += w * q[static_cast<std::size_t>(r * nt + t)];
    }
  return mi_dense(p_st, ns, nt);
}

}  // namespace

void validate(const DiscreteSCM& scm) {
  const auto& a = scm.alphabet;
  for (int i = 0; i < kNumVars; ++i)
    if (a[i] < 1 || a[i] > kMaxAlphabet)
      throw std::invalid_argument(std::string("alphabet of ") + kNames[i] + " must be in [1, " +
                                  std::to_string(kMaxAlphabet) + "], got " + std::to_string(a[i]));
  check_table(scm.p_s, 1, a[STilde] * a[SStar], "P(S~,S*)");
  check_table(scm.p_x, a[STilde] * a[SStar], a[X], "P(X|S~,S*)");
  check_table(scm.p_c, 1, a[C], "P(C)");
  check_table(scm.p_g, a[X] * a[C], a[G], "P(G|X,C)");
  check_table(scm.p_r, a[G], a[R], "P(R|G)");
  check_table(scm.p_ttilde, a[G], a[TTilde], "P(T~|G)");
  check_table(scm.p_t, a[R], a[T], "P(T|R)");
}

JointTable joint_distribution(const DiscreteSCM& scm) {
  validate(scm);
  JointTable j;
  j.alphabet = scm.alphabet;
  const auto& a = scm.alphabet;
  std::size_t total = 1;
  for (int v : a) total *= static_cast<std::size_t>(v);
  j.p.assign(total, 0.0);
  std::size_t idx = 0;
  for (int s = 0; s < a[0]; ++s)
    for (int ss = 0; ss < a[1]; ++ss) {
      const double p1 = scm.p_s[static_cast<std::size_t>(s * a[1] + ss)];
      for (int x = 0; x < a[2]; ++x) {
        const double p2 = p1 * scm.p_x[static_cast<std::size_t>((s * a[1] + ss) * a[2] + x)];
        for (int c = 0; c < a[3]; ++c) {
          const double p3 = p2 * scm.p_c[static_cast<std::size_t>(c)];
          for (int g = 0; g < a[4]; ++g) {
            const double p4 = p3 * scm.p_g[static_cast<std::size_t>((x * a[3] + c) * a[4] + g)];
            for (int r = 0; r < a[5]; ++r) {
              const double p5 = p4 * scm.p_r[static_cast<std::size_t>(g * a[5] + r)];
              for (int tt = 0; tt < a[6]; ++tt) {
                const double p6 = p5 * scm.p_ttilde[static_cast<std::size_t>(g * a[6] + tt)];
                for (int t = 0; t < a[7]; ++t) j.p[idx++] = p6 * scm.p_t[static_cast<std::size_t>(r * a[7] + t)];
              }
            }
          }
        }
      }
    }
  return j;
}

std::vector<double> marginal(const JointTable& joint, std::span<const int> vars) {
  check_vars(vars);
  for (std::size_t i = 0; i < vars.size(); ++i)
    for (std::size_t k = i + 1; k < vars.size(); ++k)
      if (vars[i] == vars[k]) throw std::invalid_argument(std::string("marginal: repeated variable ") + kNames[vars[i]]);
  // stride of each joint variable inside the marginal index
  std::array<std::size_t, kNumVars> stride{};
  std::size_t m = 1;
  for (std::size_t i = vars.size(); i-- > 0;) {
    stride[vars[i]] = m;
    m *= static_cast<std::size_t>(joint.alphabet[vars[i]]);
  }
  std::vector<double> out(m, 0.0);
  std::array<int, kNumVars> digit{};
  std::size_t target = 0;
  for (double p : joint.p) {
    out[target] += p;
    for (int v = kNumVars - 1; v >= 0; --v) {
      target += stride[v];
      if (++digit[v] < joint.alphabet[v]) break;
      target -= stride[v] * static_cast<std::size_t>(joint.alphabet[v]);
      digit[v] = 0;
    }
  }
  return out;
}

double entropy(const JointTable& joint, std::span<const int> vars) {
  double h = 0.0;
  for (double p : marginal(joint, vars))
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

double mutual_info(const JointTable& joint, std::span<const int> a, std::span<const int> b) {
  check_vars(a);
  check_vars(b);
  check_disjoint(a, b, "mutual_info");
  if (a.empty() || b.empty()) return 0.0;
  std::vector<int> ab(a.begin(), a.end());
  ab.insert(ab.end(), b.begin(), b.end());
  return mi_dense(marginal(joint, ab), card(joint, a), card(joint, b));
}

double mutual_info(const JointTable& joint, std::initializer_list<int> a, std::initializer_list<int> b) {
  return mutual_info(joint, std::span<const int>(a.begin(), a.size()), std::span<const int>(b.begin(), b.size()));
}

double conditional_mutual_info(const JointTable& joint, std::span<const int> a, std::span<const int> b,
                               std::span<const int> cond) {
  check_vars(a);
  check_vars(b);
  check_vars(cond);
  check_disjoint(a, b, "conditional_mutual_info");
  check_disjoint(a, cond, "conditional_mutual_info");
  check_disjoint(b, cond, "conditional_mutual_info");
  if (a.empty() || b.empty()) return 0.0;
  std::vector<int> order(cond.begin(), cond.end());
  order.insert(order.end(), a.begin(), a.end());
  order.insert(order.end(), b.begin(), b.end());
  const auto p = marginal(joint, order);
  const int nc = card(joint, cond), na = card(joint, a), nb = card(joint, b);
  double cmi = 0.0;
  for (int z = 0; z < nc; ++z) {
    std::vector<double> slice(p.begin() + static_cast<std::ptrdiff_t>(z) * na * nb,
                              p.begin() + static_cast<std::ptrdiff_t>(z + 1) * na * nb);
    const double pz = std::accumulate(slice.begin(), slice.end(), 0.0);
    if (pz <= 0.0) continue;
    for (auto& v : slice) v /= pz;
    cmi += pz * mi_dense(slice, na, nb);
  }
  return cmi;
}

double Theorem1Report::min_slack() const {
  double m = std::min({slack_rc_gc, slack_chain, slack_sr_sg, slack_sg_xg, slack_bound});
  if (slack_bound_normalized) m = std::min(m, *slack_bound_normalized);
  return m;
}

Theorem1Report check_theorem1(const DiscreteSCM& scm) {
  const auto j = joint_distribution(scm);
  Theorem1Report r;
  r.i_rc = mutual_info(j, {R}, {C});
  r.i_gc = mutual_info(j, {G}, {C});
  r.i_xc_g = mutual_info(j, {X, C}, {G});
  r.i_xg = mutual_info(j, {X}, {G});
  r.i_sr = mutual_info(j, {STilde}, {R});
  r.i_sg = mutual_info(j, {STilde}, {G});
  r.slack_rc_gc = r.i_gc - r.i_rc;
  r.slack_chain = r.i_xc_g - r.i_xg - r.i_gc;
  r.chain_residual = -r.slack_chain;
  r.slack_sr_sg = r.i_sg - r.i_sr;
  r.slack_sg_xg = r.i_xg - r.i_sg;
  r.slack_bound = r.i_xc_g - r.i_sr - r.i_rc;
  if (r.i_xc_g > 1e-12) r.slack_bound_normalized = 1.0 - r.i_sr / r.i_xc_g - r.i_rc / r.i_xc_g;
  return r;
}

std::pair<std::vector<double>, int> sufficient_statistic_channel(const DiscreteSCM& scm) {
  const auto j = joint_distribution(scm);
  const int ng = scm.alphabet[G], ns = scm.alphabet[STilde];
  const int order[2] = {G, STilde};
  const auto p_gs = marginal(j, order);
  std::vector<std::vector<double>> post(ng, std::vector<double>(ns, 0.0));
  for (int g = 0; g < ng; ++g) {
    double pg = 0.0;
    for (int s = 0; s < ns; ++s) pg += p_gs[static_cast<std::size_t>(g * ns + s)];
    for (int s = 0; s < ns; ++s) post[g][s] = pg > 0.0 ? p_gs[static_cast<std::size_t>(g * ns + s)] / pg : 0.0;
  }
  std::vector<int> group(ng, -1);
  int groups = 0;
  for (int g = 0; g < ng; ++g) {
    if (group[g] >= 0) continue;
    group[g] = groups;
    for (int h = g + 1; h < ng; ++h) {
      if (group[h] >= 0) continue;
      double d = 0.0;
      for (int s = 0; s < ns; ++s) d = std::max(d, std::abs(post[g][s] - post[h][s]));
      if (d <= 1e-9) group[h] = groups;
    }
    ++groups;
  }
  std::vector<double> table(static_cast<std::size_t>(ng * groups), 0.0);
  for (int g = 0; g < ng; ++g) table[static_cast<std::size_t>(g * groups + group[g])] = 1.0;
  return {table, groups};
}

Theorem2Report check_theorem2(const DiscreteSCM& scm, std::uint64_t seed, int alternatives) {
  if (alternatives < 0) throw std::invalid_argument("alternatives must be >= 0");
  const auto j = joint_distribution(scm);
  const auto& a = scm.alphabet;
  Theorem2Report rep;
  rep.i_s_ttilde = mutual_info(j, {STilde}, {TTilde});
  rep.i_s_g = mutual_info(j, {STilde}, {G});
  rep.i_s_r = mutual_info(j, {STilde}, {R});
  rep.premise_met = std::abs(rep.i_s_ttilde - rep.i_s_g) <= 1e-9;
  if (!rep.premise_met) return rep;

  const int ns = a[STilde], nr = a[R], ntt = a[TTilde];
  const int sr[2] = {STilde, R};
  const int rtt[2] = {R, TTilde};
  const int stt[2] = {STilde, TTilde};
  const auto p_sr = marginal(j, sr);
  const auto p_rtt = marginal(j, rtt);
  const auto p_stt = marginal(j, stt);

  // matching channel Q(t|r) = P(T~ = t | R = r); rows with P(r) = 0 are uniform
  std::vector<double> q(static_cast<std::size_t>(nr * ntt), 0.0);
  for (int r = 0; r < nr; ++r) {
    double pr = 0.0;
    for (int t = 0; t < ntt; ++t) pr += p_rtt[static_cast<std::size_t>(r * ntt + t)];
    for (int t = 0; t < ntt; ++t)
      q[static_cast<std::size_t>(r * ntt + t)] = pr > 0.0 ? p_rtt[static_cast<std::size_t>(r * ntt + t)] / pr : 1.0 / ntt;
  }
  // q(t|s~) against p(t|s~)
  double resid = 0.0;
  for (int s = 0; s < ns; ++s) {
    double ps = 0.0;
    for (int r = 0; r < nr; ++r) ps += p_sr[static_cast<std::size_t>(s * nr + r)];
    if (ps <= 0.0) continue;
    for (int t = 0; t < ntt; ++t) {
      double qt = 0.0;
      for (int r = 0; r < nr; ++r) qt += p_sr[static_cast<std::size_t>(s * nr + r)] * q[static_cast<std::size_t>(r * ntt + t)];
      resid = std::max(resid, std::abs(qt / ps - p_stt[static_cast<std::size_t>(s * ntt + t)] / ps));
    }
  }
  rep.match_residual = resid;
  rep.matched = resid <= 1e-9;
  rep.i_s_t_matched = mi_through_channel(p_sr, ns, nr, q, ntt);
  rep.equality_gap = std::abs(rep.i_s_t_matched - rep.i_s_ttilde);

  Rng rng(derive_seed(seed, {0x7e2}));
  rep.alternatives = alternatives;
  rep.max_alternative = 0.0;
  for (int k = 0; k < alternatives; ++k) {
    const int nt = uniform_int(rng, 1, kMaxAlphabet);
    auto alt = random_table(rng, nr, nt);
    rep.max_alternative = std::max(rep.max_alternative, mi_through_channel(p_sr, ns, nr, alt, nt));
  }
  rep.worst_excess = rep.max_alternative - rep.i_s_ttilde;
  return rep;
}

DiscreteSCM random_scm(Rng& rng, int max_alphabet) {
  if (max_alphabet < 1 || max_alphabet > kMaxAlphabet)
    throw std::invalid_argument("max_alphabet must be in [1, " + std::to_string(kMaxAlphabet) + "]");
  DiscreteSCM m;
  // size-1 alphabets are kept but rare
  for (auto& v : m.alphabet) v = max_alphabet == 1 || uniform01(rng) < 0.1 ? 1 : uniform_int(rng, 2, max_alphabet);
  const auto& a = m.alphabet;
  m.p_s = random_table(rng, 1, a[STilde] * a[SStar]);
  m.p_x = random_table(rng, a[STilde] * a[SStar], a[X]);
  m.p_c = random_table(rng, 1, a[C]);
  m.p_g = random_table(rng, a[X] * a[C], a[G]);
  // R = G exactly in some draws (boundary of the data-processing step)
  if (a[R] == a[G] && uniform01(rng) < 0.15)
    m.p_r = identity_table(a[G]);
  else
    m.p_r = random_table(rng, a[G], a[R]);
  m.p_ttilde = random_table(rng, a[G], a[TTilde]);
  m.p_t = random_table(rng, a[R], a[T]);
  return m;
}

DiscreteSCM premise_scm(Rng& rng, int max_alphabet) {
  if (max_alphabet < 2 || max_alphabet > kMaxAlphabet)
    throw std::invalid_argument("max_alphabet must be in [2, " + std::to_string(kMaxAlphabet) + "]");
  DiscreteSCM m;
  auto& a = m.alphabet;
  a[STilde] = uniform_int(rng, 2, max_alphabet);
  a[SStar] = uniform_int(rng, 1, max_alphabet);
  a[X] = uniform_int(rng, 1, max_alphabet);
  a[C] = uniform_int(rng, 1, max_alphabet);
  // coarse G values, each split into 1 or 2 fine values with fixed fractions
  const int coarse = uniform_int(rng, 1, std::max(1, max_alphabet / 2));
  std::vector<int> parent;
  std::vector<double> frac;
  for (int k = 0; k < coarse; ++k) {
    const bool split = uniform01(rng) < 0.6 && static_cast<int>(parent.size()) + 2 + (coarse - k - 1) <= max_alphabet;
    if (split) {
      double f = uniform(rng, 0.2, 0.8);
      parent.insert(parent.end(), {k, k});
      frac.insert(frac.end(), {f, 1.0 - f});
    } else {
      parent.push_back(k);
      frac.push_back(1.0);
    }
  }
  a[G] = static_cast<int>(parent.size());
  m.p_s = random_table(rng, 1, a[STilde] * a[SStar], false);
  m.p_x = random_table(rng, a[STilde] * a[SStar], a[X], false);
  m.p_c = random_table(rng, 1, a[C], false);
  const auto coarse_table = random_table(rng, a[X] * a[C], coarse, false);
  m.p_g.assign(static_cast<std::size_t>(a[X] * a[C] * a[G]), 0.0);
  for (int row = 0; row < a[X] * a[C]; ++row)
    for (int g = 0; g < a[G]; ++g)
      m.p_g[static_cast<std::size_t>(row * a[G] + g)] = coarse_table[static_cast<std::size_t>(row * coarse + parent[g])] * frac[g];
  // placeholders so the posterior grouping can be computed
  a[R] = a[G];
  m.p_r = identity_table(a[G]);
  a[TTilde] = 1;
  m.p_ttilde.assign(static_cast<std::size_t>(a[G]), 1.0);
  a[T] = 1;
  m.p_t.assign(static_cast<std::size_t>(a[R]), 1.0);

  auto [channel, groups] = sufficient_statistic_channel(m);
  a[TTilde] = groups;
  m.p_ttilde = channel;
  if (uniform01(rng) < 0.5) {
    a[R] = groups;
    m.p_r = channel;
  }
  a[T] = groups;
  m.p_t = random_table(rng, a[R], a[T]);
  return m;
}

}  // namespace dcsgl::scm
