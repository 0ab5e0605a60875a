#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "dcsgl/rng.hpp"

namespace dcsgl::scm {

// Variables of the graph-learning SCM:
//   (S~, S*) -> X,  {X, C} -> G,  G -> R,  G -> T~,  R -> T,  S~ <-> S* may be dependent.
enum Var : int { STilde = 0, SStar, X, C, G, R, TTilde, T };
inline constexpr int kNumVars = 8;
inline constexpr int kMaxAlphabet = 6;

/// Finite-alphabet SCM given by its factor tables. Conditional tables are
/// row-major with one row per parent configuration (parents in the order
/// listed) and one column per child value.
struct DiscreteSCM {
  std::array<int, kNumVars> alphabet{};
  std::vector<double> p_s;       // joint P(S~, S*), a[S~] x a[S*]
  std::vector<double> p_x;       // P(X | S~, S*)
  std::vector<double> p_c;       // P(C)
  std::vector<double> p_g;       // P(G | X, C)
  std::vector<double> p_r;       // P(R | G)
  std::vector<double> p_ttilde;  // P(T~ | G)
  std::vector<double> p_t;       // P(T | R)
};

/// Throws std::invalid_argument when a table has the wrong size, a negative
/// entry, a row not summing to 1 within 1e-12, or an alphabet outside [1, 6].
void validate(const DiscreteSCM& scm);

/// Dense distribution over all eight variables; variable 0 varies slowest.
struct JointTable {
  std::array<int, kNumVars> alphabet{};
  std::vector<double> p;
};

JointTable joint_distribution(const DiscreteSCM& scm);

/// Marginal over `vars` in the listed order (first listed varies slowest).
std::vector<double> marginal(const JointTable& joint, std::span<const int> vars);

double entropy(const JointTable& joint, std::span<const int> vars);

/// I(A;B) in nats; A and B must be disjoint.
double mutual_info(const JointTable& joint, std::span<const int> a, std::span<const int> b);
double mutual_info(const JointTable& joint, std::initializer_list<int> a, std::initializer_list<int> b);

/// I(A;B | Cond) in nats from the three-way marginal.
double conditional_mutual_info(const JointTable& joint, std::span<const int> a, std::span<const int> b,
                               std::span<const int> cond);

/// Terms and slacks of the chain
///   I(R;C) <= I(G;C) <= I(X,C;G) - I(X;G),  I(S~;R) <= I(S~;G) <= I(X;G),
///   hence I(R;C) <= I(X,C;G) - I(S~;R).
/// With X independent of C the middle step is I(X,C;G) - I(X;G) - I(G;C) = I(X;C|G) >= 0,
/// an equality only when X and C stay independent given G.
struct Theorem1Report {
  double i_rc = 0, i_gc = 0, i_xc_g = 0, i_xg = 0, i_sr = 0, i_sg = 0;
  double slack_rc_gc = 0;      // I(G;C) - I(R;C)
  double slack_chain = 0;      // I(X,C;G) - I(X;G) - I(G;C)
  double chain_residual = 0;   // I(G;C) - (I(X,C;G) - I(X;G)) = -slack_chain
  double slack_sr_sg = 0;      // I(S~;G) - I(S~;R)
  double slack_sg_xg = 0;      // I(X;G) - I(S~;G)
  double slack_bound = 0;      // I(X,C;G) - I(S~;R) - I(R;C)
  std::optional<double> slack_bound_normalized;  // 1 - I(S~;R)/I(X,C;G) - I(R;C)/I(X,C;G)
  /// Smallest of the inequality slacks (normalized form included when defined).
  double min_slack() const;
};

Theorem1Report check_theorem1(const DiscreteSCM& scm);

struct Theorem2Report {
  bool premise_met = false;
  double i_s_ttilde = 0;  // I(S~;T~)
  double i_s_g = 0;       // I(S~;G)
  double i_s_r = 0;       // I(S~;R)
  // With P(T|R) chosen so that q(t|s~) = p(t|s~):
  bool matched = false;        // the matching conditional could be realized
  double match_residual = 0;   // max |q(t|s~) - p(t|s~)|
  double i_s_t_matched = 0;
  double equality_gap = 0;     // |I(S~;T) - I(S~;T~)|
  // Random alternative conditionals P(T'|R):
  int alternatives = 0;
  double max_alternative = 0;  // max I(S~;T')
  double worst_excess = 0;     // max_alternative - I(S~;T~)
};

/// Verifies the maximization claim on an SCM whose T~ channel satisfies
/// I(T~;S~) = I(G;S~). The matching P(T|R) is the posterior P(T~|R), which
/// realizes q = p whenever T~ is a function of R.
Theorem2Report check_theorem2(const DiscreteSCM& scm, std::uint64_t seed, int alternatives = 100);

/// Random SCM with alphabets in [1, max_alphabet]; some rows are made
/// deterministic or sparse so boundary cases are exercised.
DiscreteSCM random_scm(Rng& rng, int max_alphabet = 4);

/// Random SCM satisfying the Theorem 2 premise: G values come in groups with
/// identical posteriors P(S~|G), T~ is the group label (a sufficient
/// statistic of G for S~), and R is either G or the group label.
DiscreteSCM premise_scm(Rng& rng, int max_alphabet = 4);

/// Deterministic T~ channel grouping G values by equal posterior P(S~|G).
/// Returns the table and the number of groups.
std::pair<std::vector<double>, int> sufficient_statistic_channel(const DiscreteSCM& scm);

}  // namespace dcsgl::scm
