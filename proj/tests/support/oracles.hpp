#pragma once

#include "granuscore/evalkit.hpp"

#include <vector>

namespace granuscore::testsupport {

// High-precision geometry oracles (256-bit MPFR) using the arcosh route,
// algebraically independent of the Mobius-addition implementation path.
double oracle_dist0(const std::vector<double>& components, double curvature);
double oracle_poincare_distance(const std::vector<double>& u, const std::vector<double>& v,
                                double curvature);

// Brute-force metric oracles, written against the metric definitions only.
double oracle_pairwise_global(const std::vector<ScoredEntry>& entries, size_t* pairs = nullptr);
double oracle_pairwise_intra(const std::vector<ScoredEntry>& entries, size_t* pairs = nullptr);
// Enumerates all permutations of each entry and checks whether the unique
// strictly-ordered permutation by prediction equals the gold order.
double oracle_exact_ordering(const std::vector<ScoredEntry>& entries);
// All-pairs concordant/discordant counting from the tau-b definition.
double oracle_kendall_tau(const std::vector<double>& x, const std::vector<double>& y);

} // namespace granuscore::testsupport
