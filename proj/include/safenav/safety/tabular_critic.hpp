#pragma once

#include <string>
#include <vector>

#include "safenav/envs/tabular.hpp"
#include "safenav/safety/distribution.hpp"

namespace safenav::safety {

// Per-(s,a) cost-return distributions, row-major [s][a].
using CriticTable = std::vector<GaussianCostDistribution>;

// Joint fixed point of the mean/variance projection equations by
// value-iteration sweeps, to sup-norm change < 1e-10. Terminal states
// bootstrap zero. Throws on non-convergence within `iterations` sweeps.
CriticTable fit_tabular_critic(const envs::TabularCMDP& mdp, const envs::TabularPolicy& policy,
                               int iterations = 10000);

// Writes the table as CSV: s,a,q_c,v_c,cvar (header included).
void export_critic_csv(const CriticTable& table, const envs::TabularCMDP& mdp, double alpha,
                       const std::string& path);

}  // namespace safenav::safety
