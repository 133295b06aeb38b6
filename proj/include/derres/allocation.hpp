/**
 * \file derres/allocation.hpp
 *
 * \brief Two-stage reserve allocation: capacity split, worthiness-index
 *        game, Shapley-based distribution factors, reserves, set-points,
 *        costs, and utilities, plus the capacity-proportional baseline.
 *
 * <hr/>
 *
 * Copyright 2026 the derres authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DERRES_ALLOCATION_HPP
#define DERRES_ALLOCATION_HPP

#include <span>
#include <vector>

#include "derres/game.hpp"
#include "derres/types.hpp"

namespace derres {

// All per-DER vectors in this module are indexed by player id - 1.

/// Unpriced/priced capacity available for reserve.
struct CapacitySplit {
    std::vector<double> ucar_kw;  ///< UCAR_i = P_ci - P_ei
    double tucar_kw = 0.0;        ///< sum of UCAR
    std::vector<double> pcar_kw;  ///< PCAR_i = (1 - alpha_c) * P_ei
};

/// How the reserve command was split across the fleet.
enum class AllocRegime {
    priced,            ///< P_R > TUCAR: priced pool distributed by DF
    unpriced_prorata,  ///< P_R <= TUCAR: pro-rata over unpriced capacity
    capacity_baseline, ///< whole command split by sellable-capacity share
};

struct AllocationResult {
    AllocRegime regime = AllocRegime::priced;
    std::vector<double> df;                   ///< distribution factors, sum 1
    std::vector<double> allocated_reserve_kw; ///< AR_i
    std::vector<double> priced_reserve_kw;    ///< max(0, AR_i - UCAR_i)
    std::vector<double> set_point_kw;         ///< P_ri = P_ei - priced_i
    double total_cost_usd = 0.0;
    std::vector<double> utilities;
    double utility_stddev = 0.0;  ///< sample standard deviation (n - 1)
};

/// Per-DER utilities and their spread.
struct UtilityReport {
    std::vector<double> values;
    double stddev = 0.0;
};

/// Normalized and equivalent Shapley vectors behind a set of distribution
/// factors, kept for reporting.
struct DistributionFactorDetail {
    std::vector<double> wi_normalized;
    std::vector<double> plr_normalized;
    std::vector<double> equivalent;
    std::vector<double> df;
};

CapacitySplit capacity_split(const FleetConfig& fleet);

/// Worthiness index WI_i = PCAR_i / RBP_i * PI_i per DER; the characteristic
/// value of a coalition is the sum over its members (the WI game is
/// additive by construction).
std::vector<double> worthiness_index(const FleetConfig& fleet, const CapacitySplit& split);
CoalitionTable build_wi_table(const FleetConfig& fleet, const CapacitySplit& split);

/// DF_i = psi_eqv_i / sum(psi_eqv) where psi_eqv averages the two
/// sum-normalized Shapley vectors. Errors with "characteristic function
/// degenerate" when either vector has a nonpositive sum. The final
/// renormalization is analytically a no-op and is kept for fidelity.
std::vector<double> distribution_factors(const ShapleyResult& wi_shapley,
                                         const ShapleyResult& plr_shapley);
DistributionFactorDetail distribution_factor_detail(const ShapleyResult& wi_shapley,
                                                    const ShapleyResult& plr_shapley);

/// Splits the reserve command. When P_R > TUCAR the excess P_R - TUCAR is
/// distributed by DF on top of each DER's unpriced capacity; otherwise the
/// command is served pro rata from unpriced capacity alone and no set-point
/// moves. Errors: excess beyond the total priced capacity ("infeasible
/// reserve command"), or a DER whose DF share exceeds its own priced
/// capacity (no silent redistribution). Returns a complete result including
/// cost and utilities.
AllocationResult allocate_reserve(const FleetConfig& fleet, const CapacitySplit& split,
                                  std::span<const double> df);

/// Total reserve cost: sum of RBP_i * priced_reserve_i. Unpriced reserve
/// costs nothing.
double reserve_cost(const FleetConfig& fleet, const AllocationResult& result);

/// u_i = RBP_i * max(0, AR_i - UCAR_i) * PI_i / P_ci, plus the sample
/// standard deviation across the fleet.
UtilityReport individual_utilities(const FleetConfig& fleet, const AllocationResult& result);

/// Capacity-proportional comparison method: DF_i = P_ci / sum(P_c) and the
/// whole command is split by DF (not TUCAR-first). Priced reserve, cost,
/// and utilities follow the same definitions as the proposed method.
AllocationResult capacity_baseline(const FleetConfig& fleet, const CapacitySplit& split);

}  // namespace derres

#endif  // DERRES_ALLOCATION_HPP
