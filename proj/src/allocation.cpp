/**
 * \file allocation.cpp
 *
 * \brief Reserve-allocation pipeline operations.
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

#include "derres/allocation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace derres {

namespace {

// slack for feasibility comparisons on kW quantities
constexpr double feasibility_slack_kw = 1e-9;

void fill_cost_and_utilities(const FleetConfig& fleet, AllocationResult& result) {
    result.total_cost_usd = reserve_cost(fleet, result);
    UtilityReport utilities = individual_utilities(fleet, result);
    result.utilities = std::move(utilities.values);
    result.utility_stddev = utilities.stddev;
}

}  // namespace

CapacitySplit capacity_split(const FleetConfig& fleet) {
    const std::size_t n = fleet.ders.size();
    CapacitySplit split;
    split.ucar_kw.assign(n, 0.0);
    split.pcar_kw.assign(n, 0.0);
    for (const DerParams& der : fleet.ders) {
        split.ucar_kw[der.id - 1] = der.p_c_kw - der.p_e_kw;
        split.pcar_kw[der.id - 1] = (1.0 - fleet.alpha_c) * der.p_e_kw;
    }
    for (double u : split.ucar_kw) {
        split.tucar_kw += u;
    }
    return split;
}

std::vector<double> worthiness_index(const FleetConfig& fleet, const CapacitySplit& split) {
    std::vector<double> wi(fleet.ders.size(), 0.0);
    for (const DerParams& der : fleet.ders) {
        wi[der.id - 1] = split.pcar_kw[der.id - 1] / der.rbp * der.pi.value();
    }
    return wi;
}

CoalitionTable build_wi_table(const FleetConfig& fleet, const CapacitySplit& split) {
    const std::vector<double> wi = worthiness_index(fleet, split);
    CoalitionTable table = CoalitionTable::zeros(fleet.size());
    for (std::size_t mask = 1; mask < table.values.size(); ++mask) {
        const std::size_t low = mask & (~mask + 1);
        table.values[mask] = table.values[mask ^ low] + wi[std::countr_zero(low)];
    }
    return table;
}

DistributionFactorDetail distribution_factor_detail(const ShapleyResult& wi_shapley,
                                                    const ShapleyResult& plr_shapley) {
    const std::size_t n = wi_shapley.values.size();
    if (plr_shapley.values.size() != n) {
        throw ValidationError("Shapley vectors have mismatched lengths");
    }

    auto normalize = [](const std::vector<double>& psi, const char* name) {
        double sum = 0.0;
        for (double x : psi) {
            sum += x;
        }
        if (!(sum > 0.0)) {
            throw ValidationError(std::string(name) +
                                  " characteristic function degenerate: Shapley sum is not positive");
        }
        std::vector<double> out(psi.size());
        for (std::size_t i = 0; i < psi.size(); ++i) {
            out[i] = psi[i] / sum;
        }
        return out;
    };

    DistributionFactorDetail detail;
    detail.wi_normalized = normalize(wi_shapley.values, "WI");
    detail.plr_normalized = normalize(plr_shapley.values, "PLR");
    detail.equivalent.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        detail.equivalent[i] = (detail.wi_normalized[i] + detail.plr_normalized[i]) / 2.0;
    }
    double eqv_sum = 0.0;
    for (double x : detail.equivalent) {
        eqv_sum += x;
    }
    detail.df.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        detail.df[i] = detail.equivalent[i] / eqv_sum;
    }
    return detail;
}

std::vector<double> distribution_factors(const ShapleyResult& wi_shapley,
                                         const ShapleyResult& plr_shapley) {
    return distribution_factor_detail(wi_shapley, plr_shapley).df;
}

AllocationResult allocate_reserve(const FleetConfig& fleet, const CapacitySplit& split,
                                  std::span<const double> df) {
    const std::size_t n = fleet.ders.size();
    if (df.size() != n) {
        throw ValidationError("distribution factor vector length does not match the fleet");
    }
    const double p_r = fleet.p_r_kw;

    AllocationResult result;
    result.df.assign(df.begin(), df.end());
    result.allocated_reserve_kw.assign(n, 0.0);
    result.priced_reserve_kw.assign(n, 0.0);
    result.set_point_kw.assign(n, 0.0);

    if (p_r > split.tucar_kw) {
        result.regime = AllocRegime::priced;
        const double excess = p_r - split.tucar_kw;
        double pcar_total = 0.0;
        for (double p : split.pcar_kw) {
            pcar_total += p;
        }
        if (excess > pcar_total + feasibility_slack_kw) {
            std::ostringstream os;
            os << "infeasible reserve command: P_R - TUCAR = " << excess
               << " kW exceeds the total priced capacity " << pcar_total << " kW";
            throw InfeasibleError(os.str());
        }
        for (const DerParams& der : fleet.ders) {
            const std::size_t i = der.id - 1;
            const double priced = excess * df[i];
            if (priced > split.pcar_kw[i] + feasibility_slack_kw) {
                std::ostringstream os;
                os << "DER " << der.id << ": distribution factor exceeds priced capacity ("
                   << priced << " kW > PCAR " << split.pcar_kw[i] << " kW)";
                throw InfeasibleError(os.str());
            }
            result.priced_reserve_kw[i] = priced;
            result.allocated_reserve_kw[i] = split.ucar_kw[i] + priced;
            result.set_point_kw[i] = der.p_e_kw - priced;
        }
    } else {
        result.regime = AllocRegime::unpriced_prorata;
        for (const DerParams& der : fleet.ders) {
            const std::size_t i = der.id - 1;
            result.allocated_reserve_kw[i] =
                split.tucar_kw > 0.0 ? p_r * split.ucar_kw[i] / split.tucar_kw : 0.0;
            result.set_point_kw[i] = der.p_e_kw;
        }
    }

    fill_cost_and_utilities(fleet, result);
    return result;
}

double reserve_cost(const FleetConfig& fleet, const AllocationResult& result) {
    double cost = 0.0;
    for (const DerParams& der : fleet.ders) {
        cost += der.rbp * result.priced_reserve_kw[der.id - 1];
    }
    return cost;
}

UtilityReport individual_utilities(const FleetConfig& fleet, const AllocationResult& result) {
    const std::size_t n = fleet.ders.size();
    UtilityReport report;
    report.values.assign(n, 0.0);
    for (const DerParams& der : fleet.ders) {
        const std::size_t i = der.id - 1;
        const double ucar = der.p_c_kw - der.p_e_kw;
        const double priced = std::max(0.0, result.allocated_reserve_kw[i] - ucar);
        if (priced > 0.0 && der.p_c_kw <= 0.0) {
            throw ValidationError("DER " + std::to_string(der.id) +
                                  ": priced reserve with zero sellable capacity");
        }
        report.values[i] = priced > 0.0 ? der.rbp * priced * der.pi.value() / der.p_c_kw : 0.0;
    }

    if (n >= 2) {
        double mean = 0.0;
        for (double u : report.values) {
            mean += u;
        }
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (double u : report.values) {
            ss += (u - mean) * (u - mean);
        }
        report.stddev = std::sqrt(ss / static_cast<double>(n - 1));
    }
    return report;
}

AllocationResult capacity_baseline(const FleetConfig& fleet, const CapacitySplit& split) {
    const std::size_t n = fleet.ders.size();
    double capacity_total = 0.0;
    for (const DerParams& der : fleet.ders) {
        capacity_total += der.p_c_kw;
    }
    if (!(capacity_total > 0.0)) {
        throw ValidationError("fleet has zero total sellable capacity");
    }
    if (fleet.p_r_kw > capacity_total + feasibility_slack_kw) {
        std::ostringstream os;
        os << "infeasible reserve command: P_R = " << fleet.p_r_kw
           << " kW exceeds the total sellable capacity " << capacity_total << " kW";
        throw InfeasibleError(os.str());
    }

    AllocationResult result;
    result.regime = AllocRegime::capacity_baseline;
    result.df.assign(n, 0.0);
    result.allocated_reserve_kw.assign(n, 0.0);
    result.priced_reserve_kw.assign(n, 0.0);
    result.set_point_kw.assign(n, 0.0);
    for (const DerParams& der : fleet.ders) {
        const std::size_t i = der.id - 1;
        result.df[i] = der.p_c_kw / capacity_total;
        result.allocated_reserve_kw[i] = fleet.p_r_kw * result.df[i];
        const double priced =
            std::max(0.0, result.allocated_reserve_kw[i] - split.ucar_kw[i]);
        if (priced > split.pcar_kw[i] + feasibility_slack_kw) {
            std::ostringstream os;
            os << "DER " << der.id << ": capacity share exceeds priced capacity (" << priced
               << " kW > PCAR " << split.pcar_kw[i] << " kW)";
            throw InfeasibleError(os.str());
        }
        result.priced_reserve_kw[i] = priced;
        result.set_point_kw[i] = der.p_e_kw - priced;
    }

    fill_cost_and_utilities(fleet, result);
    return result;
}

}  // namespace derres
