/**
 * \file game.cpp
 *
 * \brief Subset-enumeration implementations of the game operations.
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

#include "derres/game.hpp"

#include <bit>
#include <cmath>
#include <cstdint>

namespace derres {

namespace {

std::uint64_t factorial(int k) {
    std::uint64_t f = 1;
    for (int i = 2; i <= k; ++i) {
        f *= static_cast<std::uint64_t>(i);
    }
    return f;  // 20! still fits in 64 bits
}

// weights[s] = (s-1)! (n-s)! / n! for coalition size s
std::vector<double> shapley_weights(int n) {
    std::vector<double> weights(static_cast<std::size_t>(n) + 1, 0.0);
    const double n_fact = static_cast<double>(factorial(n));
    for (int s = 1; s <= n; ++s) {
        weights[s] =
            static_cast<double>(factorial(s - 1)) * static_cast<double>(factorial(n - s)) / n_fact;
    }
    return weights;
}

double rel_tol_for(const CoalitionTable& table) {
    return game_rel_tol * std::max(1.0, std::abs(table.grand_value()));
}

}  // namespace

std::vector<CoalitionMask> enumerate_coalitions(int n) {
    if (n < 1 || n > max_players) {
        throw ValidationError("player count " + std::to_string(n) + " outside [1, " +
                              std::to_string(max_players) + "]");
    }
    std::vector<CoalitionMask> masks(std::size_t{1} << n);
    for (std::size_t mask = 0; mask < masks.size(); ++mask) {
        masks[mask] = static_cast<CoalitionMask>(mask);
    }
    return masks;
}

ShapleyResult shapley(const CoalitionTable& table, Exec exec) {
    table.validate();
    const int n = table.n;
    const std::size_t count = table.coalition_count();
    const std::vector<double> weights = shapley_weights(n);

    ShapleyResult result;
    result.values.assign(static_cast<std::size_t>(n), 0.0);
    double* psi = result.values.data();
    const double* v = table.values.data();

    const bool parallel = exec == Exec::parallel;
#pragma omp parallel for if (parallel) schedule(static)
    for (int j = 0; j < n; ++j) {
        const CoalitionMask bit = CoalitionMask{1} << j;
        double acc = 0.0;
        for (std::size_t mask = bit; mask < count; ++mask) {
            if (mask & bit) {
                const int size = std::popcount(static_cast<std::uint32_t>(mask));
                acc += weights[size] * (v[mask] - v[mask ^ bit]);
            }
        }
        psi[j] = acc;
    }

    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
        sum += psi[j];
    }
    result.efficiency_residual = std::abs(sum - table.grand_value());
    return result;
}

CoreCheck in_core(std::span<const double> allocation, const CoalitionTable& table) {
    table.validate();
    const int n = table.n;
    if (allocation.size() != static_cast<std::size_t>(n)) {
        throw ValidationError("allocation has " + std::to_string(allocation.size()) +
                              " entries, game has " + std::to_string(n) + " players");
    }

    // prefix sums per mask would cost 2^n doubles; the direct popcount loop
    // is cheap enough at n <= 20
    const std::size_t count = table.coalition_count();
    CoreCheck check;
    double grand_sum = 0.0;
    for (int j = 0; j < n; ++j) {
        grand_sum += allocation[j];
    }
    check.efficiency_gap = std::abs(grand_sum - table.grand_value());

    for (std::size_t mask = 1; mask + 1 < count; ++mask) {
        double sum = 0.0;
        for (std::uint32_t bits = static_cast<std::uint32_t>(mask); bits != 0;) {
            const int j = std::countr_zero(bits);
            sum += allocation[j];
            bits &= bits - 1;
        }
        if (sum < table.values[mask] - core_slack) {
            check.violations.push_back(static_cast<CoalitionMask>(mask));
        }
    }
    check.in_core = check.violations.empty() && check.efficiency_gap <= rel_tol_for(table);
    return check;
}

bool is_superadditive(const CoalitionTable& table, Exec exec) {
    table.validate();
    const std::size_t count = table.coalition_count();
    const double* v = table.values.data();
    const double tol = rel_tol_for(table);

    bool ok = true;
    const bool parallel = exec == Exec::parallel;
    const std::int64_t last = static_cast<std::int64_t>(count);
#pragma omp parallel for if (parallel) schedule(dynamic, 64) reduction(&& : ok)
    for (std::int64_t u = 3; u < last; ++u) {
        if (!ok) {
            continue;
        }
        const std::uint32_t union_mask = static_cast<std::uint32_t>(u);
        bool local = true;
        // proper nonempty submasks of union_mask; each split is seen twice,
        // which is harmless
        for (std::uint32_t s = (union_mask - 1) & union_mask; s != 0 && local;
             s = (s - 1) & union_mask) {
            const std::uint32_t t = union_mask ^ s;
            local = v[union_mask] >= v[s] + v[t] - tol;
        }
        ok = ok && local;
    }
    return ok;
}

bool AxiomReport::all_pass() const {
    const bool ir_ok = !superadditivity_checked || !superadditive || individual_rationality_pass;
    return efficiency_pass && ir_ok && symmetry_pass && dummy_pass;
}

AxiomReport check_axioms(const CoalitionTable& table, const ShapleyResult& result,
                         bool force_superadditivity) {
    table.validate();
    const int n = table.n;
    if (result.values.size() != static_cast<std::size_t>(n)) {
        throw ValidationError("Shapley result size does not match the table");
    }
    const std::size_t count = table.coalition_count();
    const double* v = table.values.data();
    const double tol = rel_tol_for(table);

    AxiomReport report;
    double sum = 0.0;
    for (double x : result.values) {
        sum += x;
    }
    report.efficiency_residual = std::abs(sum - table.grand_value());
    report.efficiency_pass = report.efficiency_residual <= tol;

    if (n <= superadditivity_default_cap || force_superadditivity) {
        report.superadditivity_checked = true;
        report.superadditive = is_superadditive(table);
        if (report.superadditive) {
            report.individual_rationality_pass = true;
            for (int j = 0; j < n; ++j) {
                const double single = v[CoalitionMask{1} << j];
                if (result.values[j] < single - tol) {
                    report.individual_rationality_violations.push_back(j + 1);
                    report.individual_rationality_pass = false;
                }
            }
        }
    }

    // symmetric pairs: equal marginal contribution to every coalition
    // containing neither player
    report.symmetry_pass = true;
    for (int i = 0; i < n; ++i) {
        const CoalitionMask bi = CoalitionMask{1} << i;
        for (int j = i + 1; j < n; ++j) {
            const CoalitionMask bj = CoalitionMask{1} << j;
            bool interchangeable = true;
            for (std::size_t mask = 0; mask < count && interchangeable; ++mask) {
                if (mask & (bi | bj)) {
                    continue;
                }
                interchangeable = std::abs(v[mask | bi] - v[mask | bj]) <= tol;
            }
            if (interchangeable) {
                report.symmetric_pairs.emplace_back(i + 1, j + 1);
                if (std::abs(result.values[i] - result.values[j]) > tol) {
                    report.symmetry_pass = false;
                }
            }
        }
    }

    report.dummy_pass = true;
    for (int j = 0; j < n; ++j) {
        const CoalitionMask bj = CoalitionMask{1} << j;
        bool dummy = true;
        for (std::size_t mask = 0; mask < count && dummy; ++mask) {
            if (mask & bj) {
                continue;
            }
            dummy = std::abs(v[mask | bj] - v[mask]) <= tol;
        }
        if (dummy) {
            report.dummy_players.push_back(j + 1);
            if (std::abs(result.values[j]) > tol) {
                report.dummy_pass = false;
            }
        }
    }
    return report;
}

}  // namespace derres
