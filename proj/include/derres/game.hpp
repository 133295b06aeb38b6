/**
 * \file derres/game.hpp
 *
 * \brief Exact transferable-utility game machinery: coalition enumeration,
 *        Shapley values, core membership, and axiom checks.
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

#ifndef DERRES_GAME_HPP
#define DERRES_GAME_HPP

#include <span>
#include <utility>
#include <vector>

#include "derres/types.hpp"

namespace derres {

/// Execution policy of the heavy kernels. The serial path is the reference;
/// the parallel path must produce bitwise-identical results (it keeps each
/// player's ascending-mask summation order and only distributes independent
/// units of work across threads).
enum class Exec {
    serial,
    parallel,
};

/// Relative tolerance used by all game equality and inequality checks,
/// scaled by max(1, |V(N)|).
inline constexpr double game_rel_tol = 1e-9;

/// Absolute slack allowed on core constraints, in value units.
inline constexpr double core_slack = 1e-9;

/// All 2^n coalition masks in ascending order, starting at the empty one.
std::vector<CoalitionMask> enumerate_coalitions(int n);

/// Per-player Shapley values of one characteristic function.
struct ShapleyResult {
    std::vector<double> values;
    double efficiency_residual = 0.0;  ///< |sum(values) - V(N)|
};

/// Shapley value of every player:
///
///   psi_j = sum over coalitions S containing j of
///           (|S|-1)! (n-|S|)! / n!  *  [V(S) - V(S \ {j})]
///
/// The size weights are built from exact 64-bit factorials (n <= 20 keeps
/// 20! in range) and converted to floating point once. Each player's sum
/// runs over masks in ascending order, so serial and parallel results are
/// bitwise identical.
ShapleyResult shapley(const CoalitionTable& table, Exec exec = Exec::serial);

/// Result of a core-membership test.
struct CoreCheck {
    bool in_core = false;
    double efficiency_gap = 0.0;            ///< |sum(allocation) - V(N)|
    std::vector<CoalitionMask> violations;  ///< coalitions with sum < V(S) - slack
};

/// Tests whether an allocation lies in the core: the allocation must be
/// efficient (sum equals V(N) within the relative tolerance) and no proper
/// coalition may be able to improve on it. Every violated coalition is
/// listed, in ascending mask order.
CoreCheck in_core(std::span<const double> allocation, const CoalitionTable& table);

/// Checks V(S u T) >= V(S) + V(T) for every pair of disjoint nonempty
/// coalitions. O(3^n); callers gate it for large n.
bool is_superadditive(const CoalitionTable& table, Exec exec = Exec::serial);

/// Largest n for which check_axioms runs the superadditivity scan without
/// being explicitly forced.
inline constexpr int superadditivity_default_cap = 14;

/// Per-table axiom report for a computed Shapley result. Linearity is a
/// cross-table property and is exercised by the property-test suite rather
/// than here.
struct AxiomReport {
    bool efficiency_pass = false;
    double efficiency_residual = 0.0;

    /// Individual rationality psi_j >= V({j}) is only guaranteed for
    /// superadditive games, so it is gated on the scan below.
    bool superadditivity_checked = false;
    bool superadditive = false;
    bool individual_rationality_pass = false;
    std::vector<int> individual_rationality_violations;  ///< player ids

    std::vector<std::pair<int, int>> symmetric_pairs;  ///< detected (id, id)
    bool symmetry_pass = false;

    std::vector<int> dummy_players;  ///< detected player ids
    bool dummy_pass = false;

    bool all_pass() const;
};

/// Evaluates the efficiency, individual-rationality, symmetry, and dummy
/// axioms on one table/result pair. Symmetric pairs and dummy players are
/// detected from the table itself; the axioms are then asserted on the
/// Shapley values at the module tolerance. Set force_superadditivity to run
/// the O(3^n) gate beyond the default player cap.
AxiomReport check_axioms(const CoalitionTable& table, const ShapleyResult& result,
                         bool force_superadditivity = false);

}  // namespace derres

#endif  // DERRES_GAME_HPP
