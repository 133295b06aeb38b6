/**
 * \file derres/types.hpp
 *
 * \brief Shared domain types: DER fleet parameters, coalition identifiers,
 *        and characteristic-function tables.
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

#ifndef DERRES_TYPES_HPP
#define DERRES_TYPES_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace derres {

// Error taxonomy; the CLI maps each class to a distinct exit code.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParseError : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};
struct InfeasibleError : Error {
    using Error::Error;
};
struct PowerFlowError : Error {
    using Error::Error;
};

/// Every downstream algorithm enumerates all 2^n coalitions exactly, so the
/// player count is hard-capped; the tool refuses larger fleets.
inline constexpr int max_players = 20;

/// Market and technical parameters of one DER.
struct DerParams {
    int id = 0;                ///< player index, 1-based and contiguous
    std::string node;          ///< feeder node label
    double p_c_kw = 0.0;       ///< sellable capacity
    double p_e_kw = 0.0;       ///< energy-market-cleared capacity
    double rbp = 0.0;          ///< reserve bid price, $/kW
    std::optional<double> pi;  ///< performance index in [0,1]; empty until
                               ///< resolved from delivery history

    bool operator==(const DerParams&) const = default;
};

/// A DER fleet plus the scenario scalars shared by every operation.
struct FleetConfig {
    std::vector<DerParams> ders;
    double alpha_c = 0.0;  ///< critical load factor, in [0,1)
    double p_r_kw = 0.0;   ///< reserve command P_R

    int size() const { return static_cast<int>(ders.size()); }

    bool operator==(const FleetConfig&) const = default;
};

/// Coalition encoded as a bitmask: bit i-1 set <=> player i is a member.
/// Mask 0 is the empty coalition.
using CoalitionMask = std::uint32_t;

/// Member ids (ascending) of a coalition mask.
std::vector<int> coalition_members(CoalitionMask mask);

/// Mask of a member-id list. Ids must be within [1, n]; duplicates rejected.
CoalitionMask coalition_mask(const std::vector<int>& members, int n);

/// Canonical file key of a coalition: sorted comma-joined ids, e.g. "1,3".
/// The empty coalition has no key (its value is implicit).
std::string coalition_key(CoalitionMask mask);

/// Parse a canonical coalition key. Ids must be strictly ascending and
/// within [1, n]; anything else is a ParseError.
CoalitionMask parse_coalition_key(const std::string& key, int n);

/// Characteristic function V of an n-player game, stored as a total map over
/// all 2^n coalition masks. values[0] is V of the empty coalition and must
/// be exactly zero.
struct CoalitionTable {
    int n = 0;
    std::vector<double> values;

    static CoalitionTable zeros(int n);

    std::size_t coalition_count() const { return values.size(); }
    double value(CoalitionMask mask) const { return values[mask]; }
    double grand_value() const { return values[values.size() - 1]; }

    /// Throws ValidationError unless the table is total, finite, within the
    /// player cap, and V(empty) == 0.
    void validate() const;
};

/// Validates every fleet invariant (unique contiguous 1-based ids, p_c >=
/// p_e >= 0, rbp > 0, pi in [0,1], alpha_c in [0,1), p_r >= 0, player-count
/// cap, finiteness) and returns the config unchanged. Idempotent; DER order
/// is preserved. Errors name the offending DER id and field.
FleetConfig validate_fleet(FleetConfig config);

}  // namespace derres

#endif  // DERRES_TYPES_HPP
