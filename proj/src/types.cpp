/**
 * \file types.cpp
 *
 * \brief Fleet validation and coalition-id conversions.
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

#include "derres/types.hpp"

#include <cmath>
#include <sstream>

namespace derres {

std::vector<int> coalition_members(CoalitionMask mask) {
    std::vector<int> members;
    for (int i = 0; mask != 0; ++i, mask >>= 1) {
        if (mask & 1u) {
            members.push_back(i + 1);
        }
    }
    return members;
}

CoalitionMask coalition_mask(const std::vector<int>& members, int n) {
    CoalitionMask mask = 0;
    for (int id : members) {
        if (id < 1 || id > n) {
            throw ValidationError("player id " + std::to_string(id) +
                                  " outside [1, " + std::to_string(n) + "]");
        }
        const CoalitionMask bit = CoalitionMask{1} << (id - 1);
        if (mask & bit) {
            throw ValidationError("duplicate player id " + std::to_string(id) +
                                  " in coalition");
        }
        mask |= bit;
    }
    return mask;
}

std::string coalition_key(CoalitionMask mask) {
    std::string key;
    for (int id : coalition_members(mask)) {
        if (!key.empty()) {
            key += ',';
        }
        key += std::to_string(id);
    }
    return key;
}

CoalitionMask parse_coalition_key(const std::string& key, int n) {
    if (key.empty()) {
        throw ParseError("empty coalition key");
    }
    CoalitionMask mask = 0;
    int prev = 0;
    std::size_t pos = 0;
    while (pos <= key.size()) {
        const std::size_t comma = key.find(',', pos);
        const std::string tok =
            key.substr(pos, (comma == std::string::npos ? key.size() : comma) - pos);
        std::size_t used = 0;
        int id = 0;
        try {
            id = std::stoi(tok, &used);
        } catch (const std::exception&) {
            throw ParseError("bad coalition key \"" + key + "\"");
        }
        if (used != tok.size() || id < 1 || id > n) {
            throw ParseError("bad coalition key \"" + key + "\": token \"" + tok +
                             "\" is not a player id in [1, " + std::to_string(n) + "]");
        }
        if (id <= prev) {
            throw ParseError("coalition key \"" + key +
                             "\" is not a sorted list of distinct ids");
        }
        prev = id;
        mask |= CoalitionMask{1} << (id - 1);
        if (comma == std::string::npos) {
            break;
        }
        pos = comma + 1;
    }
    return mask;
}

CoalitionTable CoalitionTable::zeros(int n) {
    if (n < 1 || n > max_players) {
        throw ValidationError("player count " + std::to_string(n) + " outside [1, " +
                              std::to_string(max_players) + "]");
    }
    CoalitionTable table;
    table.n = n;
    table.values.assign(std::size_t{1} << n, 0.0);
    return table;
}

void CoalitionTable::validate() const {
    if (n < 1 || n > max_players) {
        throw ValidationError("coalition table player count " + std::to_string(n) +
                              " outside [1, " + std::to_string(max_players) + "]");
    }
    if (values.size() != (std::size_t{1} << n)) {
        throw ValidationError("coalition table for n=" + std::to_string(n) + " has " +
                              std::to_string(values.size()) + " entries, expected " +
                              std::to_string(std::size_t{1} << n));
    }
    if (values[0] != 0.0) {
        throw ValidationError("coalition table value for the empty coalition must be 0");
    }
    for (std::size_t mask = 0; mask < values.size(); ++mask) {
        if (!std::isfinite(values[mask])) {
            throw ValidationError("coalition table value for \"" +
                                  coalition_key(static_cast<CoalitionMask>(mask)) +
                                  "\" is not finite");
        }
    }
}

namespace {

[[noreturn]] void fleet_error(int der_id, const std::string& field, const std::string& what) {
    std::ostringstream os;
    os << "DER " << der_id << ": " << field << ": " << what;
    throw ValidationError(os.str());
}

void require_finite(int der_id, const std::string& field, double v) {
    if (!std::isfinite(v)) {
        fleet_error(der_id, field, "value is not finite");
    }
}

}  // namespace

FleetConfig validate_fleet(FleetConfig config) {
    const int n = config.size();
    if (n < 1 || n > max_players) {
        throw ValidationError("fleet has " + std::to_string(n) +
                              " DERs, outside the supported range [1, " +
                              std::to_string(max_players) + "]");
    }
    if (!std::isfinite(config.alpha_c) || config.alpha_c < 0.0 || config.alpha_c >= 1.0) {
        throw ValidationError("critical load factor alpha_c must lie in [0, 1)");
    }
    if (!std::isfinite(config.p_r_kw) || config.p_r_kw < 0.0) {
        throw ValidationError("reserve command p_r_kw must be finite and >= 0");
    }

    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (const DerParams& der : config.ders) {
        if (der.id < 1 || der.id > n) {
            throw ValidationError("DER id " + std::to_string(der.id) +
                                  " outside contiguous range 1.." + std::to_string(n));
        }
        if (seen[der.id - 1]) {
            throw ValidationError("duplicate DER id " + std::to_string(der.id));
        }
        seen[der.id - 1] = true;

        require_finite(der.id, "p_c_kw", der.p_c_kw);
        require_finite(der.id, "p_e_kw", der.p_e_kw);
        require_finite(der.id, "rbp", der.rbp);
        if (der.p_e_kw < 0.0) {
            fleet_error(der.id, "p_e_kw", "cleared capacity must be >= 0");
        }
        if (der.p_e_kw > der.p_c_kw) {
            fleet_error(der.id, "p_e_kw", "cleared capacity exceeds sellable capacity");
        }
        if (der.rbp <= 0.0) {
            fleet_error(der.id, "rbp", "reserve bid price must be > 0");
        }
        if (!der.pi.has_value()) {
            fleet_error(der.id, "pi", "performance index missing (supply it or provide history)");
        }
        require_finite(der.id, "pi", *der.pi);
        if (*der.pi < 0.0 || *der.pi > 1.0) {
            fleet_error(der.id, "pi", "performance index outside [0, 1]");
        }
    }
    return config;
}

}  // namespace derres
