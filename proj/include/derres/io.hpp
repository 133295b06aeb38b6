/**
 * \file derres/io.hpp
 *
 * \brief File formats: fleet JSON, coalition-table JSON, network JSON, and
 *        the delivery-history CSV, plus atomic output writing.
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

#ifndef DERRES_IO_HPP
#define DERRES_IO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "derres/performance.hpp"
#include "derres/powerflow.hpp"
#include "derres/types.hpp"

namespace derres {

/// Fleet file contents before scenario overrides are applied. alpha_c and
/// p_r_kw may be omitted in the file and supplied on the command line.
struct LoadedFleet {
    std::vector<DerParams> ders;
    std::optional<double> alpha_c;
    std::optional<double> p_r_kw;
};

/// Fleet JSON: {"alpha_c": .., "p_r_kw": .., "ders": [{"id", "node",
/// "p_c_kw", "p_e_kw", "rbp", "pi"?}, ..]}.
LoadedFleet load_fleet(const std::filesystem::path& path);

/// Coalition-table JSON: {"n": .., "values": {"1": .., "1,2": .., ..}} with
/// sorted comma-joined keys. The empty coalition is implicit (value 0); the
/// map must cover every nonempty coalition exactly once.
CoalitionTable load_coalition_table(const std::filesystem::path& path);

/// Writes a coalition table in the format above at full round-trip
/// precision, so re-ingesting reproduces bitwise-identical values.
std::string coalition_table_json(const CoalitionTable& table);
void save_coalition_table(const CoalitionTable& table, const std::filesystem::path& path);

/// Network JSON: {"v_base_v": .., "slack": {"bus": .., "v_v": ..},
/// "buses": [{"id", "load_p_kw"?, "load_q_kvar"?}, ..],
/// "branches": [{"from", "to", "r_ohm", "x_ohm"}, ..],
/// "der_sites": {"1": "bus", ..}}.
NetworkModel load_network(const std::filesystem::path& path);

/// History CSV with header der_id,committed_kw,supplied_kw. Column order is
/// free and extra columns (e.g. a timestamp) are ignored.
std::vector<HistoryRecord> load_history_csv(const std::filesystem::path& path);

/// Writes content to path via a temporary file and rename, so failures
/// leave no partial output behind.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace derres

#endif  // DERRES_IO_HPP
