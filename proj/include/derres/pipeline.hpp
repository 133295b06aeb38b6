/**
 * \file derres/pipeline.hpp
 *
 * \brief End-to-end runs behind the CLI subcommands: reserve allocation,
 *        characteristic-function emission, and performance-index reports.
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

#ifndef DERRES_PIPELINE_HPP
#define DERRES_PIPELINE_HPP

#include <filesystem>
#include <optional>
#include <string>

namespace derres {

/// Process exit codes; each documented failure class is distinct.
enum class ExitCode : int {
    ok = 0,
    internal_error = 1,
    parse_error = 2,
    validation_error = 3,
    infeasible = 4,
    powerflow_divergence = 5,
};

struct RunConfig {
    std::filesystem::path fleet_file;
    std::filesystem::path plr_table_file;  ///< exactly one PLR source must be set
    std::filesystem::path network_file;
    std::filesystem::path history_file;    ///< optional
    std::filesystem::path out_dir = ".";
    std::optional<double> alpha_c;         ///< overrides the fleet file value
    std::optional<double> reserve_kw;      ///< overrides the fleet file value
    bool baseline = false;
    bool axioms = false;
    bool parallel = false;
};

/// Full allocation run: fleet -> PI -> capacity split -> WI and PLR tables
/// -> Shapley x2 -> distribution factors -> reserves, set-points, cost,
/// utilities. Writes allocation.json and allocation.csv, plus
/// comparison.csv when the baseline flag is set. Outputs are written
/// atomically after all computation succeeds; on failure nothing is
/// written. Errors go to stderr and map to the exit codes above.
ExitCode run_allocate(const RunConfig& config);

/// Writes wi_table.json and plr_table.json, exactly the tables run_allocate
/// would use for the same inputs.
ExitCode run_charfun(const RunConfig& config);

/// Writes pi.csv with der_id, record_count, ess, tss, pi for every DER in
/// the history file.
ExitCode run_pi(const RunConfig& config);

/// Output-directory resolution: the CLI flag wins, then the
/// RESERVE_OUT_DIR environment value, then the current directory.
std::filesystem::path resolve_out_dir(const std::optional<std::string>& cli_value,
                                      const char* env_value);

}  // namespace derres

#endif  // DERRES_PIPELINE_HPP
