/**
 * \file derres_main.cpp
 *
 * \brief Command-line front end: allocate, charfun, and pi subcommands.
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

#include <cstdlib>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "derres/pipeline.hpp"

namespace {

struct CliOptions {
    derres::RunConfig run;
    std::optional<std::string> out_dir;
    std::optional<double> alpha_c;
    std::optional<double> reserve_kw;
    std::string plr_table;
    std::string network;
    std::string history;
    std::string fleet;
};

void add_common(CLI::App* cmd, CliOptions& options, bool with_plr_source) {
    cmd->add_option("--fleet", options.fleet, "Fleet JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    if (with_plr_source) {
        auto* table = cmd->add_option("--plr-table", options.plr_table,
                                      "Power-loss-reduction coalition table JSON");
        auto* network = cmd->add_option("--network", options.network,
                                        "Radial feeder JSON for power-flow PLR");
        table->check(CLI::ExistingFile)->excludes(network);
        network->check(CLI::ExistingFile);
        cmd->add_option("--alpha-c", options.alpha_c,
                        "Critical load factor override, in [0,1)");
        cmd->add_flag("--parallel", options.run.parallel,
                      "Evaluate coalitions and Shapley sums in parallel");
    }
    cmd->add_option("--history", options.history,
                    "Delivery-history CSV (der_id,committed_kw,supplied_kw)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", options.out_dir, "Output directory")
        ->envname("RESERVE_OUT_DIR");
}

derres::RunConfig make_config(const CliOptions& options) {
    derres::RunConfig config = options.run;
    config.fleet_file = options.fleet;
    config.plr_table_file = options.plr_table;
    config.network_file = options.network;
    config.history_file = options.history;
    config.alpha_c = options.alpha_c;
    config.reserve_kw = options.reserve_kw;
    config.out_dir =
        derres::resolve_out_dir(options.out_dir, std::getenv("RESERVE_OUT_DIR"));
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coalitional-game spinning-reserve allocation for distribution-feeder DERs"};
    app.require_subcommand(1);

    CliOptions alloc_options;
    CLI::App* alloc = app.add_subcommand(
        "allocate", "Allocate the reserve command across the fleet and write reports");
    add_common(alloc, alloc_options, /*with_plr_source=*/true);
    alloc->add_option("--reserve-kw", alloc_options.reserve_kw,
                      "Reserve command P_R override, kW");
    alloc->add_flag("--baseline", alloc_options.run.baseline,
                    "Also compute the capacity-proportional baseline and comparison.csv");
    alloc->add_flag("--axioms", alloc_options.run.axioms,
                    "Include a Shapley axiom report in allocation.json");

    CliOptions charfun_options;
    CLI::App* charfun = app.add_subcommand(
        "charfun", "Write the WI and PLR characteristic-function tables");
    add_common(charfun, charfun_options, /*with_plr_source=*/true);

    CliOptions pi_options;
    CLI::App* pi = app.add_subcommand("pi", "Report performance indices from delivery history");
    add_common(pi, pi_options, /*with_plr_source=*/false);
    pi->get_option("--history")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(derres::ExitCode::parse_error);
    }

    if (alloc->parsed()) {
        return static_cast<int>(derres::run_allocate(make_config(alloc_options)));
    }
    if (charfun->parsed()) {
        return static_cast<int>(derres::run_charfun(make_config(charfun_options)));
    }
    return static_cast<int>(derres::run_pi(make_config(pi_options)));
}
