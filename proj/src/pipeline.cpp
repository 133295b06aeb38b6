/**
 * \file pipeline.cpp
 *
 * \brief Orchestration and report emission.
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

#include "derres/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <vector>

#include "json.hpp"

#include "derres/allocation.hpp"
#include "derres/game.hpp"
#include "derres/io.hpp"
#include "derres/performance.hpp"
#include "derres/powerflow.hpp"

namespace derres {

namespace {

using nlohmann::json;

// allocation.json carries fixed 6-decimal values so repeated runs are
// byte-stable
double round6(double v) {
    return std::round(v * 1e6) / 1e6 + 0.0;
}

json round6(const std::vector<double>& v) {
    json arr = json::array();
    for (double x : v) {
        arr.push_back(round6(x));
    }
    return arr;
}

std::string fmt(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v + 0.0);
    return buf;
}

struct PipelineInputs {
    FleetConfig fleet;  // validated, PI resolved
    CapacitySplit split;
    CoalitionTable wi;
    CoalitionTable plr;
};

std::map<int, std::vector<HistoryRecord>> group_history(const std::vector<HistoryRecord>& records) {
    std::map<int, std::vector<HistoryRecord>> by_der;
    for (const HistoryRecord& record : records) {
        by_der[record.der_id].push_back(record);
    }
    return by_der;
}

void check_history_ids(const std::map<int, std::vector<HistoryRecord>>& by_der,
                       const std::vector<DerParams>& ders) {
    for (const auto& [der_id, records] : by_der) {
        (void)records;
        const bool known = std::any_of(ders.begin(), ders.end(),
                                       [&](const DerParams& d) { return d.id == der_id; });
        if (!known) {
            throw ValidationError("history references unknown DER " + std::to_string(der_id));
        }
    }
}

// PI comes from exactly one source per DER: a direct value in the fleet
// file or delivery history, never both.
void resolve_pi(std::vector<DerParams>& ders,
                const std::map<int, std::vector<HistoryRecord>>& by_der) {
    for (DerParams& der : ders) {
        const auto records = by_der.find(der.id);
        const bool has_history = records != by_der.end();
        if (der.pi.has_value() && has_history) {
            throw ValidationError("DER " + std::to_string(der.id) +
                                  ": direct pi and delivery history are mutually exclusive");
        }
        if (has_history) {
            const PiStats stats = compute_pi_stats(der.id, records->second);
            if (stats.clamped) {
                std::cerr << "derres: warning: DER " << der.id << ": raw R-squared "
                          << stats.raw_r2 << " clamped to 0\n";
            }
            der.pi = stats.pi;
        }
    }
}

FleetConfig assemble_fleet(const RunConfig& config, bool need_reserve) {
    const LoadedFleet loaded = load_fleet(config.fleet_file);

    FleetConfig fleet;
    fleet.ders = loaded.ders;

    if (config.alpha_c.has_value()) {
        fleet.alpha_c = *config.alpha_c;
    } else if (loaded.alpha_c.has_value()) {
        fleet.alpha_c = *loaded.alpha_c;
    } else {
        throw ValidationError("critical load factor not specified (fleet file or --alpha-c)");
    }

    if (config.reserve_kw.has_value()) {
        fleet.p_r_kw = *config.reserve_kw;
    } else if (loaded.p_r_kw.has_value()) {
        fleet.p_r_kw = *loaded.p_r_kw;
    } else if (need_reserve) {
        throw ValidationError("reserve command not specified (fleet file or --reserve-kw)");
    }

    if (!config.history_file.empty()) {
        const auto by_der = group_history(load_history_csv(config.history_file));
        check_history_ids(by_der, fleet.ders);
        resolve_pi(fleet.ders, by_der);
    }
    return validate_fleet(std::move(fleet));
}

PipelineInputs prepare_inputs(const RunConfig& config, bool need_reserve) {
    const bool from_table = !config.plr_table_file.empty();
    const bool from_network = !config.network_file.empty();
    if (from_table == from_network) {
        throw ValidationError("exactly one PLR source required (--plr-table or --network)");
    }

    PipelineInputs inputs;
    inputs.fleet = assemble_fleet(config, need_reserve);
    inputs.split = capacity_split(inputs.fleet);
    inputs.wi = build_wi_table(inputs.fleet, inputs.split);

    const Exec exec = config.parallel ? Exec::parallel : Exec::serial;
    if (from_table) {
        inputs.plr = load_coalition_table(config.plr_table_file);
        if (inputs.plr.n != inputs.fleet.size()) {
            throw ValidationError("PLR table is for " + std::to_string(inputs.plr.n) +
                                  " players, fleet has " + std::to_string(inputs.fleet.size()));
        }
    } else {
        inputs.plr = plr_table(load_network(config.network_file), inputs.fleet, exec);
    }
    return inputs;
}

const char* regime_name(AllocRegime regime) {
    switch (regime) {
        case AllocRegime::priced:
            return "priced";
        case AllocRegime::unpriced_prorata:
            return "unpriced_prorata";
        case AllocRegime::capacity_baseline:
            return "capacity_baseline";
    }
    return "?";
}

json table_json(const CoalitionTable& table) {
    json values = json::object();
    for (std::size_t mask = 1; mask < table.coalition_count(); ++mask) {
        values[coalition_key(static_cast<CoalitionMask>(mask))] = round6(table.values[mask]);
    }
    return json{{"n", table.n}, {"values", std::move(values)}};
}

json result_json(const AllocationResult& result) {
    return json{
        {"regime", regime_name(result.regime)},
        {"df", round6(result.df)},
        {"allocated_reserve_kw", round6(result.allocated_reserve_kw)},
        {"priced_reserve_kw", round6(result.priced_reserve_kw)},
        {"set_points_kw", round6(result.set_point_kw)},
        {"total_cost_usd", round6(result.total_cost_usd)},
        {"utilities", round6(result.utilities)},
        {"utility_stddev", round6(result.utility_stddev)},
    };
}

json axioms_json(const AxiomReport& report) {
    json pairs = json::array();
    for (const auto& [a, b] : report.symmetric_pairs) {
        pairs.push_back(json::array({a, b}));
    }
    return json{
        {"efficiency_pass", report.efficiency_pass},
        {"efficiency_residual", report.efficiency_residual},
        {"superadditivity_checked", report.superadditivity_checked},
        {"superadditive", report.superadditive},
        {"individual_rationality_pass", report.individual_rationality_pass},
        {"individual_rationality_violations", report.individual_rationality_violations},
        {"symmetric_pairs", std::move(pairs)},
        {"symmetry_pass", report.symmetry_pass},
        {"dummy_players", report.dummy_players},
        {"dummy_pass", report.dummy_pass},
        {"all_pass", report.all_pass()},
    };
}

// DERs in id order for stable report rows
std::vector<const DerParams*> ders_by_id(const FleetConfig& fleet) {
    std::vector<const DerParams*> ordered;
    ordered.reserve(fleet.ders.size());
    for (const DerParams& der : fleet.ders) {
        ordered.push_back(&der);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const DerParams* a, const DerParams* b) { return a->id < b->id; });
    return ordered;
}

std::string allocation_csv(const FleetConfig& fleet, const AllocationResult& result) {
    std::string csv =
        "der_id,node,df,allocated_reserve_kw,priced_reserve_kw,set_point_kw,"
        "reserve_cost_usd,utility\n";
    for (const DerParams* der : ders_by_id(fleet)) {
        const std::size_t i = der->id - 1;
        csv += std::to_string(der->id) + ',' + der->node + ',';
        csv += fmt(result.df[i], 6) + ',';
        csv += fmt(result.allocated_reserve_kw[i], 6) + ',';
        csv += fmt(result.priced_reserve_kw[i], 6) + ',';
        csv += fmt(result.set_point_kw[i], 6) + ',';
        csv += fmt(der->rbp * result.priced_reserve_kw[i], 2) + ',';
        csv += fmt(result.utilities[i], 6) + '\n';
    }
    return csv;
}

std::string comparison_csv(const FleetConfig& fleet, const AllocationResult& proposed,
                           const AllocationResult& baseline) {
    std::string csv = "der_id,proposed_ar_kw,baseline_ar_kw,proposed_utility,baseline_utility\n";
    double proposed_total = 0.0;
    double baseline_total = 0.0;
    for (const DerParams* der : ders_by_id(fleet)) {
        const std::size_t i = der->id - 1;
        csv += std::to_string(der->id) + ',';
        csv += fmt(proposed.allocated_reserve_kw[i], 6) + ',';
        csv += fmt(baseline.allocated_reserve_kw[i], 6) + ',';
        csv += fmt(proposed.utilities[i], 6) + ',';
        csv += fmt(baseline.utilities[i], 6) + '\n';
        proposed_total += proposed.allocated_reserve_kw[i];
        baseline_total += baseline.allocated_reserve_kw[i];
    }
    csv += "total_ar_kw," + fmt(proposed_total, 6) + ',' + fmt(baseline_total, 6) + ",,\n";
    csv += "total_cost_usd," + fmt(proposed.total_cost_usd, 2) + ',' +
           fmt(baseline.total_cost_usd, 2) + ",,\n";
    csv += "utility_stddev,,," + fmt(proposed.utility_stddev, 6) + ',' +
           fmt(baseline.utility_stddev, 6) + '\n';
    return csv;
}

template <typename Fn>
ExitCode guarded(Fn&& fn) {
    try {
        fn();
        return ExitCode::ok;
    } catch (const ParseError& e) {
        std::cerr << "derres: parse error: " << e.what() << '\n';
        return ExitCode::parse_error;
    } catch (const ValidationError& e) {
        std::cerr << "derres: validation error: " << e.what() << '\n';
        return ExitCode::validation_error;
    } catch (const InfeasibleError& e) {
        std::cerr << "derres: infeasible: " << e.what() << '\n';
        return ExitCode::infeasible;
    } catch (const PowerFlowError& e) {
        std::cerr << "derres: power flow: " << e.what() << '\n';
        return ExitCode::powerflow_divergence;
    } catch (const std::exception& e) {
        std::cerr << "derres: error: " << e.what() << '\n';
        return ExitCode::internal_error;
    }
}

}  // namespace

ExitCode run_allocate(const RunConfig& config) {
    return guarded([&] {
        const PipelineInputs inputs = prepare_inputs(config, /*need_reserve=*/true);
        const Exec exec = config.parallel ? Exec::parallel : Exec::serial;

        const ShapleyResult wi_shapley = shapley(inputs.wi, exec);
        const ShapleyResult plr_shapley = shapley(inputs.plr, exec);
        const DistributionFactorDetail factors =
            distribution_factor_detail(wi_shapley, plr_shapley);
        const AllocationResult proposed =
            allocate_reserve(inputs.fleet, inputs.split, factors.df);

        json out;
        json ders = json::array();
        for (const DerParams* der : ders_by_id(inputs.fleet)) {
            ders.push_back(json{{"id", der->id},
                                {"node", der->node},
                                {"p_c_kw", round6(der->p_c_kw)},
                                {"p_e_kw", round6(der->p_e_kw)},
                                {"rbp", round6(der->rbp)},
                                {"pi", round6(der->pi.value())}});
        }
        out["fleet"] = json{{"n", inputs.fleet.size()},
                            {"alpha_c", round6(inputs.fleet.alpha_c)},
                            {"reserve_command_kw", round6(inputs.fleet.p_r_kw)},
                            {"ders", std::move(ders)}};
        out["capacity"] = json{{"ucar_kw", round6(inputs.split.ucar_kw)},
                               {"tucar_kw", round6(inputs.split.tucar_kw)},
                               {"pcar_kw", round6(inputs.split.pcar_kw)}};
        out["characteristic_functions"] =
            json{{"wi", table_json(inputs.wi)}, {"plr", table_json(inputs.plr)}};
        out["shapley"] = json{{"wi", round6(wi_shapley.values)},
                              {"plr", round6(plr_shapley.values)},
                              {"wi_normalized", round6(factors.wi_normalized)},
                              {"plr_normalized", round6(factors.plr_normalized)},
                              {"equivalent", round6(factors.equivalent)}};
        out["proposed"] = result_json(proposed);

        std::optional<AllocationResult> baseline;
        if (config.baseline) {
            baseline = capacity_baseline(inputs.fleet, inputs.split);
            out["baseline"] = result_json(*baseline);
        }
        if (config.axioms) {
            out["axioms"] = json{{"wi", axioms_json(check_axioms(inputs.wi, wi_shapley))},
                                 {"plr", axioms_json(check_axioms(inputs.plr, plr_shapley))}};
        }

        std::filesystem::create_directories(config.out_dir);
        atomic_write(config.out_dir / "allocation.json", out.dump(2) + "\n");
        atomic_write(config.out_dir / "allocation.csv", allocation_csv(inputs.fleet, proposed));
        if (baseline.has_value()) {
            atomic_write(config.out_dir / "comparison.csv",
                         comparison_csv(inputs.fleet, proposed, *baseline));
        }
    });
}

ExitCode run_charfun(const RunConfig& config) {
    return guarded([&] {
        const PipelineInputs inputs = prepare_inputs(config, /*need_reserve=*/false);
        std::filesystem::create_directories(config.out_dir);
        atomic_write(config.out_dir / "wi_table.json", coalition_table_json(inputs.wi));
        atomic_write(config.out_dir / "plr_table.json", coalition_table_json(inputs.plr));
    });
}

ExitCode run_pi(const RunConfig& config) {
    return guarded([&] {
        if (config.history_file.empty()) {
            throw ValidationError("pi requires --history");
        }
        const LoadedFleet loaded = load_fleet(config.fleet_file);
        std::vector<int> ids;
        for (const DerParams& der : loaded.ders) {
            if (std::find(ids.begin(), ids.end(), der.id) != ids.end()) {
                throw ValidationError("duplicate DER id " + std::to_string(der.id));
            }
            ids.push_back(der.id);
        }

        const auto by_der = group_history(load_history_csv(config.history_file));
        check_history_ids(by_der, loaded.ders);
        for (const DerParams& der : loaded.ders) {
            if (der.pi.has_value() && by_der.count(der.id) > 0) {
                throw ValidationError("DER " + std::to_string(der.id) +
                                      ": direct pi and delivery history are mutually exclusive");
            }
        }

        std::string csv = "der_id,record_count,ess,tss,pi\n";
        for (const auto& [der_id, records] : by_der) {
            const PiStats stats = compute_pi_stats(der_id, records);
            if (stats.clamped) {
                std::cerr << "derres: warning: DER " << der_id << ": raw R-squared "
                          << stats.raw_r2 << " clamped to 0\n";
            }
            csv += std::to_string(der_id) + ',' + std::to_string(stats.count) + ',' +
                   fmt(stats.ess, 6) + ',' + fmt(stats.tss, 6) + ',' + fmt(stats.pi, 6) + '\n';
        }

        std::filesystem::create_directories(config.out_dir);
        atomic_write(config.out_dir / "pi.csv", csv);
    });
}

std::filesystem::path resolve_out_dir(const std::optional<std::string>& cli_value,
                                      const char* env_value) {
    if (cli_value.has_value() && !cli_value->empty()) {
        return *cli_value;
    }
    if (env_value != nullptr && env_value[0] != '\0') {
        return env_value;
    }
    return ".";
}

}  // namespace derres
