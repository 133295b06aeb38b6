/**
 * \file test_pipeline.cpp
 *
 * \brief End-to-end runs: reports on disk, exit codes, override and
 *        round-trip behavior.
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

#include <filesystem>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "derres/pipeline.hpp"
#include "testutil.hpp"

using namespace derres;
using nlohmann::json;

namespace {

RunConfig base_config(const std::filesystem::path& out) {
    RunConfig config;
    config.fleet_file = testutil::data_dir() / "fleet13.json";
    config.plr_table_file = testutil::data_dir() / "plr13.json";
    config.out_dir = out;
    return config;
}

bool dir_is_empty(const std::filesystem::path& dir) {
    return !std::filesystem::exists(dir) || std::filesystem::is_empty(dir);
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("13-node allocation run writes the full report bundle") {
    testutil::ScratchDir dir("allocate13");
    RunConfig config = base_config(dir.path());
    config.baseline = true;
    config.axioms = true;
    REQUIRE(run_allocate(config) == ExitCode::ok);

    const json out = json::parse(testutil::read_file(dir.path() / "allocation.json"));
    CHECK(out.at("fleet").at("n") == 3);
    CHECK(out.at("capacity").at("tucar_kw") == 85.0);

    const auto df = out.at("proposed").at("df").get<std::vector<double>>();
    REQUIRE(df.size() == 3);
    CHECK(df[0] == doctest::Approx(0.272774).epsilon(1e-12));
    CHECK(df[1] == doctest::Approx(0.219007).epsilon(1e-12));
    CHECK(df[2] == doctest::Approx(0.508219).epsilon(1e-12));

    const auto ar = out.at("proposed").at("allocated_reserve_kw").get<std::vector<double>>();
    CHECK(ar[0] == doctest::Approx(34.09161).epsilon(1e-12));
    CHECK(out.at("proposed").at("regime") == "priced");
    CHECK(out.at("baseline").at("total_cost_usd") == doctest::Approx(425.0).epsilon(1e-9));
    CHECK(out.at("axioms").at("wi").at("all_pass") == true);
    CHECK(out.at("characteristic_functions").at("plr").at("values").at("1,2,3") == 25.91);

    const std::string csv = testutil::read_file(dir.path() / "allocation.csv");
    CHECK(csv.find("der_id,node,df,") == 0);
    CHECK(csv.find("1,652,0.272774,34.091610,4.091610,215.908390,49.10,0.196358") !=
          std::string::npos);

    const std::string comparison = testutil::read_file(dir.path() / "comparison.csv");
    CHECK(comparison.find("total_cost_usd,174.61,425.00,,") != std::string::npos);
    CHECK(comparison.find("utility_stddev,,,0.036903,0.631592") != std::string::npos);
    CHECK(comparison.find("total_ar_kw,100.000000,100.000000,,") != std::string::npos);
}

TEST_CASE("no baseline flag, no comparison file") {
    testutil::ScratchDir dir("no_baseline");
    REQUIRE(run_allocate(base_config(dir.path())) == ExitCode::ok);
    CHECK(std::filesystem::exists(dir.path() / "allocation.json"));
    CHECK(std::filesystem::exists(dir.path() / "allocation.csv"));
    CHECK_FALSE(std::filesystem::exists(dir.path() / "comparison.csv"));
}

TEST_CASE("parallel flag is output-identical") {
    testutil::ScratchDir serial_dir("serial");
    testutil::ScratchDir parallel_dir("parallel");
    RunConfig config = base_config(serial_dir.path());
    config.fleet_file = testutil::data_dir() / "fleet34.json";
    config.plr_table_file = testutil::data_dir() / "plr34.json";
    config.baseline = true;
    REQUIRE(run_allocate(config) == ExitCode::ok);
    config.out_dir = parallel_dir.path();
    config.parallel = true;
    REQUIRE(run_allocate(config) == ExitCode::ok);
    CHECK(testutil::read_file(serial_dir.path() / "allocation.json") ==
          testutil::read_file(parallel_dir.path() / "allocation.json"));
}

TEST_CASE("empty fleet fails validation and writes nothing") {
    testutil::ScratchDir dir("empty_fleet");
    const auto fleet_path = dir.path() / "fleet.json";
    testutil::write_file(fleet_path, R"({"alpha_c": 0.5, "p_r_kw": 10.0, "ders": []})");
    RunConfig config = base_config(dir.path() / "out");
    config.fleet_file = fleet_path;
    CHECK(run_allocate(config) == ExitCode::validation_error);
    CHECK(dir_is_empty(dir.path() / "out"));
}

TEST_CASE("exit codes distinguish the failure classes") {
    testutil::ScratchDir dir("exit_codes");

    // parse error
    const auto bad = dir.path() / "bad.json";
    testutil::write_file(bad, "{");
    RunConfig config = base_config(dir.path() / "out");
    config.fleet_file = bad;
    CHECK(run_allocate(config) == ExitCode::parse_error);

    // validation error: PLR table sized for a different fleet
    config = base_config(dir.path() / "out");
    config.plr_table_file = testutil::data_dir() / "plr34.json";
    CHECK(run_allocate(config) == ExitCode::validation_error);

    // infeasible command
    config = base_config(dir.path() / "out");
    config.reserve_kw = 1e6;
    CHECK(run_allocate(config) == ExitCode::infeasible);

    // power-flow divergence: overloaded two-bus feeder
    const auto net = dir.path() / "net.json";
    testutil::write_file(net, R"({"v_base_v": 1000.0, "slack": {"bus": "s", "v_v": 1000.0},
      "buses": [{"id": "s"}, {"id": "a", "load_p_kw": 2000.0}],
      "branches": [{"from": "s", "to": "a", "r_ohm": 1.0, "x_ohm": 0.5}],
      "der_sites": {"1": "a", "2": "a", "3": "a"}})");
    config = base_config(dir.path() / "out");
    config.plr_table_file.clear();
    config.network_file = net;
    CHECK(run_allocate(config) == ExitCode::powerflow_divergence);
    CHECK(dir_is_empty(dir.path() / "out"));
}

TEST_CASE("exactly one PLR source") {
    testutil::ScratchDir dir("plr_sources");
    RunConfig config = base_config(dir.path());
    config.network_file = testutil::data_dir() / "net4bus.json";  // both set
    CHECK(run_allocate(config) == ExitCode::validation_error);
    config.plr_table_file.clear();
    config.network_file.clear();  // none set
    CHECK(run_allocate(config) == ExitCode::validation_error);
}

TEST_CASE("scenario overrides beat the fleet file") {
    testutil::ScratchDir dir("overrides");
    RunConfig config = base_config(dir.path());
    config.reserve_kw = 90.0;
    config.alpha_c = 0.25;
    REQUIRE(run_allocate(config) == ExitCode::ok);
    const json out = json::parse(testutil::read_file(dir.path() / "allocation.json"));
    CHECK(out.at("fleet").at("reserve_command_kw") == 90.0);
    CHECK(out.at("fleet").at("alpha_c") == 0.25);
}

TEST_CASE("history resolves missing performance indices") {
    testutil::ScratchDir dir("history_pi");
    RunConfig config = base_config(dir.path());
    config.fleet_file = testutil::data_dir() / "fleet13_history.json";
    config.history_file = testutil::data_dir() / "history13.csv";
    REQUIRE(run_allocate(config) == ExitCode::ok);
    const json out = json::parse(testutil::read_file(dir.path() / "allocation.json"));
    CHECK(out.at("fleet").at("ders").at(0).at("pi") == 0.985);
    CHECK(out.at("fleet").at("ders").at(1).at("pi") == 1.0);
    CHECK(out.at("fleet").at("ders").at(2).at("pi") == 0.955);
}

TEST_CASE("direct pi and history are mutually exclusive") {
    testutil::ScratchDir dir("pi_exclusive");
    RunConfig config = base_config(dir.path());
    config.history_file = testutil::data_dir() / "history13.csv";  // fleet13 already has pi
    CHECK(run_allocate(config) == ExitCode::validation_error);
}

TEST_CASE("missing pi without history is a validation error") {
    testutil::ScratchDir dir("pi_missing");
    RunConfig config = base_config(dir.path());
    config.fleet_file = testutil::data_dir() / "fleet13_history.json";
    CHECK(run_allocate(config) == ExitCode::validation_error);
}

TEST_CASE("charfun emits the exact tables allocate would use") {
    testutil::ScratchDir dir("charfun");
    RunConfig config;
    config.fleet_file = testutil::data_dir() / "fleet13_prose.json";
    config.plr_table_file = testutil::data_dir() / "plr13.json";
    config.out_dir = dir.path();
    REQUIRE(run_charfun(config) == ExitCode::ok);

    const json wi = json::parse(testutil::read_file(dir.path() / "wi_table.json"));
    CHECK(wi.at("n") == 3);
    // the familiar rounded values 10.99 / 7.88 / 13.79
    CHECK(wi.at("values").at("1").get<double>() == doctest::Approx(10.99).epsilon(1e-3));
    CHECK(wi.at("values").at("2").get<double>() == doctest::Approx(7.88).epsilon(1e-3));
    CHECK(wi.at("values").at("3").get<double>() == doctest::Approx(13.79).epsilon(1e-3));
    CHECK(wi.at("values").at("1,2").get<double>() ==
          doctest::Approx(18.880675).epsilon(1e-9));

    const json plr = json::parse(testutil::read_file(dir.path() / "plr_table.json"));
    CHECK(plr.at("values").size() == 7);
    CHECK(plr.at("values").at("1,2,3") == 25.91);
}

TEST_CASE("charfun with a single DER emits one nonempty entry") {
    testutil::ScratchDir dir("charfun_single");
    const auto fleet_path = dir.path() / "fleet1.json";
    testutil::write_file(fleet_path, R"({"alpha_c": 0.5, "ders": [
        {"id": 1, "node": "a", "p_c_kw": 100.0, "p_e_kw": 80.0, "rbp": 10.0, "pi": 0.9}]})");
    const auto plr_path = dir.path() / "plr1.json";
    testutil::write_file(plr_path, R"({"n": 1, "values": {"1": 4.5}})");
    RunConfig config;
    config.fleet_file = fleet_path;
    config.plr_table_file = plr_path;
    config.out_dir = dir.path() / "out";
    REQUIRE(run_charfun(config) == ExitCode::ok);
    const json wi = json::parse(testutil::read_file(dir.path() / "out" / "wi_table.json"));
    CHECK(wi.at("values").size() == 1);
    CHECK(wi.at("values").at("1").get<double>() == doctest::Approx(3.6).epsilon(1e-12));
}

TEST_CASE("charfun from a network writes a power-flow PLR table") {
    testutil::ScratchDir dir("charfun_net");
    const auto fleet_path = dir.path() / "fleet.json";
    testutil::write_file(fleet_path, R"({"alpha_c": 0.5, "ders": [
        {"id": 1, "node": "c", "p_c_kw": 80.0, "p_e_kw": 60.0, "rbp": 10.0, "pi": 0.95},
        {"id": 2, "node": "b", "p_c_kw": 120.0, "p_e_kw": 100.0, "rbp": 12.0, "pi": 0.9}]})");
    RunConfig config;
    config.fleet_file = fleet_path;
    config.network_file = testutil::data_dir() / "net4bus.json";
    config.out_dir = dir.path() / "out";
    REQUIRE(run_charfun(config) == ExitCode::ok);
    const json plr = json::parse(testutil::read_file(dir.path() / "out" / "plr_table.json"));
    CHECK(plr.at("n") == 2);
    CHECK(plr.at("values").size() == 3);
    CHECK(plr.at("values").at("1").get<double>() > 0.0);
}

TEST_CASE("charfun tables re-ingested reproduce the identical allocation") {
    testutil::ScratchDir dir("roundtrip");
    const auto fleet_path = dir.path() / "fleet.json";
    testutil::write_file(fleet_path, R"({"alpha_c": 0.5, "p_r_kw": 50.0, "ders": [
        {"id": 1, "node": "c", "p_c_kw": 80.0, "p_e_kw": 60.0, "rbp": 10.0, "pi": 0.95},
        {"id": 2, "node": "b", "p_c_kw": 120.0, "p_e_kw": 100.0, "rbp": 12.0, "pi": 0.9}]})");

    RunConfig charfun_config;
    charfun_config.fleet_file = fleet_path;
    charfun_config.network_file = testutil::data_dir() / "net4bus.json";
    charfun_config.out_dir = dir.path() / "tables";
    REQUIRE(run_charfun(charfun_config) == ExitCode::ok);

    RunConfig direct;
    direct.fleet_file = fleet_path;
    direct.network_file = testutil::data_dir() / "net4bus.json";
    direct.out_dir = dir.path() / "direct";
    direct.baseline = true;
    REQUIRE(run_allocate(direct) == ExitCode::ok);

    RunConfig reingested = direct;
    reingested.network_file.clear();
    reingested.plr_table_file = dir.path() / "tables" / "plr_table.json";
    reingested.out_dir = dir.path() / "reingested";
    REQUIRE(run_allocate(reingested) == ExitCode::ok);

    CHECK(testutil::read_file(dir.path() / "direct" / "allocation.json") ==
          testutil::read_file(dir.path() / "reingested" / "allocation.json"));
    CHECK(testutil::read_file(dir.path() / "direct" / "allocation.csv") ==
          testutil::read_file(dir.path() / "reingested" / "allocation.csv"));
}

TEST_CASE("pi run reports per-DER statistics") {
    testutil::ScratchDir dir("pi_run");
    RunConfig config;
    config.fleet_file = testutil::data_dir() / "fleet13_history.json";
    config.history_file = testutil::data_dir() / "history13.csv";
    config.out_dir = dir.path();
    REQUIRE(run_pi(config) == ExitCode::ok);
    const std::string csv = testutil::read_file(dir.path() / "pi.csv");
    CHECK(csv.find("der_id,record_count,ess,tss,pi") == 0);
    CHECK(csv.find("1,3,300.000000,20000.000000,0.985000") != std::string::npos);
    CHECK(csv.find("2,3,0.000000,") != std::string::npos);
    CHECK(csv.find("3,3,") != std::string::npos);
}

TEST_CASE("pi run rejects unknown and insufficient histories") {
    testutil::ScratchDir dir("pi_errors");
    RunConfig config;
    config.fleet_file = testutil::data_dir() / "fleet13_history.json";
    config.out_dir = dir.path() / "out";

    const auto unknown = dir.path() / "unknown.csv";
    testutil::write_file(unknown, "der_id,committed_kw,supplied_kw\n9,10,10\n9,20,20\n");
    config.history_file = unknown;
    CHECK(run_pi(config) == ExitCode::validation_error);
    CHECK(dir_is_empty(dir.path() / "out"));

    const auto insufficient = dir.path() / "short.csv";
    testutil::write_file(insufficient, "der_id,committed_kw,supplied_kw\n1,10,10\n");
    config.history_file = insufficient;
    CHECK(run_pi(config) == ExitCode::validation_error);

    config.history_file.clear();
    CHECK(run_pi(config) == ExitCode::validation_error);
}

TEST_CASE("output directory resolution order") {
    CHECK(resolve_out_dir(std::string("cli"), "env") == std::filesystem::path("cli"));
    CHECK(resolve_out_dir(std::nullopt, "env") == std::filesystem::path("env"));
    CHECK(resolve_out_dir(std::nullopt, nullptr) == std::filesystem::path("."));
    CHECK(resolve_out_dir(std::nullopt, "") == std::filesystem::path("."));
}

}  // TEST_SUITE
