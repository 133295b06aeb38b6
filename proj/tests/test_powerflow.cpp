/**
 * \file test_powerflow.cpp
 *
 * \brief Backward/forward sweep against the closed-form two-bus solution,
 *        conservation checks, topology validation, and the PLR table.
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

#include <cmath>

#include "doctest.h"

#include "derres/powerflow.hpp"
#include "testutil.hpp"

using namespace derres;

namespace {

NetworkModel two_bus(double r_ohm, double x_ohm, double load_p_kw, double load_q_kvar,
                     double v = 4160.0) {
    NetworkModel network;
    network.v_base = v;
    network.slack_v = v;
    network.slack_bus = "src";
    network.buses = {{"src", 0.0, 0.0}, {"load", load_p_kw, load_q_kvar}};
    network.branches = {{"src", "load", r_ohm, x_ohm}};
    return network;
}

// closed-form receiving-end solution of the two-bus feeder:
//   U^4 + (2(Pr+Qx) - V1^2) U^2 + (P^2+Q^2)(r^2+x^2) = 0
// loss = (P^2+Q^2)/U^2 * r
struct TwoBusOracle {
    double v2_v;
    double loss_kw;
};

TwoBusOracle two_bus_oracle(double v1, double r, double x, double p_kw, double q_kvar) {
    const double p = p_kw * 1e3;
    const double q = q_kvar * 1e3;
    const double b = v1 * v1 - 2.0 * (p * r + q * x);
    const double disc = b * b - 4.0 * (p * p + q * q) * (r * r + x * x);
    REQUIRE(disc >= 0.0);
    const double u2 = (b + std::sqrt(disc)) / 2.0;
    return {std::sqrt(u2), (p * p + q * q) / u2 * r / 1e3};
}

}  // namespace

TEST_SUITE("powerflow") {

TEST_CASE("two-bus feeder matches the closed form") {
    struct Case {
        double r, x, p_kw, q_kvar, v;
    };
    const Case cases[] = {
        {0.5, 1.0, 500.0, 200.0, 4160.0},
        {1.2, 0.9, 300.0, 0.0, 2400.0},
        {0.05, 0.1, 50.0, 25.0, 480.0},
    };
    for (const Case& c : cases) {
        CAPTURE(c.r);
        CAPTURE(c.p_kw);
        const NetworkModel network = two_bus(c.r, c.x, c.p_kw, c.q_kvar, c.v);
        const PowerFlowSolution solution = solve_power_flow(network, {});
        const TwoBusOracle oracle = two_bus_oracle(c.v, c.r, c.x, c.p_kw, c.q_kvar);
        CHECK(std::abs(solution.total_loss_kw - oracle.loss_kw) <=
              1e-8 * std::abs(oracle.loss_kw));
        CHECK(std::abs(std::abs(solution.v_pu[1]) * c.v - oracle.v2_v) <= 1e-8 * oracle.v2_v);
        CHECK(solution.converged);
    }
}

TEST_CASE("zero load gives a flat profile and exactly zero loss") {
    NetworkModel network = testutil::chain_feeder(2, 0.0, 0.0);
    const PowerFlowSolution solution = solve_power_flow(network, {});
    CHECK(solution.total_loss_kw == 0.0);
    CHECK(solution.iterations == 1);
    for (const auto& v : solution.v_pu) {
        CHECK(v == std::complex<double>(1.0, 0.0));
    }
}

TEST_CASE("injection matching local load zeroes all flows") {
    NetworkModel network = testutil::chain_feeder(2, 80.0, 0.0);  // active-power loads only
    std::map<int, double> injections;
    // a DER at every loaded bus covering exactly the local draw
    int next_id = 1;
    network.der_sites.clear();
    for (const Bus& bus : network.buses) {
        if (bus.load_p_kw > 0.0) {
            network.der_sites[next_id] = bus.id;
            injections[next_id] = bus.load_p_kw;
            ++next_id;
        }
    }
    const PowerFlowSolution solution = solve_power_flow(network, injections);
    CHECK(solution.total_loss_kw == 0.0);
    for (const auto& flow : solution.branch_flow_kva) {
        CHECK(std::abs(flow) == 0.0);
    }
}

TEST_CASE("power balance and voltage sanity on fixture feeders") {
    const NetworkModel nets[] = {testutil::chain_feeder(2), testutil::chain_feeder(5, 90.0, 35.0)};
    for (const NetworkModel& network : nets) {
        const std::map<int, double> injections = {{1, 40.0}};
        const PowerFlowSolution solution = solve_power_flow(network, injections);
        CHECK(solution.converged);
        CHECK(solution.total_loss_kw >= 0.0);
        CHECK(std::abs(power_balance_residual_kw(network, injections, solution)) <= 1e-6);
        for (const auto& v : solution.v_pu) {
            CHECK(std::abs(v) > 0.5);
            CHECK(std::abs(v) < 1.1);
        }
    }
}

TEST_CASE("identical inputs give bitwise-identical solutions") {
    const NetworkModel network = testutil::chain_feeder(3);
    const std::map<int, double> injections = {{1, 55.0}, {3, 10.0}};
    const PowerFlowSolution a = solve_power_flow(network, injections);
    const PowerFlowSolution b = solve_power_flow(network, injections);
    CHECK(a.v_pu == b.v_pu);
    CHECK(a.branch_flow_kva == b.branch_flow_kva);
    CHECK(a.total_loss_kw == b.total_loss_kw);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("structural validation") {
    NetworkModel network = two_bus(0.5, 1.0, 100.0, 0.0);
    network.branches.push_back({"src", "load", 0.2, 0.4});  // parallel edge -> not a tree
    CHECK_THROWS_AS(solve_power_flow(network, {}), ValidationError);

    network = two_bus(0.5, 1.0, 100.0, 0.0);
    network.buses.push_back({"island", 5.0, 0.0});
    CHECK_THROWS_WITH_AS(validate_network(network), doctest::Contains("spanning tree"),
                         ValidationError);
    network.branches.push_back({"island", "load", 0.3, 0.3});
    CHECK_NOTHROW(validate_network(network));

    network = two_bus(0.5, 1.0, 100.0, 0.0);
    network.branches[0].to = "nowhere";
    CHECK_THROWS_WITH_AS(validate_network(network), doctest::Contains("unknown bus"),
                         ValidationError);

    network = two_bus(0.5, 1.0, 100.0, 0.0);
    network.slack_bus = "missing";
    CHECK_THROWS_AS(validate_network(network), ValidationError);

    network = two_bus(0.5, 1.0, 100.0, 0.0);
    network.der_sites[1] = "nowhere";
    CHECK_THROWS_WITH_AS(validate_network(network), doctest::Contains("DER 1"),
                         ValidationError);

    // four buses in a ring
    NetworkModel ring;
    ring.v_base = ring.slack_v = 1000.0;
    ring.slack_bus = "s";
    ring.buses = {{"s"}, {"a", 10.0, 0.0}, {"b", 10.0, 0.0}};
    ring.branches = {{"s", "a", 0.1, 0.1}, {"a", "b", 0.1, 0.1}};
    CHECK_NOTHROW(validate_network(ring));
    ring.buses.push_back({"c", 10.0, 0.0});
    ring.branches.push_back({"b", "c", 0.1, 0.1});
    ring.branches.push_back({"c", "s", 0.1, 0.1});  // closes the loop: 4 branches, 4 buses
    CHECK_THROWS_AS(validate_network(ring), ValidationError);
}

TEST_CASE("overload collapses instead of silently converging") {
    // a 1 ohm feeder at 1 kV can deliver ~250 kW; ask for far more
    const NetworkModel network = two_bus(1.0, 0.5, 2000.0, 0.0, 1000.0);
    CHECK_THROWS_AS(solve_power_flow(network, {}), PowerFlowError);
}

TEST_CASE("loss reduction table on the chain feeder") {
    const NetworkModel network = testutil::chain_feeder(2);
    const FleetConfig fleet = testutil::chain_fleet(2, 0.0);
    const CoalitionTable table = plr_table(network, fleet);
    REQUIRE(table.coalition_count() == 4);
    CHECK(table.values[0] == 0.0);
    // serving load locally strictly reduces losses on this feeder
    CHECK(table.values[1] > 0.0);
    CHECK(table.values[2] > 0.0);
    CHECK(table.values[3] > table.values[1]);
    CHECK(table.values[3] > table.values[2]);
}

TEST_CASE("far-end injection covering half the downstream load helps") {
    NetworkModel network = testutil::chain_feeder(1, 100.0, 30.0);  // 3 buses + slack
    network.der_sites.clear();
    network.der_sites[1] = "b3";
    FleetConfig fleet;
    fleet.alpha_c = 0.5;
    fleet.ders = {testutil::der(1, "b3", 200.0, 150.0, 10.0, 1.0)};  // injects 150 of 300
    const CoalitionTable table = plr_table(network, fleet);
    CHECK(table.values[1] > 0.0);
}

TEST_CASE("parallel table construction matches the serial reference bitwise") {
    const NetworkModel network = testutil::chain_feeder(4);
    const FleetConfig fleet = testutil::chain_fleet(4, 0.0);
    const CoalitionTable serial = plr_table(network, fleet, Exec::serial);
    const CoalitionTable parallel = plr_table(network, fleet, Exec::parallel);
    CHECK(serial.values == parallel.values);
}

TEST_CASE("oversized injections can make loss reduction negative") {
    NetworkModel network = testutil::chain_feeder(1, 50.0, 0.0);
    network.der_sites[1] = "b3";
    FleetConfig fleet;
    fleet.alpha_c = 0.5;
    fleet.ders = {testutil::der(1, "b3", 3000.0, 2500.0, 10.0, 1.0)};  // massive reverse flow
    const CoalitionTable table = plr_table(network, fleet);
    CHECK(table.values[1] < 0.0);
    CHECK_NOTHROW(table.validate());
}

TEST_CASE("a diverging coalition names itself") {
    NetworkModel network = two_bus(1.0, 0.5, 100.0, 0.0, 1000.0);
    network.der_sites[1] = "load";
    FleetConfig fleet;
    fleet.alpha_c = 0.5;
    // the "injection" is so large the reverse flow collapses the feeder
    fleet.ders = {testutil::der(1, "load", 9000.0, 8000.0, 10.0, 1.0)};
    CHECK_THROWS_WITH_AS(plr_table(network, fleet), doctest::Contains("coalition {1}"),
                         PowerFlowError);
}

TEST_CASE("missing DER site is caught up front") {
    const NetworkModel network = testutil::chain_feeder(2);
    const FleetConfig fleet = testutil::chain_fleet(3, 0.0);  // DER 3 has no site
    CHECK_THROWS_WITH_AS(plr_table(network, fleet), doctest::Contains("DER 3"),
                         ValidationError);
}

TEST_CASE("loss reduction golden values for the bundled chain feeder") {
    // regression pins computed with the serial reference at first
    // integration; the two-bus closed form above is the independent anchor
    const NetworkModel network = testutil::chain_feeder(2);
    const FleetConfig fleet = testutil::chain_fleet(2, 0.0);
    const CoalitionTable table = plr_table(network, fleet);
    CHECK(table.values[1] == doctest::Approx(1.0995665235189822).epsilon(1e-9));
    CHECK(table.values[2] == doctest::Approx(2.3453295532831820).epsilon(1e-9));
    CHECK(table.values[3] == doctest::Approx(3.3929893275504740).epsilon(1e-9));
}

}  // TEST_SUITE
