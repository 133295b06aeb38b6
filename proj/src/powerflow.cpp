/**
 * \file powerflow.cpp
 *
 * \brief Backward/forward sweep solver and PLR table construction.
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

#include "derres/powerflow.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <unordered_map>

namespace derres {

namespace {

using Complex = std::complex<double>;

// Tree view of the network: bus indices ordered root-first so one pass in
// reverse aggregates currents and one pass forward updates voltages.
struct Topology {
    int slack = -1;
    std::vector<int> order;          // BFS order, slack first
    std::vector<int> parent_bus;     // per bus, -1 for slack
    std::vector<int> parent_branch;  // per bus, -1 for slack
    std::vector<Complex> z_ohm;      // per branch
};

std::unordered_map<std::string, int> bus_index(const NetworkModel& network) {
    std::unordered_map<std::string, int> index;
    for (std::size_t i = 0; i < network.buses.size(); ++i) {
        if (!index.emplace(network.buses[i].id, static_cast<int>(i)).second) {
            throw ValidationError("duplicate bus id \"" + network.buses[i].id + "\"");
        }
    }
    return index;
}

Topology build_topology(const NetworkModel& network) {
    const auto index = bus_index(network);
    const std::size_t nbus = network.buses.size();
    if (nbus == 0) {
        throw ValidationError("network has no buses");
    }
    if (network.branches.size() != nbus - 1) {
        throw ValidationError("network is not a spanning tree: " +
                              std::to_string(network.branches.size()) + " branches for " +
                              std::to_string(nbus) + " buses");
    }
    const auto slack_it = index.find(network.slack_bus);
    if (slack_it == index.end()) {
        throw ValidationError("slack bus \"" + network.slack_bus + "\" is not in the bus list");
    }

    // undirected adjacency; orientation is fixed by the BFS from the slack
    std::vector<std::vector<std::pair<int, int>>> adjacency(nbus);  // (other bus, branch)
    Topology topo;
    topo.z_ohm.resize(network.branches.size());
    for (std::size_t b = 0; b < network.branches.size(); ++b) {
        const Branch& branch = network.branches[b];
        const auto from_it = index.find(branch.from);
        const auto to_it = index.find(branch.to);
        if (from_it == index.end() || to_it == index.end()) {
            throw ValidationError("branch \"" + branch.from + "\"-\"" + branch.to +
                                  "\" references an unknown bus");
        }
        if (from_it->second == to_it->second) {
            throw ValidationError("branch \"" + branch.from + "\"-\"" + branch.to +
                                  "\" is a self loop");
        }
        if (!std::isfinite(branch.r_ohm) || branch.r_ohm < 0.0 || !std::isfinite(branch.x_ohm)) {
            throw ValidationError("branch \"" + branch.from + "\"-\"" + branch.to +
                                  "\" has invalid impedance");
        }
        adjacency[from_it->second].emplace_back(to_it->second, static_cast<int>(b));
        adjacency[to_it->second].emplace_back(from_it->second, static_cast<int>(b));
        topo.z_ohm[b] = Complex(branch.r_ohm, branch.x_ohm);
    }

    topo.slack = slack_it->second;
    topo.parent_bus.assign(nbus, -1);
    topo.parent_branch.assign(nbus, -1);
    topo.order.reserve(nbus);
    topo.order.push_back(topo.slack);
    std::vector<bool> visited(nbus, false);
    visited[topo.slack] = true;
    for (std::size_t head = 0; head < topo.order.size(); ++head) {
        const int bus = topo.order[head];
        for (const auto& [next, branch] : adjacency[bus]) {
            if (branch == topo.parent_branch[bus]) {
                continue;
            }
            if (visited[next]) {
                throw ValidationError("network is not a tree: cycle through bus \"" +
                                      network.buses[next].id + "\"");
            }
            visited[next] = true;
            topo.parent_bus[next] = bus;
            topo.parent_branch[next] = branch;
            topo.order.push_back(next);
        }
    }
    if (topo.order.size() != nbus) {
        throw ValidationError("network is not connected to the slack bus");
    }
    return topo;
}

// Net constant-power draw per bus in VA (load minus DER injection).
std::vector<Complex> bus_power_va(const NetworkModel& network,
                                  const std::map<int, double>& injections_kw) {
    const auto index = bus_index(network);
    std::vector<Complex> power(network.buses.size());
    for (std::size_t i = 0; i < network.buses.size(); ++i) {
        const Bus& bus = network.buses[i];
        if (!std::isfinite(bus.load_p_kw) || !std::isfinite(bus.load_q_kvar)) {
            throw ValidationError("bus \"" + bus.id + "\" has a non-finite load");
        }
        power[i] = Complex(bus.load_p_kw, bus.load_q_kvar) * 1e3;
    }
    for (const auto& [der_id, kw] : injections_kw) {
        const auto site = network.der_sites.find(der_id);
        if (site == network.der_sites.end()) {
            throw ValidationError("DER " + std::to_string(der_id) + " has no site bus");
        }
        power[index.at(site->second)] -= Complex(kw * 1e3, 0.0);
    }
    return power;
}

}  // namespace

void validate_network(const NetworkModel& network) {
    if (!(network.v_base > 0.0) || !std::isfinite(network.v_base)) {
        throw ValidationError("v_base must be positive and finite");
    }
    if (!(network.slack_v > 0.0) || !std::isfinite(network.slack_v)) {
        throw ValidationError("slack voltage must be positive and finite");
    }
    const auto index = bus_index(network);
    for (const auto& [der_id, bus] : network.der_sites) {
        if (der_id < 1) {
            throw ValidationError("DER site id " + std::to_string(der_id) + " must be >= 1");
        }
        if (index.find(bus) == index.end()) {
            throw ValidationError("DER " + std::to_string(der_id) + " site bus \"" + bus +
                                  "\" is not in the bus list");
        }
    }
    build_topology(network);
}

PowerFlowSolution solve_power_flow(const NetworkModel& network,
                                   const std::map<int, double>& injections_kw) {
    if (!(network.v_base > 0.0)) {
        throw ValidationError("v_base must be positive");
    }
    const Topology topo = build_topology(network);
    const std::vector<Complex> power = bus_power_va(network, injections_kw);
    const std::size_t nbus = network.buses.size();
    const std::size_t nbranch = network.branches.size();

    std::vector<Complex> v(nbus, Complex(network.slack_v, 0.0));
    std::vector<Complex> branch_current(nbranch);

    PowerFlowSolution solution;
    for (int iter = 1; iter <= sweep_max_iterations; ++iter) {
        // backward: aggregate currents from the leaves toward the slack
        std::fill(branch_current.begin(), branch_current.end(), Complex(0.0, 0.0));
        for (std::size_t k = nbus; k-- > 1;) {
            const int bus = topo.order[k];
            if (std::abs(v[bus]) < 1e-6 * network.v_base) {
                throw PowerFlowError("voltage collapse at bus \"" + network.buses[bus].id +
                                     "\" (iteration " + std::to_string(iter) + ")");
            }
            const Complex draw =
                power[bus] == Complex(0.0, 0.0) ? Complex(0.0, 0.0) : std::conj(power[bus] / v[bus]);
            branch_current[topo.parent_branch[bus]] += draw;
        }
        // fold child-branch currents upward; reverse BFS order guarantees a
        // subtree is complete before its root branch is folded
        for (std::size_t k = nbus; k-- > 1;) {
            const int bus = topo.order[k];
            const int parent = topo.parent_bus[bus];
            if (parent != topo.slack) {
                branch_current[topo.parent_branch[parent]] += branch_current[topo.parent_branch[bus]];
            }
        }

        // forward: update voltages from the slack outward
        double max_dv_pu = 0.0;
        for (std::size_t k = 1; k < nbus; ++k) {
            const int bus = topo.order[k];
            const Complex updated =
                v[topo.parent_bus[bus]] - topo.z_ohm[topo.parent_branch[bus]] * branch_current[topo.parent_branch[bus]];
            max_dv_pu = std::max(max_dv_pu, std::abs(updated - v[bus]) / network.v_base);
            v[bus] = updated;
        }

        solution.iterations = iter;
        if (max_dv_pu < sweep_tolerance_pu) {
            solution.converged = true;
            break;
        }
    }
    if (!solution.converged) {
        throw PowerFlowError("power flow did not converge within " +
                             std::to_string(sweep_max_iterations) + " iterations");
    }

    solution.v_pu.resize(nbus);
    for (std::size_t i = 0; i < nbus; ++i) {
        solution.v_pu[i] = v[i] / network.v_base;
    }
    solution.branch_flow_kva.resize(nbranch);
    solution.total_loss_kw = 0.0;
    for (std::size_t k = 1; k < nbus; ++k) {
        const int bus = topo.order[k];
        const int branch = topo.parent_branch[bus];
        const Complex current = branch_current[branch];
        solution.branch_flow_kva[branch] =
            v[topo.parent_bus[bus]] * std::conj(current) / 1e3;
        solution.total_loss_kw +=
            std::norm(current) * network.branches[branch].r_ohm / 1e3;
    }
    return solution;
}

double power_balance_residual_kw(const NetworkModel& network,
                                 const std::map<int, double>& injections_kw,
                                 const PowerFlowSolution& solution) {
    const Topology topo = build_topology(network);
    double slack_kw = 0.0;
    for (std::size_t k = 1; k < network.buses.size(); ++k) {
        const int bus = topo.order[k];
        if (topo.parent_bus[bus] == topo.slack) {
            slack_kw += solution.branch_flow_kva[topo.parent_branch[bus]].real();
        }
    }
    double load_kw = 0.0;
    for (const Bus& bus : network.buses) {
        load_kw += bus.load_p_kw;
    }
    double injection_kw = 0.0;
    for (const auto& [der_id, kw] : injections_kw) {
        (void)der_id;
        injection_kw += kw;
    }
    return slack_kw + injection_kw - load_kw - solution.total_loss_kw;
}

CoalitionTable plr_table(const NetworkModel& network, const FleetConfig& fleet, Exec exec) {
    validate_network(network);
    for (const DerParams& der : fleet.ders) {
        if (network.der_sites.find(der.id) == network.der_sites.end()) {
            throw ValidationError("DER " + std::to_string(der.id) +
                                  " has no site bus in the network model");
        }
    }

    const double base_loss = solve_power_flow(network, {}).total_loss_kw;

    CoalitionTable table = CoalitionTable::zeros(fleet.size());
    const std::int64_t count = static_cast<std::int64_t>(table.coalition_count());
    std::vector<std::string> failures(table.coalition_count());

    const bool parallel = exec == Exec::parallel;
#pragma omp parallel for if (parallel) schedule(dynamic)
    for (std::int64_t mask = 1; mask < count; ++mask) {
        std::map<int, double> injections;
        for (const DerParams& der : fleet.ders) {
            if (mask & (std::int64_t{1} << (der.id - 1))) {
                injections[der.id] = der.p_e_kw;
            }
        }
        try {
            table.values[mask] =
                base_loss - solve_power_flow(network, injections).total_loss_kw;
        } catch (const std::exception& e) {
            failures[mask] = e.what();
        }
    }

    for (std::int64_t mask = 1; mask < count; ++mask) {
        if (!failures[mask].empty()) {
            throw PowerFlowError("coalition {" +
                                 coalition_key(static_cast<CoalitionMask>(mask)) +
                                 "}: " + failures[mask]);
        }
    }
    return table;
}

}  // namespace derres
