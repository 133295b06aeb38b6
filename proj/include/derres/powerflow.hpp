/**
 * \file derres/powerflow.hpp
 *
 * \brief Backward/forward-sweep power flow on radial feeders and the
 *        power-loss-reduction characteristic function built from it.
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

#ifndef DERRES_POWERFLOW_HPP
#define DERRES_POWERFLOW_HPP

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "derres/game.hpp"
#include "derres/types.hpp"

namespace derres {

struct Bus {
    std::string id;
    double load_p_kw = 0.0;
    double load_q_kvar = 0.0;
};

struct Branch {
    std::string from;
    std::string to;
    double r_ohm = 0.0;
    double x_ohm = 0.0;
};

/// Single-phase positive-sequence model of a radial feeder. The branch
/// graph must be a spanning tree rooted at the slack bus. DERs are modeled
/// as constant-P, unity-power-factor injections at their site bus.
struct NetworkModel {
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::string slack_bus;
    double slack_v = 0.0;  ///< slack voltage magnitude, volts
    double v_base = 0.0;   ///< per-unit voltage base, volts
    std::map<int, std::string> der_sites;  ///< DER id -> bus id
};

/// Structural checks: spanning tree rooted at the slack, known endpoints,
/// nonnegative resistance, finite reactance, positive bases, known DER
/// sites. Throws ValidationError.
void validate_network(const NetworkModel& network);

struct PowerFlowSolution {
    std::vector<std::complex<double>> v_pu;           ///< per bus, model order
    std::vector<std::complex<double>> branch_flow_kva; ///< sending (parent) end, model order
    double total_loss_kw = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Sweep convergence: max per-bus voltage change below this (per unit).
/// Tight enough that the kW power-balance residual of a converged solution
/// stays below 1e-6 kW on feeders up to the MW scale.
inline constexpr double sweep_tolerance_pu = 1e-12;
inline constexpr int sweep_max_iterations = 100;

/// Solves the feeder with the given DER active-power injections (kW).
/// Throws PowerFlowError when the sweep fails to converge within the
/// iteration cap or a bus voltage collapses.
PowerFlowSolution solve_power_flow(const NetworkModel& network,
                                   const std::map<int, double>& injections_kw);

/// Slack injection + DER injections - total load - losses, in kW. Should be
/// ~0 for a converged solution.
double power_balance_residual_kw(const NetworkModel& network,
                                 const std::map<int, double>& injections_kw,
                                 const PowerFlowSolution& solution);

/// Builds the PLR characteristic function: V(S) = loss(no DERs) - loss(DERs
/// of S each injecting its cleared capacity P_ei). One solve per nonempty
/// coalition; coalition solves are independent and may run in parallel.
/// A diverging coalition solve raises PowerFlowError naming the coalition.
CoalitionTable plr_table(const NetworkModel& network, const FleetConfig& fleet,
                         Exec exec = Exec::serial);

}  // namespace derres

#endif  // DERRES_POWERFLOW_HPP
