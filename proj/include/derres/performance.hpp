/**
 * \file derres/performance.hpp
 *
 * \brief Performance index of a DER, computed as the R-squared score of its
 *        committed-vs-supplied delivery history.
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

#ifndef DERRES_PERFORMANCE_HPP
#define DERRES_PERFORMANCE_HPP

#include <cstddef>
#include <span>

#include "derres/types.hpp"

namespace derres {

/// One delivery-history sample of a DER.
struct HistoryRecord {
    int der_id = 0;
    double committed_kw = 0.0;
    double supplied_kw = 0.0;
};

/// Full breakdown of one performance-index evaluation.
struct PiStats {
    std::size_t count = 0;
    double ess = 0.0;     ///< sum of squared committed-supplied errors
    double tss = 0.0;     ///< sum of squared committed deviations from the mean
    double raw_r2 = 0.0;  ///< 1 - ess/tss, before clamping
    double pi = 0.0;      ///< max(0, raw_r2)
    bool clamped = false;
};

/// Computes PI = max(0, 1 - ESS/TSS) over the records of one DER. All
/// records must carry the given der_id. Errors: empty history, negative or
/// non-finite powers, or all committed values identical (TSS = 0, R-squared
/// undefined); each names the DER.
PiStats compute_pi_stats(int der_id, std::span<const HistoryRecord> records);

/// Convenience wrapper returning only the clamped index.
double compute_pi(int der_id, std::span<const HistoryRecord> records);

}  // namespace derres

#endif  // DERRES_PERFORMANCE_HPP
