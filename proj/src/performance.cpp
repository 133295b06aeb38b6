/**
 * \file performance.cpp
 *
 * \brief R-squared performance index.
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

#include "derres/performance.hpp"

#include <algorithm>
#include <cmath>

namespace derres {

PiStats compute_pi_stats(int der_id, std::span<const HistoryRecord> records) {
    const std::string who = "DER " + std::to_string(der_id);
    if (records.empty()) {
        throw ValidationError(who + ": empty delivery history");
    }

    bool all_committed_equal = true;
    double committed_sum = 0.0;
    for (const HistoryRecord& rec : records) {
        if (rec.der_id != der_id) {
            throw ValidationError(who + ": history record belongs to DER " +
                                  std::to_string(rec.der_id));
        }
        if (!std::isfinite(rec.committed_kw) || rec.committed_kw < 0.0) {
            throw ValidationError(who + ": committed_kw must be finite and >= 0");
        }
        if (!std::isfinite(rec.supplied_kw) || rec.supplied_kw < 0.0) {
            throw ValidationError(who + ": supplied_kw must be finite and >= 0");
        }
        all_committed_equal &= rec.committed_kw == records.front().committed_kw;
        committed_sum += rec.committed_kw;
    }
    if (all_committed_equal) {
        throw ValidationError(who + ": all committed values identical, R-squared undefined");
    }

    const double mean = committed_sum / static_cast<double>(records.size());
    PiStats stats;
    stats.count = records.size();
    for (const HistoryRecord& rec : records) {
        const double err = rec.committed_kw - rec.supplied_kw;
        const double dev = rec.committed_kw - mean;
        stats.ess += err * err;
        stats.tss += dev * dev;
    }
    if (stats.tss <= 0.0) {
        throw ValidationError(who + ": zero total sum of squares, R-squared undefined");
    }
    stats.raw_r2 = 1.0 - stats.ess / stats.tss;
    stats.clamped = stats.raw_r2 < 0.0;
    stats.pi = std::max(0.0, stats.raw_r2);
    return stats;
}

double compute_pi(int der_id, std::span<const HistoryRecord> records) {
    return compute_pi_stats(der_id, records).pi;
}

}  // namespace derres
