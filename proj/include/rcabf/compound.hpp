// SPDX-License-Identifier: Apache-2.0
//
// Combining per-transmission volumes into an envelope volume:
//   DAS      |sum_k V_k|
//   FMAS     |sum_{i<j} sqrt*(V_i V_j)|            over all transmission pairs
//   RC-FMAS  |sum_{i in rows, j in cols} sqrt*(V_i V_j)|
// where sqrt* is the signed geometric mean of the pair.

#pragma once

#include <complex>
#include <span>
#include <string_view>
#include <vector>

#include "rcabf/beamform.hpp"
#include "rcabf/volume.hpp"

namespace rcabf {

enum class Method { DAS, FMAS, RCFMAS };

const char* to_string(Method m);
Method method_from_string(std::string_view name);

enum class PairMode {
    RealRf,          // real parts only: sign(v_i v_j) sqrt(|v_i v_j|)
    ComplexBaseband  // principal square root of v_i v_j, arg in (-pi, pi]
};

struct EnvelopeVolume {
    Volume<double> values;
    Method method = Method::DAS;
    // Pair products accumulated per voxel (zero for DAS). Counted while
    // compounding, not derived from the closed form.
    std::size_t pairs_per_voxel = 0;
};

std::size_t pair_count_fmas(std::size_t n_tx);
std::size_t pair_count_rcfmas(std::size_t n_row_tx, std::size_t n_col_tx);

std::complex<double> signed_sqrt_pair(std::complex<double> vi, std::complex<double> vj,
                                      PairMode mode);

EnvelopeVolume coherent_compound(std::span<const PerTxVolume> volumes, unsigned workers = 0);
EnvelopeVolume fmas(std::span<const PerTxVolume> volumes, PairMode mode, unsigned workers = 0);
EnvelopeVolume rc_fmas(std::span<const PerTxVolume> row_volumes,
                       std::span<const PerTxVolume> col_volumes, PairMode mode,
                       unsigned workers = 0);

/// Splits a schedule-ordered volume list by transmit orientation and runs rc_fmas.
EnvelopeVolume rc_fmas(std::span<const PerTxVolume> volumes, PairMode mode, unsigned workers = 0);

/// 20 log10(v / max), floored at -dynamic_range_db.
Volume<double> log_compress(const EnvelopeVolume& env, double dynamic_range_db);

}  // namespace rcabf
