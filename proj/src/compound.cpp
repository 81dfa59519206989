// SPDX-License-Identifier: Apache-2.0

#include "rcabf/compound.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rcabf/parallel.hpp"

namespace rcabf {

const char* to_string(Method m)
{
    switch (m) {
    case Method::DAS:
        return "das";
    case Method::FMAS:
        return "fmas";
    case Method::RCFMAS:
        return "rcfmas";
    }
    return "unknown";
}

Method method_from_string(std::string_view name)
{
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    std::erase(lower, '-');
    if (lower == "das")
        return Method::DAS;
    if (lower == "fmas")
        return Method::FMAS;
    if (lower == "rcfmas")
        return Method::RCFMAS;
    throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

std::size_t pair_count_fmas(std::size_t n_tx)
{
    if (n_tx < 2)
        throw std::invalid_argument("FMAS needs at least two transmissions");
    return n_tx * (n_tx - 1) / 2;
}

std::size_t pair_count_rcfmas(std::size_t n_row_tx, std::size_t n_col_tx)
{
    if (n_row_tx < 1 || n_col_tx < 1)
        throw std::invalid_argument("RC-FMAS needs at least one row and one column transmission");
    return n_row_tx * n_col_tx;
}

std::complex<double> signed_sqrt_pair(std::complex<double> vi, std::complex<double> vj,
                                      PairMode mode)
{
    if (mode == PairMode::RealRf) {
        const double p = vi.real() * vj.real();
        if (p == 0.0)
            return {};
        return {std::copysign(std::sqrt(std::abs(p)), p), 0.0};
    }
    const std::complex<double> z = vi * vj;
    if (z == std::complex<double>{})
        return {};
    std::complex<double> s = std::sqrt(z);
    // std::sqrt puts -|z| - 0i on -i; the principal half-angle puts it on +i.
    if (s.real() == 0.0 && s.imag() < 0.0)
        s = -s;
    return s;
}

namespace {

const VoxelGrid& common_grid(std::span<const PerTxVolume> a, std::span<const PerTxVolume> b = {})
{
    const VoxelGrid& g = a.empty() ? b.front().values.grid() : a.front().values.grid();
    for (auto list : {a, b})
        for (const auto& v : list)
            if (!(v.values.grid() == g))
                throw std::invalid_argument("per-transmission volumes live on different grids");
    return g;
}

using VolumeRefs = std::vector<const Volume<std::complex<double>>*>;

VolumeRefs refs(std::span<const PerTxVolume> volumes)
{
    VolumeRefs out;
    for (const auto& v : volumes)
        out.push_back(&v.values);
    return out;
}

// Gathers voxel i of every volume into `out`.
void gather(const VolumeRefs& volumes, std::size_t i, std::vector<std::complex<double>>& out)
{
    out.resize(volumes.size());
    for (std::size_t k = 0; k < volumes.size(); ++k)
        out[k] = (*volumes[k])[i];
}

EnvelopeVolume rc_fmas_impl(const VolumeRefs& row_volumes, const VolumeRefs& col_volumes,
                            PairMode mode, unsigned workers);

constexpr std::size_t kBlock = 4096;

}  // namespace

EnvelopeVolume coherent_compound(std::span<const PerTxVolume> volumes, unsigned workers)
{
    if (volumes.empty())
        throw std::invalid_argument("coherent compounding needs at least one volume");
    const VoxelGrid& grid = common_grid(volumes);
    EnvelopeVolume env{Volume<double>(grid), Method::DAS, 0};
    const std::size_t n = grid.size();
    parallel_for((n + kBlock - 1) / kBlock, workers, [&](std::size_t block) {
        const std::size_t end = std::min(n, (block + 1) * kBlock);
        for (std::size_t i = block * kBlock; i < end; ++i) {
            std::complex<double> acc{};
            for (const auto& v : volumes)
                acc += v.values[i];
            env.values[i] = std::abs(acc);
        }
    });
    return env;
}

EnvelopeVolume fmas(std::span<const PerTxVolume> volumes, PairMode mode, unsigned workers)
{
    if (volumes.size() < 2)
        throw std::invalid_argument("FMAS needs at least two volumes");
    const VoxelGrid& grid = common_grid(volumes);
    const VolumeRefs vols = refs(volumes);
    EnvelopeVolume env{Volume<double>(grid), Method::FMAS, 0};
    const std::size_t n = grid.size();
    const std::size_t n_blocks = (n + kBlock - 1) / kBlock;
    std::vector<std::size_t> pairs(n_blocks, 0);

    parallel_for(n_blocks, workers, [&](std::size_t block) {
        std::vector<std::complex<double>> v;
        std::size_t counted = 0;
        const std::size_t end = std::min(n, (block + 1) * kBlock);
        for (std::size_t i = block * kBlock; i < end; ++i) {
            gather(vols, i, v);
            std::complex<double> acc{};
            for (std::size_t a = 0; a + 1 < v.size(); ++a)
                for (std::size_t b = a + 1; b < v.size(); ++b) {
                    acc += signed_sqrt_pair(v[a], v[b], mode);
                    ++counted;
                }
            env.values[i] = std::abs(acc);
        }
        pairs[block] = counted;
    });

    std::size_t total = 0;
    for (auto p : pairs)
        total += p;
    env.pairs_per_voxel = total / n;
    return env;
}

EnvelopeVolume rc_fmas(std::span<const PerTxVolume> row_volumes,
                       std::span<const PerTxVolume> col_volumes, PairMode mode, unsigned workers)
{
    if (row_volumes.empty() || col_volumes.empty())
        throw std::invalid_argument("RC-FMAS needs at least one row and one column volume");
    common_grid(row_volumes, col_volumes);
    return rc_fmas_impl(refs(row_volumes), refs(col_volumes), mode, workers);
}

namespace {

EnvelopeVolume rc_fmas_impl(const VolumeRefs& row_volumes, const VolumeRefs& col_volumes,
                            PairMode mode, unsigned workers)
{
    const VoxelGrid& grid = row_volumes.front()->grid();
    EnvelopeVolume env{Volume<double>(grid), Method::RCFMAS, 0};
    const std::size_t n = grid.size();
    const std::size_t n_blocks = (n + kBlock - 1) / kBlock;
    std::vector<std::size_t> pairs(n_blocks, 0);

    parallel_for(n_blocks, workers, [&](std::size_t block) {
        std::vector<std::complex<double>> rows;
        std::vector<std::complex<double>> cols;
        std::size_t counted = 0;
        const std::size_t end = std::min(n, (block + 1) * kBlock);
        for (std::size_t i = block * kBlock; i < end; ++i) {
            gather(row_volumes, i, rows);
            gather(col_volumes, i, cols);
            std::complex<double> acc{};
            for (const auto& r : rows)
                for (const auto& c : cols) {
                    acc += signed_sqrt_pair(r, c, mode);
                    ++counted;
                }
            env.values[i] = std::abs(acc);
        }
        pairs[block] = counted;
    });

    std::size_t total = 0;
    for (auto p : pairs)
        total += p;
    env.pairs_per_voxel = total / n;
    return env;
}

}  // namespace

EnvelopeVolume rc_fmas(std::span<const PerTxVolume> volumes, PairMode mode, unsigned workers)
{
    common_grid(volumes);
    VolumeRefs rows;
    VolumeRefs cols;
    for (const auto& v : volumes)
        (v.event.orientation == Orientation::RowTx ? rows : cols).push_back(&v.values);
    if (rows.empty() || cols.empty())
        throw std::invalid_argument("RC-FMAS needs at least one row and one column volume");
    return rc_fmas_impl(rows, cols, mode, workers);
}

Volume<double> log_compress(const EnvelopeVolume& env, double dynamic_range_db)
{
    if (!(dynamic_range_db > 0.0))
        throw std::invalid_argument("dynamic range must be positive");
    const auto values = env.values.data();
    double peak = 0.0;
    for (double v : values)
        peak = std::max(peak, v);
    if (!(peak > 0.0))
        throw std::invalid_argument("cannot log-compress an all-zero volume");
    Volume<double> out(env.values.grid());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double db = values[i] > 0.0 ? 20.0 * std::log10(values[i] / peak) : -dynamic_range_db;
        out[i] = std::max(db, -dynamic_range_db);
    }
    return out;
}

}  // namespace rcabf
