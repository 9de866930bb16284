#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "harlog/common.hpp"
#include "harlog/tree.hpp"

namespace harlog {

class MissingAntenna : public DomainError {
public:
    explicit MissingAntenna(std::size_t antenna)
        : DomainError("sample has no block for antenna " + std::to_string(antenna)) {}
};

class StratifyError : public DomainError {
public:
    explicit StratifyError(const std::string& msg) : DomainError(msg) {}
};

inline constexpr std::size_t kBlockDim = 4;  // mu1, mu2, var1, var2

using LatentBlock = std::array<double, kBlockDim>;

struct LatentSample {
    std::int64_t sample_id = 0;
    std::size_t label = 0;  // activity index
    std::vector<LatentBlock> blocks;  // one per antenna, or a single fused block
};

struct Dataset {
    std::size_t antennas = 4;  // blocks per sample, 1 or 4
    std::vector<LatentSample> samples;
};

enum class FusionMode {
    NoFused1,
    NoFused2,
    NoFused3,
    NoFused4,
    EarlyFusing,
    DelayedFusing,
};

inline constexpr std::array<const char*, 6> kFusionModeNames = {
    "no_fused_1", "no_fused_2", "no_fused_3", "no_fused_4", "early", "delayed",
};

inline std::optional<FusionMode> fusion_mode_from_name(const std::string& name) {
    for (std::size_t i = 0; i < kFusionModeNames.size(); ++i)
        if (name == kFusionModeNames[i]) return static_cast<FusionMode>(i);
    return std::nullopt;
}

inline const char* fusion_mode_name(FusionMode mode) {
    return kFusionModeNames[static_cast<std::size_t>(mode)];
}

inline std::size_t feature_dim(FusionMode mode) {
    return mode == FusionMode::DelayedFusing ? 4 * kBlockDim : kBlockDim;
}

// Antennas required in a sample for the mode to apply.
inline std::size_t required_blocks(FusionMode mode) {
    switch (mode) {
        case FusionMode::NoFused1: return 1;
        case FusionMode::NoFused2: return 2;
        case FusionMode::NoFused3: return 3;
        case FusionMode::NoFused4: return 4;
        case FusionMode::EarlyFusing: return 1;
        case FusionMode::DelayedFusing: return 4;
    }
    return 1;
}

// no_fused_x: antenna x's block verbatim; early: the single joint-encoder
// block; delayed: 16-value concatenation in antenna order, each block
// ordered (mu1, mu2, var1, var2).
inline std::vector<double> fuse(const LatentSample& sample, FusionMode mode) {
    if (sample.blocks.size() < required_blocks(mode)) throw MissingAntenna(required_blocks(mode));
    std::vector<double> out;
    switch (mode) {
        case FusionMode::DelayedFusing:
            out.reserve(4 * kBlockDim);
            for (std::size_t a = 0; a < 4; ++a)
                out.insert(out.end(), sample.blocks[a].begin(), sample.blocks[a].end());
            break;
        case FusionMode::EarlyFusing:
            out.assign(sample.blocks[0].begin(), sample.blocks[0].end());
            break;
        default: {
            std::size_t a = static_cast<std::size_t>(mode);  // NoFused1..4 are 0..3
            out.assign(sample.blocks[a].begin(), sample.blocks[a].end());
            break;
        }
    }
    return out;
}

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    bool stratified = true;
};

// Disjoint, exhaustive, per-class proportions within one sample of the
// requested fraction, deterministic given the seed.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split(const Dataset& data,
                                                                           const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw DomainError("train_fraction must be in (0,1)");
    Rng rng(spec.seed);
    std::vector<std::size_t> train, test;
    if (spec.stratified) {
        std::array<std::vector<std::size_t>, kNumActivities> per_class;
        for (std::size_t i = 0; i < data.samples.size(); ++i) per_class[data.samples[i].label].push_back(i);
        for (std::size_t c = 0; c < kNumActivities; ++c) {
            auto& idx = per_class[c];
            if (idx.empty()) continue;
            if (idx.size() < 5)
                throw StratifyError("class '" + std::string(kActivityNames[c]) + "' has " +
                                    std::to_string(idx.size()) + " samples; need at least 5 to stratify");
            std::shuffle(idx.begin(), idx.end(), rng);
            auto n_train = static_cast<std::size_t>(
                std::llround(spec.train_fraction * static_cast<double>(idx.size())));
            n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
            train.insert(train.end(), idx.begin(), idx.begin() + n_train);
            test.insert(test.end(), idx.begin() + n_train, idx.end());
        }
    } else {
        std::vector<std::size_t> idx(data.samples.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        auto n_train =
            static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(idx.size())));
        n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
        train.assign(idx.begin(), idx.begin() + n_train);
        test.assign(idx.begin() + n_train, idx.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {train, test};
}

// Relative informativeness of each antenna in the synthetic generator; the
// spread mirrors the single-antenna accuracy spread seen on real hardware.
inline constexpr std::array<double, 4> kAntennaScale = {0.25, 0.40, 0.30, 0.55};
// A joint encoder over all antennas separates classes better than any single
// antenna but worse than keeping the per-antenna blocks apart.
inline constexpr double kEarlyFusingScale = 0.75;

// Synthetic stand-in for the upstream encoders: per activity and antenna
// block a fixed random centroid scaled by `separation`, unit-scale Gaussian
// samples around it, variance components emitted through exp so they stay
// positive. Fully determined by the seed.
inline Dataset synth_latent(std::size_t n_per_class, FusionMode mode, double separation, std::uint64_t seed) {
    if (separation < 0.0) throw DomainError("separation must be >= 0");
    Rng rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);

    const bool single_block = (mode == FusionMode::EarlyFusing);
    const std::size_t n_blocks = single_block ? 1 : 4;

    // class centroids first, so sample count does not change them
    std::array<std::vector<LatentBlock>, kNumActivities> centroids;
    for (std::size_t c = 0; c < kNumActivities; ++c) {
        centroids[c].resize(n_blocks);
        for (std::size_t a = 0; a < n_blocks; ++a) {
            double scale = separation * (single_block ? kEarlyFusingScale : kAntennaScale[a]);
            for (std::size_t j = 0; j < kBlockDim; ++j) centroids[c][a][j] = scale * unit(rng);
        }
    }

    Dataset data;
    data.antennas = n_blocks;
    std::int64_t next_id = 0;
    for (std::size_t c = 0; c < kNumActivities; ++c) {
        for (std::size_t i = 0; i < n_per_class; ++i) {
            LatentSample s;
            s.sample_id = next_id++;
            s.label = c;
            s.blocks.resize(n_blocks);
            for (std::size_t a = 0; a < n_blocks; ++a) {
                for (std::size_t j = 0; j < kBlockDim; ++j) {
                    double g = centroids[c][a][j] + unit(rng);
                    s.blocks[a][j] = (j < 2) ? g : std::exp(g);
                }
            }
            data.samples.push_back(std::move(s));
        }
    }
    return data;
}

// -- CSV ---------------------------------------------------------------------
// sample_id,label,a1_mu1,a1_mu2,a1_var1,a1_var2,...,a4_var2
// (single-block datasets carry only the a1_* columns)

inline std::string latent_csv_header(std::size_t antennas) {
    static constexpr std::array<const char*, kBlockDim> comp = {"mu1", "mu2", "var1", "var2"};
    std::string h = "sample_id,label";
    for (std::size_t a = 0; a < antennas; ++a)
        for (auto* c : comp) h += ",a" + std::to_string(a + 1) + "_" + c;
    return h;
}

inline std::string latent_to_csv(const Dataset& data) {
    std::string out = latent_csv_header(data.antennas);
    out += '\n';
    for (const auto& s : data.samples) {
        out += std::to_string(s.sample_id);
        out += ',';
        out += kActivityNames[s.label];
        for (const auto& block : s.blocks)
            for (double v : block) {
                out += ',';
                out += num_str(v);
            }
        out += '\n';
    }
    return out;
}

inline Dataset load_latent_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open latent file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty file");
    Dataset data;
    if (line == latent_csv_header(4)) {
        data.antennas = 4;
    } else if (line == latent_csv_header(1)) {
        data.antennas = 1;
    } else {
        throw ValidationError(path.string() + ": unrecognized header");
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        auto where = [&] { return path.string() + ":" + std::to_string(lineno); };
        if (fields.size() != 2 + data.antennas * kBlockDim)
            throw ValidationError(where() + ": expected " + std::to_string(2 + data.antennas * kBlockDim) +
                                  " fields, got " + std::to_string(fields.size()));
        LatentSample s;
        auto label = activity_index(fields[1]);
        if (!label) throw ValidationError(where() + ": unknown activity '" + fields[1] + "'");
        s.label = *label;
        try {
            s.sample_id = std::stoll(fields[0]);
            s.blocks.resize(data.antennas);
            for (std::size_t a = 0; a < data.antennas; ++a)
                for (std::size_t j = 0; j < kBlockDim; ++j)
                    s.blocks[a][j] = std::stod(fields[2 + a * kBlockDim + j]);
        } catch (const std::exception&) {
            throw ValidationError(where() + ": malformed number");
        }
        for (const auto& block : s.blocks) {
            for (std::size_t j = 0; j < kBlockDim; ++j) {
                if (!std::isfinite(block[j])) throw ValidationError(where() + ": non-finite value");
                if (j >= 2 && block[j] <= 0.0)
                    throw ValidationError(where() + ": variance component must be positive");
            }
        }
        data.samples.push_back(std::move(s));
    }
    return data;
}

// -- per-feature standardization ----------------------------------------------

struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stdev;

    static Standardizer fit(std::span<const std::vector<double>> rows) {
        if (rows.empty()) throw DomainError("standardizer: no rows");
        std::size_t dim = rows[0].size();
        Standardizer z;
        z.mean.assign(dim, 0.0);
        z.stdev.assign(dim, 0.0);
        for (const auto& r : rows)
            for (std::size_t j = 0; j < dim; ++j) z.mean[j] += r[j];
        for (auto& m : z.mean) m /= static_cast<double>(rows.size());
        for (const auto& r : rows)
            for (std::size_t j = 0; j < dim; ++j) {
                double d = r[j] - z.mean[j];
                z.stdev[j] += d * d;
            }
        for (auto& s : z.stdev) {
            s = std::sqrt(s / static_cast<double>(rows.size()));
            if (s < 1e-12) s = 1.0;  // constant feature stays constant
        }
        return z;
    }

    std::vector<double> apply(std::span<const double> row) const {
        std::vector<double> out(row.size());
        for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / stdev[j];
        return out;
    }
};

}  // namespace harlog
