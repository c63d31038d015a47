/*
 * Copyright (c) the dnshh authors.
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
#include "dnshh/hll_sketch.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "dnshh/errors.hpp"
#include "dnshh/hash.hpp"

namespace dnshh {

namespace {

double alpha_for(std::size_t m) {
    switch (m) {
        case 16: return 0.673;
        case 32: return 0.697;
        case 64: return 0.709;
        default: return 0.7213 / (1.0 + 1.079 / static_cast<double>(m));
    }
}

} // namespace

HllSketch::HllSketch(int precision_bits, uint64_t hash_seed)
    : precision_(precision_bits), seed_(hash_seed) {
    if (precision_bits < kMinPrecision || precision_bits > kMaxPrecision) {
        throw ConfigError("hll precision must be in [" + std::to_string(kMinPrecision) +
                          ", " + std::to_string(kMaxPrecision) + "], got " +
                          std::to_string(precision_bits));
    }
    regs_.assign(std::size_t(1) << precision_, 0);
    recompute_stats();
}

void HllSketch::bump_register(uint32_t index, uint8_t rank) {
    uint8_t& reg = regs_[index];
    if (rank <= reg)
        return;
    rank_sum_ -= static_cast<unsigned __int128>(1) << (max_rank() - reg);
    rank_sum_ += static_cast<unsigned __int128>(1) << (max_rank() - rank);
    if (reg == 0)
        --zero_regs_;
    reg = rank;
}

void HllSketch::add(std::string_view item) {
    const uint64_t h = hash64(item, seed_);
    const auto index = static_cast<uint32_t>(h >> (64 - precision_));
    const uint64_t rest = h << precision_;
    const uint8_t rank =
        rest != 0 ? static_cast<uint8_t>(std::countl_zero(rest) + 1)
                  : static_cast<uint8_t>(max_rank());
    bump_register(index, rank);
}

double HllSketch::estimate() const {
    const auto m = static_cast<double>(regs_.size());
    // Linear counting is the better estimator while empty registers remain
    // plentiful; the raw harmonic mean takes over once the linear-counting
    // estimate passes 3m, past the range where the uncorrected raw
    // estimator is biased high.
    if (zero_regs_ > 0) {
        const double linear = m * std::log(m / static_cast<double>(zero_regs_));
        if (linear <= 3.0 * m)
            return linear;
    }
    // rank_sum_ / 2^max_rank == sum of 2^-reg[i]
    const double inv_sum = std::ldexp(static_cast<double>(rank_sum_), -max_rank());
    return alpha_for(regs_.size()) * m * m / inv_sum;
}

void HllSketch::merge(const HllSketch& other) {
    if (other.precision_ != precision_ || other.seed_ != seed_) {
        throw IncompatibleError("cannot merge sketches with different precision or hash seed");
    }
    for (std::size_t i = 0; i < regs_.size(); ++i) {
        if (other.regs_[i] > regs_[i])
            regs_[i] = other.regs_[i];
    }
    recompute_stats();
}

void HllSketch::recompute_stats() {
    rank_sum_ = 0;
    zero_regs_ = 0;
    for (uint8_t reg : regs_) {
        rank_sum_ += static_cast<unsigned __int128>(1) << (max_rank() - reg);
        if (reg == 0)
            ++zero_regs_;
    }
}

void HllSketch::serialize_to(std::vector<uint8_t>& out) const {
    out.reserve(out.size() + 10 + regs_.size());
    out.push_back(kSerialVersion);
    out.push_back(static_cast<uint8_t>(precision_));
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<uint8_t>(seed_ >> (8 * i)));
    out.insert(out.end(), regs_.begin(), regs_.end());
}

std::vector<uint8_t> HllSketch::serialize() const {
    std::vector<uint8_t> out;
    serialize_to(out);
    return out;
}

HllSketch HllSketch::deserialize(std::span<const uint8_t> bytes) {
    if (bytes.size() < 10)
        throw FormatError("hll blob truncated");
    if (bytes[0] != kSerialVersion)
        throw FormatError("unsupported hll blob version " + std::to_string(bytes[0]));
    const int precision = bytes[1];
    if (precision < kMinPrecision || precision > kMaxPrecision)
        throw FormatError("hll blob precision out of range: " + std::to_string(precision));
    const std::size_t m = std::size_t(1) << precision;
    if (bytes.size() != 10 + m)
        throw FormatError("hll blob length mismatch");

    uint64_t seed = 0;
    for (int i = 0; i < 8; ++i)
        seed |= static_cast<uint64_t>(bytes[2 + i]) << (8 * i);

    HllSketch sketch(precision, seed);
    const int rank_bound = sketch.max_rank();
    for (std::size_t i = 0; i < m; ++i) {
        const uint8_t reg = bytes[10 + i];
        if (reg > rank_bound)
            throw FormatError("hll blob register value out of range");
        sketch.regs_[i] = reg;
    }
    sketch.recompute_stats();
    return sketch;
}

} // namespace dnshh
