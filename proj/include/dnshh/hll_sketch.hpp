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
#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace dnshh {

/*!
 * Dense HyperLogLog count-distinct sketch over a 64-bit seeded hash.
 *
 * The top `p` hash bits select one of 2^p registers; each register keeps the
 * maximum rank (leading-zero count of the remaining bits, plus one) seen for
 * its bucket. Estimation uses linear counting while the occupancy is low
 * enough for it to be the stronger estimator, and the raw harmonic mean
 * beyond that. The register sum needed by the estimator is maintained
 * incrementally as exact integer arithmetic, so estimation is O(1) and
 * independent of whether the sketch was built by insertion, merge, or
 * deserialization.
 *
 * Sketches are plain values: single writer, freely copyable and movable,
 * safe to read concurrently when not being mutated.
 */
class HllSketch {
public:
    static constexpr int kMinPrecision = 4;
    static constexpr int kMaxPrecision = 18;
    static constexpr uint8_t kSerialVersion = 1;

    //! Throws ConfigError unless kMinPrecision <= precision_bits <= kMaxPrecision.
    explicit HllSketch(int precision_bits = 12, uint64_t hash_seed = 0);

    //! Insert one item. Idempotent for identical items; order-insensitive.
    void add(std::string_view item);

    //! Estimated number of distinct inserted items. 0 for a fresh sketch.
    double estimate() const;

    //! Register-wise maximum. Throws IncompatibleError on precision or seed
    //! mismatch.
    void merge(const HllSketch& other);

    int precision_bits() const { return precision_; }
    uint64_t hash_seed() const { return seed_; }
    int max_rank() const { return 64 - precision_ + 1; }
    std::span<const uint8_t> registers() const { return regs_; }

    //! Bytes of register storage (2^p at one byte per register).
    std::size_t register_bytes() const { return regs_.size(); }

    //! Layout: version byte, precision byte, 8-byte little-endian hash seed,
    //! then 2^p register bytes.
    std::vector<uint8_t> serialize() const;
    void serialize_to(std::vector<uint8_t>& out) const;

    //! Throws FormatError on truncated input, unknown version, out-of-range
    //! precision, or register values above the rank bound.
    static HllSketch deserialize(std::span<const uint8_t> bytes);

    bool operator==(const HllSketch& other) const = default;

private:
    void bump_register(uint32_t index, uint8_t rank);
    void recompute_stats();

    int precision_ = 12;
    uint64_t seed_ = 0;
    std::vector<uint8_t> regs_;

    // sum over registers of 2^(max_rank - reg[i]); exact, so estimates never
    // drift between an incrementally maintained and a freshly loaded sketch
    unsigned __int128 rank_sum_ = 0;
    uint32_t zero_regs_ = 0;
};

} // namespace dnshh
