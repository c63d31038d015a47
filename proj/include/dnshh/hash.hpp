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

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace dnshh {

//! Seeded 64-bit string hash (xxHash64). Byte-order independent so seeded
//! runs reproduce across platforms; full avalanche, so near-identical keys
//! (sequential subdomains) spread evenly across sketch registers.
uint64_t hash64(const void* key, std::size_t len, uint64_t seed);

inline uint64_t hash64(std::string_view s, uint64_t seed) {
    return hash64(s.data(), s.size(), seed);
}

//! SplitMix64 finalizer; used to derive independent seeds from one knob.
uint64_t splitmix64(uint64_t x);

//! Top 53 bits of a hash mapped onto [0, 1).
inline double to_unit_interval(uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

//! Joint hash of a (domain, subdomain) pair onto [0, 1). The domain hash
//! seeds the subdomain hash, so ("a","b") and ("ab","") never alias.
double pair_hash(std::string_view domain, std::string_view subdomain, uint64_t seed);

} // namespace dnshh
