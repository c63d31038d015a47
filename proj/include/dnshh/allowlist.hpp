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
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>

#include "dnshh/engine.hpp"
#include "dnshh/stream.hpp"

namespace dnshh {

enum class AllowlistSource : uint8_t { static_toplist, peacetime };

//! Where in the pipeline a list applies: `pre` drops matching elements before
//! they reach the detector, `post` drops alerts for matching domains.
enum class AllowlistMode : uint8_t { pre, post };

AllowlistMode parse_allowlist_mode(std::string_view name);  // throws ConfigError

/*!
 * A set of known-benign registered domains. Matching is exact on the
 * registered domain, after the same extraction the detector uses for its
 * keys. Immutable once built; freely shared across threads.
 */
class Allowlist {
public:
    Allowlist() = default;
    Allowlist(std::set<std::string> entries, AllowlistSource source)
        : entries_(std::move(entries)), source_(source) {}

    bool contains(std::string_view domain) const {
        return entries_.contains(std::string(domain));
    }

    const std::set<std::string>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    AllowlistSource source() const { return source_; }

    /*!
     * Load a ranked toplist ("rank,domain" CSV) or a plain one-domain-per-line
     * file; for plain files the line number is the rank. Entries above
     * max_rank are skipped. Rows that are not an integer rank plus a
     * hostname-shaped domain are skipped and counted in *skipped_rows.
     * Entries are lowercased and reduced to their registered domain.
     */
    static Allowlist load_toplist(const std::filesystem::path& path, uint64_t max_rank,
                                  const QnameExtractor& extractor,
                                  uint64_t* skipped_rows = nullptr);

    //! One lowercase domain per line, sorted.
    void save(const std::filesystem::path& path) const;

private:
    std::set<std::string> entries_;
    AllowlistSource source_ = AllowlistSource::static_toplist;
};

//! True iff the domain is in the union of the given lists.
bool is_allowed(std::span<const Allowlist* const> lists, std::string_view domain);

/*!
 * Run the detector over a stream assumed exfiltration-free, recording but not
 * enforcing alerts; the alerted domains become the allowlist. Deterministic
 * for fixed seeds.
 */
Allowlist generate_peacetime(const EngineConfig& config,
                             std::span<const DnsQueryEvent> events,
                             const QnameExtractor& extractor,
                             uint64_t* parse_errors = nullptr);

} // namespace dnshh
