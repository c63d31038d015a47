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
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dnshh/hll_sketch.hpp"
#include "dnshh/stream.hpp"

namespace dnshh {

class Allowlist;

//! How the per-item index is appended when spreading a subdomain's bytes
//! over sketch insertions. `paper` appends the plain decimal index; `fixed`
//! appends a fixed-width 4-hex-digit index, which cannot alias across
//! subdomains that are prefixes of one another.
enum class IndexEncoding : uint8_t { paper = 0, fixed = 1 };

IndexEncoding parse_index_encoding(std::string_view name);  // throws ConfigError

struct EngineConfig {
    std::size_t cache_size_k = 1000;
    double detection_threshold_bps = 0.0;  // bytes per second
    double window_seconds = 120.0;
    uint64_t pair_hash_seed = 0;
    int hll_precision = 12;
    uint64_t hll_hash_seed = 0;
    IndexEncoding index_encoding = IndexEncoding::paper;
    //! When unset, the first processed event opens the first window.
    std::optional<double> initial_window_start;

    double threshold_bytes() const { return detection_threshold_bps * window_seconds; }
};

struct Alert {
    std::string domain;
    double window_start = 0.0;
    double event_time = 0.0;
    double estimated_bytes = 0.0;
    double threshold_bytes = 0.0;
    std::string triggering_client;  // empty when the method has no client key
    uint64_t suppressed_repeat_count = 0;
};

//! Add a subdomain's information weight to a counter: one sketch insertion
//! per byte, keyed "subdomain || index". An empty subdomain adds nothing.
void info_insert(HllSketch& counter, std::string_view subdomain,
                 IndexEncoding encoding = IndexEncoding::paper);

/*!
 * Streaming detector for domains receiving large amounts of distinct
 * information through query subdomains.
 *
 * Keeps a bounded cache of per-domain information counters, admitted by
 * threshold sampling on a uniform pair hash: a new domain enters only when
 * its hash falls below tau; overflow evicts the entry with the largest seed
 * (the minimum pair hash seen while cached) and lowers tau to that seed.
 * Estimated per-window information above the configured byte budget raises
 * an alert, once per domain per window; repeats are counted on the alert
 * record. The cache, seeds, and tau are flushed at fixed window intervals,
 * driven by event timestamps.
 *
 * Single writer. Independent instances may own disjoint domain partitions;
 * their alert streams merge downstream.
 */
class InfoHeavyHitters {
public:
    explicit InfoHeavyHitters(EngineConfig config);

    //! Feed one stream element. Returns an alert when this element first
    //! pushes its domain over the window byte budget.
    std::optional<Alert> process(const StreamElement& element, double event_time,
                                 std::string_view client);

    //! Flush the cache: counters and seeds dropped, tau back to 1, alert
    //! flags cleared, current-window alerts moved to the finalized list.
    void reset(double new_window_start);

    //! Drop-before-processing allowlist; matching domains never touch the
    //! cache. Non-owning, caller keeps it alive. Pass nullptr to disable.
    void set_prefilter(const Allowlist* allowlist) { prefilter_ = allowlist; }

    //! Observer invoked as (domain, seed) on every eviction.
    void set_eviction_observer(std::function<void(const std::string&, double)> fn) {
        on_evict_ = std::move(fn);
    }

    //! Alerts from windows that have closed, with final repeat counts,
    //! sorted by (window_start, domain). Drains the internal list.
    std::vector<Alert> take_finalized_alerts();
    bool has_finalized_alerts() const { return !finalized_.empty(); }

    //! Close out the current window's alerts at end of stream (cache state
    //! is left untouched) and drain everything. Only call once, when no
    //! further events will be processed.
    std::vector<Alert> finalize();

    double tau() const { return tau_; }
    std::size_t size() const { return entries_.size(); }
    double window_start() const { return window_start_; }
    bool window_open() const { return window_open_; }
    double threshold_bytes() const { return threshold_bytes_; }
    const EngineConfig& config() const { return config_; }

    uint64_t processed_count() const { return processed_; }
    uint64_t prefilter_dropped() const { return prefilter_dropped_; }

    struct EntryView {
        double seed = 0.0;
        bool alerted_this_window = false;
        double estimated_bytes = 0.0;
    };
    std::optional<EntryView> entry(std::string_view domain) const;
    void for_each_entry(const std::function<void(const std::string&, const EntryView&)>& fn) const;

    //! Accounted bytes for cache contents: register arrays, domain strings,
    //! and per-entry bookkeeping. Conservative estimate, bounded by
    //! cache_size_k regardless of stream length.
    std::size_t memory_bytes() const;

    //! Versioned binary image of config, tau, window clock, cached entries,
    //! and current-window alert records. Entries are written domain-sorted,
    //! so identical states produce identical bytes. Finalized-but-undrained
    //! alerts are not part of the image.
    std::vector<uint8_t> snapshot() const;
    static InfoHeavyHitters restore(std::span<const uint8_t> bytes);  // throws FormatError

    void save_checkpoint(const std::filesystem::path& path) const;
    static InfoHeavyHitters load_checkpoint(const std::filesystem::path& path);

private:
    struct DomainEntry {
        HllSketch counter;
        double seed = 1.0;
        bool alerted_this_window = false;
    };

    void roll_window_if_elapsed(double event_time);
    void evict_largest_seed();

    EngineConfig config_;
    double threshold_bytes_ = 0.0;
    double tau_ = 1.0;
    double window_start_ = 0.0;
    bool window_open_ = false;

    std::unordered_map<std::string, DomainEntry> entries_;
    // domain -> alert raised this window; std::map so flushes come out
    // domain-sorted without an extra pass
    std::map<std::string, Alert> window_alerts_;
    std::vector<Alert> finalized_;

    const Allowlist* prefilter_ = nullptr;
    std::function<void(const std::string&, double)> on_evict_;

    uint64_t processed_ = 0;
    uint64_t prefilter_dropped_ = 0;
};

} // namespace dnshh
