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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dnshh/engine.hpp"  // Alert
#include "dnshh/stream.hpp"

namespace dnshh {

//! Deflate-compressed size of the newline-joined items, in bytes. The
//! compression level is part of the recorded configuration; changing it
//! invalidates golden values.
double compression_bound_bytes(std::span<const std::string> items, int zlib_level);

struct PaxsonConfig {
    double window_seconds = 120.0;
    double detection_threshold_bps = 0.0;
    int zlib_level = 6;
    //! Key buffers by (domain, client) instead of domain alone.
    bool per_client_key = false;
    std::optional<double> initial_window_start;

    double threshold_bytes() const { return detection_threshold_bps * window_seconds; }
};

/*!
 * Windowed compression-bound baseline: buffers each key's distinct
 * subdomains for the current window and, at window end, bounds the
 * information conveyed by the key by the compressed size of the buffered
 * names. A bound above the window byte budget raises an alert. Single
 * writer.
 */
class CompressionBaseline {
public:
    explicit CompressionBaseline(PaxsonConfig config);

    //! Buffer one element (deduplicated per window). Alerts are returned
    //! when the element's timestamp closes the previous window.
    std::vector<Alert> observe(const StreamElement& element, double event_time,
                               std::string_view client = {});

    struct FlushEntry {
        std::string domain;
        std::string client;  // empty unless per_client_key
        double upper_bound_bytes = 0.0;
        std::size_t distinct_subdomains = 0;
        bool alert = false;
    };

    //! Bound every buffered key and clear the buffers; entries sorted by
    //! (domain, client). Called internally at window rollover.
    std::vector<FlushEntry> flush();

    //! Flush the final window at end of stream and return its alerts.
    std::vector<Alert> finalize();

    double window_start() const { return window_start_; }
    bool window_open() const { return window_open_; }
    std::size_t buffered_keys() const { return buffers_.size(); }
    const PaxsonConfig& config() const { return config_; }

private:
    struct KeyBuffer {
        std::vector<std::string> items;  // insertion order, for stable bounds
        std::unordered_set<std::string> seen;
    };

    std::vector<Alert> alerts_from_flush(double window_end);

    PaxsonConfig config_;
    double threshold_bytes_ = 0.0;
    double window_start_ = 0.0;
    bool window_open_ = false;
    std::map<std::pair<std::string, std::string>, KeyBuffer> buffers_;
};

} // namespace dnshh
