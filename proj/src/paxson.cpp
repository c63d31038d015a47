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
#include "dnshh/paxson.hpp"

#include <cmath>

#include <zlib.h>

#include "dnshh/errors.hpp"

namespace dnshh {

double compression_bound_bytes(std::span<const std::string> items, int zlib_level) {
    if (zlib_level < 1 || zlib_level > 9)
        throw ConfigError("zlib level must be in [1, 9], got " + std::to_string(zlib_level));
    if (items.empty())
        return 0.0;

    std::string joined;
    std::size_t total = 0;
    for (const std::string& item : items)
        total += item.size() + 1;
    joined.reserve(total);
    for (const std::string& item : items) {
        joined += item;
        joined += '\n';
    }

    uLongf compressed_len = compressBound(static_cast<uLong>(joined.size()));
    std::vector<Bytef> compressed(compressed_len);
    const int rc = compress2(compressed.data(), &compressed_len,
                             reinterpret_cast<const Bytef*>(joined.data()),
                             static_cast<uLong>(joined.size()), zlib_level);
    if (rc != Z_OK)
        throw std::runtime_error("zlib compress2 failed: " + std::to_string(rc));
    return static_cast<double>(compressed_len);
}

CompressionBaseline::CompressionBaseline(PaxsonConfig config) : config_(config) {
    if (!(config_.window_seconds > 0.0))
        throw ConfigError("window length must be positive");
    if (config_.detection_threshold_bps < 0.0)
        throw ConfigError("detection threshold must be non-negative");
    if (config_.zlib_level < 1 || config_.zlib_level > 9)
        throw ConfigError("zlib level must be in [1, 9]");
    threshold_bytes_ = config_.threshold_bytes();
    if (config_.initial_window_start) {
        window_start_ = *config_.initial_window_start;
        window_open_ = true;
    }
}

std::vector<Alert> CompressionBaseline::observe(const StreamElement& element, double event_time,
                                                std::string_view client) {
    std::vector<Alert> alerts;
    if (!window_open_) {
        window_start_ = event_time;
        window_open_ = true;
    } else if (event_time - window_start_ >= config_.window_seconds) {
        const double w = config_.window_seconds;
        const double periods = std::floor((event_time - window_start_) / w);
        alerts = alerts_from_flush(window_start_ + w);
        window_start_ += periods * w;
    }

    KeyBuffer& buffer =
        buffers_[{element.domain, config_.per_client_key ? std::string(client) : std::string()}];
    if (buffer.seen.insert(element.subdomain).second)
        buffer.items.push_back(element.subdomain);
    return alerts;
}

std::vector<CompressionBaseline::FlushEntry> CompressionBaseline::flush() {
    std::vector<FlushEntry> entries;
    entries.reserve(buffers_.size());
    for (const auto& [key, buffer] : buffers_) {
        FlushEntry entry;
        entry.domain = key.first;
        entry.client = key.second;
        entry.upper_bound_bytes = compression_bound_bytes(buffer.items, config_.zlib_level);
        entry.distinct_subdomains = buffer.items.size();
        entry.alert = entry.upper_bound_bytes > threshold_bytes_;
        entries.push_back(std::move(entry));
    }
    buffers_.clear();
    return entries;
}

std::vector<Alert> CompressionBaseline::alerts_from_flush(double window_end) {
    const double flushed_window_start = window_start_;
    std::vector<Alert> alerts;
    for (FlushEntry& entry : flush()) {
        if (!entry.alert)
            continue;
        Alert alert;
        alert.domain = std::move(entry.domain);
        alert.window_start = flushed_window_start;
        alert.event_time = window_end;
        alert.estimated_bytes = entry.upper_bound_bytes;
        alert.threshold_bytes = threshold_bytes_;
        alert.triggering_client = std::move(entry.client);
        alerts.push_back(std::move(alert));
    }
    return alerts;
}

std::vector<Alert> CompressionBaseline::finalize() {
    if (!window_open_)
        return {};
    return alerts_from_flush(window_start_ + config_.window_seconds);
}

} // namespace dnshh
