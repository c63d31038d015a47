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
#include "dnshh/engine.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>

#include "dnshh/allowlist.hpp"
#include "dnshh/errors.hpp"
#include "dnshh/hash.hpp"

namespace dnshh {

namespace {

constexpr char kCheckpointMagic[8] = {'D', 'N', 'S', 'H', 'H', 'C', 'K', 'P'};
constexpr uint32_t kCheckpointVersion = 1;

class ByteWriter {
public:
    explicit ByteWriter(std::vector<uint8_t>& out) : out_(out) {}

    void u8(uint8_t v) { out_.push_back(v); }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i)
            out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i)
            out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void f64(double v) {
        uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        u64(bits);
    }
    void str(std::string_view s) {
        u32(static_cast<uint32_t>(s.size()));
        out_.insert(out_.end(), s.begin(), s.end());
    }
    void bytes(std::span<const uint8_t> b) {
        u32(static_cast<uint32_t>(b.size()));
        out_.insert(out_.end(), b.begin(), b.end());
    }

private:
    std::vector<uint8_t>& out_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const uint8_t> in) : in_(in) {}

    uint8_t u8() {
        need(1);
        return in_[pos_++];
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<uint32_t>(in_[pos_++]) << (8 * i);
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<uint64_t>(in_[pos_++]) << (8 * i);
        return v;
    }
    double f64() {
        const uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }
    std::string str() {
        const uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    std::vector<uint8_t> bytes() {
        const uint32_t n = u32();
        need(n);
        std::vector<uint8_t> b(in_.begin() + pos_, in_.begin() + pos_ + n);
        pos_ += n;
        return b;
    }
    bool exhausted() const { return pos_ == in_.size(); }

private:
    void need(std::size_t n) const {
        if (pos_ + n > in_.size())
            throw FormatError("checkpoint truncated");
    }
    std::span<const uint8_t> in_;
    std::size_t pos_ = 0;
};

} // namespace

IndexEncoding parse_index_encoding(std::string_view name) {
    if (name == "paper")
        return IndexEncoding::paper;
    if (name == "fixed")
        return IndexEncoding::fixed;
    throw ConfigError("unknown index encoding: '" + std::string(name) + "'");
}

void info_insert(HllSketch& counter, std::string_view subdomain, IndexEncoding encoding) {
    // qnames cap subdomains at 255 chars; the index adds at most 4 more
    char stack_buf[268];
    std::string heap_buf;
    char* buf;
    if (subdomain.size() <= 255) {
        buf = stack_buf;
    } else {
        heap_buf.resize(subdomain.size() + 12);
        buf = heap_buf.data();
    }
    std::memcpy(buf, subdomain.data(), subdomain.size());
    char* tail = buf + subdomain.size();
    for (std::size_t i = 0; i < subdomain.size(); ++i) {
        char* end;
        if (encoding == IndexEncoding::paper) {
            end = std::to_chars(tail, tail + 12, static_cast<unsigned long>(i)).ptr;
        } else {
            static constexpr char kHex[] = "0123456789abcdef";
            tail[0] = kHex[(i >> 12) & 0xf];
            tail[1] = kHex[(i >> 8) & 0xf];
            tail[2] = kHex[(i >> 4) & 0xf];
            tail[3] = kHex[i & 0xf];
            end = tail + 4;
        }
        counter.add(std::string_view(buf, static_cast<std::size_t>(end - buf)));
    }
}

InfoHeavyHitters::InfoHeavyHitters(EngineConfig config) : config_(std::move(config)) {
    if (config_.cache_size_k == 0)
        throw ConfigError("cache size must be positive");
    if (!(config_.window_seconds > 0.0))
        throw ConfigError("window length must be positive");
    if (config_.detection_threshold_bps < 0.0)
        throw ConfigError("detection threshold must be non-negative");
    threshold_bytes_ = config_.threshold_bytes();
    if (config_.initial_window_start) {
        window_start_ = *config_.initial_window_start;
        window_open_ = true;
    }
    // constructor validates precision up front rather than on first admission
    HllSketch probe(config_.hll_precision, config_.hll_hash_seed);
    (void)probe;
    entries_.reserve(config_.cache_size_k + 1);
}

void InfoHeavyHitters::roll_window_if_elapsed(double event_time) {
    if (!window_open_) {
        window_start_ = event_time;
        window_open_ = true;
        return;
    }
    const double w = config_.window_seconds;
    if (event_time - window_start_ >= w) {
        const double periods = std::floor((event_time - window_start_) / w);
        reset(window_start_ + periods * w);
    }
}

std::optional<Alert> InfoHeavyHitters::process(const StreamElement& element, double event_time,
                                               std::string_view client) {
    roll_window_if_elapsed(event_time);

    if (prefilter_ && prefilter_->contains(element.domain)) {
        ++prefilter_dropped_;
        return std::nullopt;
    }
    ++processed_;

    const double h = pair_hash(element.domain, element.subdomain, config_.pair_hash_seed);

    auto it = entries_.find(element.domain);
    if (it != entries_.end()) {
        DomainEntry& entry = it->second;
        info_insert(entry.counter, element.subdomain, config_.index_encoding);
        entry.seed = std::min(entry.seed, h);
        const double estimate = entry.counter.estimate();
        if (estimate > threshold_bytes_) {
            auto [alert_it, inserted] = window_alerts_.try_emplace(element.domain);
            if (!inserted) {
                ++alert_it->second.suppressed_repeat_count;
                return std::nullopt;
            }
            Alert& alert = alert_it->second;
            alert.domain = element.domain;
            alert.window_start = window_start_;
            alert.event_time = event_time;
            alert.estimated_bytes = estimate;
            alert.threshold_bytes = threshold_bytes_;
            alert.triggering_client = std::string(client);
            entry.alerted_this_window = true;
            return alert;
        }
        return std::nullopt;
    }

    if (h < tau_) {
        DomainEntry entry{HllSketch(config_.hll_precision, config_.hll_hash_seed), h, false};
        info_insert(entry.counter, element.subdomain, config_.index_encoding);
        entries_.emplace(element.domain, std::move(entry));
        if (entries_.size() > config_.cache_size_k)
            evict_largest_seed();
    }
    return std::nullopt;
}

void InfoHeavyHitters::evict_largest_seed() {
    auto victim = entries_.begin();
    for (auto it = std::next(entries_.begin()); it != entries_.end(); ++it) {
        const bool larger = it->second.seed > victim->second.seed ||
                            (it->second.seed == victim->second.seed && it->first > victim->first);
        if (larger)
            victim = it;
    }
    tau_ = victim->second.seed;
    if (on_evict_) {
        // copy so the observer may safely retain them
        const std::string domain = victim->first;
        const double seed = victim->second.seed;
        entries_.erase(victim);
        on_evict_(domain, seed);
        return;
    }
    entries_.erase(victim);
}

void InfoHeavyHitters::reset(double new_window_start) {
    for (auto& [domain, alert] : window_alerts_)
        finalized_.push_back(std::move(alert));
    window_alerts_.clear();
    entries_.clear();
    tau_ = 1.0;
    window_start_ = new_window_start;
    window_open_ = true;
}

std::vector<Alert> InfoHeavyHitters::take_finalized_alerts() {
    std::vector<Alert> out = std::move(finalized_);
    finalized_.clear();
    return out;
}

std::vector<Alert> InfoHeavyHitters::finalize() {
    for (auto& [domain, alert] : window_alerts_)
        finalized_.push_back(std::move(alert));
    window_alerts_.clear();
    for (auto& [domain, entry] : entries_)
        entry.alerted_this_window = false;
    return take_finalized_alerts();
}

std::optional<InfoHeavyHitters::EntryView> InfoHeavyHitters::entry(std::string_view domain) const {
    const auto it = entries_.find(std::string(domain));
    if (it == entries_.end())
        return std::nullopt;
    return EntryView{it->second.seed, it->second.alerted_this_window,
                     it->second.counter.estimate()};
}

void InfoHeavyHitters::for_each_entry(
    const std::function<void(const std::string&, const EntryView&)>& fn) const {
    for (const auto& [domain, entry] : entries_) {
        fn(domain, EntryView{entry.seed, entry.alerted_this_window, entry.counter.estimate()});
    }
}

std::size_t InfoHeavyHitters::memory_bytes() const {
    std::size_t total = sizeof(*this);
    // ~56 bytes per node/bucket bookkeeping in typical unordered_map builds
    constexpr std::size_t kNodeOverhead = 56;
    for (const auto& [domain, entry] : entries_) {
        total += domain.capacity() + 1;
        total += entry.counter.register_bytes() + sizeof(entry);
        total += kNodeOverhead;
    }
    total += entries_.bucket_count() * sizeof(void*);
    return total;
}

std::vector<uint8_t> InfoHeavyHitters::snapshot() const {
    std::vector<uint8_t> out;
    ByteWriter w(out);
    out.insert(out.end(), kCheckpointMagic, kCheckpointMagic + sizeof(kCheckpointMagic));
    w.u32(kCheckpointVersion);

    w.u64(config_.cache_size_k);
    w.f64(config_.detection_threshold_bps);
    w.f64(config_.window_seconds);
    w.u64(config_.pair_hash_seed);
    w.u8(static_cast<uint8_t>(config_.hll_precision));
    w.u64(config_.hll_hash_seed);
    w.u8(static_cast<uint8_t>(config_.index_encoding));

    w.u8(window_open_ ? 1 : 0);
    w.f64(window_start_);
    w.f64(tau_);
    w.u64(processed_);
    w.u64(prefilter_dropped_);

    std::vector<const std::pair<const std::string, DomainEntry>*> sorted;
    sorted.reserve(entries_.size());
    for (const auto& kv : entries_)
        sorted.push_back(&kv);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto* a, const auto* b) { return a->first < b->first; });

    w.u32(static_cast<uint32_t>(sorted.size()));
    std::vector<uint8_t> blob;
    for (const auto* kv : sorted) {
        w.str(kv->first);
        w.f64(kv->second.seed);
        w.u8(kv->second.alerted_this_window ? 1 : 0);
        blob.clear();
        kv->second.counter.serialize_to(blob);
        w.bytes(blob);
    }

    w.u32(static_cast<uint32_t>(window_alerts_.size()));
    for (const auto& [domain, alert] : window_alerts_) {
        w.str(domain);
        w.f64(alert.window_start);
        w.f64(alert.event_time);
        w.f64(alert.estimated_bytes);
        w.f64(alert.threshold_bytes);
        w.str(alert.triggering_client);
        w.u64(alert.suppressed_repeat_count);
    }
    return out;
}

InfoHeavyHitters InfoHeavyHitters::restore(std::span<const uint8_t> bytes) {
    if (bytes.size() < sizeof(kCheckpointMagic) ||
        std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
        throw FormatError("not an engine checkpoint");
    ByteReader r(bytes.subspan(sizeof(kCheckpointMagic)));
    const uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw FormatError("unsupported checkpoint version " + std::to_string(version));

    EngineConfig config;
    config.cache_size_k = r.u64();
    config.detection_threshold_bps = r.f64();
    config.window_seconds = r.f64();
    config.pair_hash_seed = r.u64();
    config.hll_precision = r.u8();
    config.hll_hash_seed = r.u64();
    const uint8_t encoding = r.u8();
    if (encoding > static_cast<uint8_t>(IndexEncoding::fixed))
        throw FormatError("bad index encoding in checkpoint");
    config.index_encoding = static_cast<IndexEncoding>(encoding);

    InfoHeavyHitters engine{config};
    engine.window_open_ = r.u8() != 0;
    engine.window_start_ = r.f64();
    engine.tau_ = r.f64();
    engine.processed_ = r.u64();
    engine.prefilter_dropped_ = r.u64();
    if (!(engine.tau_ >= 0.0 && engine.tau_ <= 1.0))
        throw FormatError("checkpoint tau out of range");

    const uint32_t n_entries = r.u32();
    if (n_entries > config.cache_size_k)
        throw FormatError("checkpoint entry count exceeds cache size");
    for (uint32_t i = 0; i < n_entries; ++i) {
        std::string domain = r.str();
        DomainEntry entry{HllSketch(config.hll_precision, config.hll_hash_seed), 1.0, false};
        entry.seed = r.f64();
        if (!(entry.seed >= 0.0 && entry.seed <= 1.0))
            throw FormatError("checkpoint seed out of range");
        entry.alerted_this_window = r.u8() != 0;
        entry.counter = HllSketch::deserialize(r.bytes());
        engine.entries_.emplace(std::move(domain), std::move(entry));
    }

    const uint32_t n_alerts = r.u32();
    for (uint32_t i = 0; i < n_alerts; ++i) {
        Alert alert;
        alert.domain = r.str();
        alert.window_start = r.f64();
        alert.event_time = r.f64();
        alert.estimated_bytes = r.f64();
        alert.threshold_bytes = r.f64();
        alert.triggering_client = r.str();
        alert.suppressed_repeat_count = r.u64();
        engine.window_alerts_.emplace(alert.domain, std::move(alert));
    }
    if (!r.exhausted())
        throw FormatError("trailing bytes in checkpoint");
    return engine;
}

void InfoHeavyHitters::save_checkpoint(const std::filesystem::path& path) const {
    const std::vector<uint8_t> bytes = snapshot();
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open checkpoint file for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("failed writing checkpoint: " + path.string());
}

InfoHeavyHitters InfoHeavyHitters::load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open checkpoint file: " + path.string());
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return restore(bytes);
}

} // namespace dnshh
