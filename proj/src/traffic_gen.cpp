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
#include "dnshh/traffic_gen.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dnshh/errors.hpp"
#include "dnshh/hash.hpp"

namespace dnshh {

namespace {

constexpr std::string_view kBase32Alphabet = "abcdefghijklmnopqrstuvwxyz234567";
constexpr std::string_view kBase64ishAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";
constexpr std::string_view kHexAlphabet = "0123456789abcdef";

//! Deterministic stream RNG; avoids std distributions so sequences are
//! pinned by the standard-specified mt19937_64 output alone.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next() { return gen_(); }

    double unit() { return to_unit_interval(gen_()); }

    //! Uniform integer in [0, n) via 128-bit multiply.
    uint64_t below(uint64_t n) {
        return static_cast<uint64_t>(
            (static_cast<unsigned __int128>(gen_()) * n) >> 64);
    }

    uint64_t range(uint64_t lo, uint64_t hi) { return lo + below(hi - lo + 1); }

private:
    std::mt19937_64 gen_;
};

void append_counter(std::string& out, uint64_t value, std::string_view alphabet,
                    std::size_t width) {
    for (std::size_t i = 0; i < width; ++i) {
        out += alphabet[value % alphabet.size()];
        value /= alphabet.size();
    }
}

void append_random(std::string& out, Rng& rng, std::string_view alphabet, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i)
        out += alphabet[rng.below(alphabet.size())];
}

void validate_attack(const AttackSpec& spec) {
    if (spec.query_count < 100 || spec.query_count > 10000)
        throw ConfigError("attack query count must be in [100, 10000], got " +
                          std::to_string(spec.query_count));
    if (spec.domain.empty())
        throw ConfigError("attack spec needs a domain");
    if (spec.client_id.empty())
        throw ConfigError("attack spec needs a client id");
}

DnsQueryEvent make_event(double ts, const std::string& client, std::string qname,
                         std::string_view label) {
    DnsQueryEvent event;
    event.timestamp = ts;
    event.client_id = client;
    event.qname = std::move(qname);
    event.label = std::string(label);
    return event;
}

} // namespace

AttackTool parse_attack_tool(std::string_view name) {
    if (name == "iodine")
        return AttackTool::iodine;
    if (name == "frameworkpos")
        return AttackTool::frameworkpos;
    if (name == "denis")
        return AttackTool::denis;
    throw ConfigError("unknown attack tool: '" + std::string(name) + "'");
}

std::string_view attack_tool_label(AttackTool tool) {
    switch (tool) {
        case AttackTool::iodine: return "iodine";
        case AttackTool::frameworkpos: return "frameworkpos";
        case AttackTool::denis: return "denis";
    }
    return "unknown";
}

std::vector<DnsQueryEvent> gen_iodine(const AttackSpec& spec, uint64_t seed) {
    validate_attack(spec);
    if (!(spec.iodine_gap_seconds > 0.0))
        throw ConfigError("iodine gap must be positive");

    // total payload chars available once the domain and its joining dot
    // are reserved, split into dot-separated labels of at most 63 chars
    const std::size_t target = std::min<std::size_t>(spec.iodine_qname_target, 255);
    if (target < spec.domain.size() + 2)
        throw ConfigError("iodine qname target too small for domain");
    const std::size_t sub_len = target - spec.domain.size() - 1;

    Rng rng(seed);
    std::vector<DnsQueryEvent> events;
    events.reserve(spec.query_count);
    for (uint32_t q = 0; q < spec.query_count; ++q) {
        std::string sub;
        sub.reserve(sub_len);
        append_counter(sub, q, kBase32Alphabet, 8);  // uniqueness per query
        while (sub.size() < sub_len) {
            // npos + 1 == 0, so a dotless prefix counts from the start
            const std::size_t since_dot = sub.size() - (sub.rfind('.') + 1);
            if (since_dot >= 63) {
                if (sub.size() + 2 > sub_len)
                    break;  // no room for a dot plus at least one char
                sub += '.';
                continue;
            }
            append_random(sub, rng, kBase32Alphabet, 1);
        }
        events.push_back(make_event(spec.start_time + q * spec.iodine_gap_seconds,
                                    spec.client_id, sub + "." + spec.domain,
                                    attack_tool_label(spec.tool)));
    }
    return events;
}

std::vector<DnsQueryEvent> gen_frameworkpos(const AttackSpec& spec, uint64_t seed) {
    validate_attack(spec);
    // "<counter><hex payload>.t2": fixed subdomain length, unique per query
    constexpr std::string_view kSuffix = ".t2";
    constexpr std::size_t kCounterWidth = 8;
    if (spec.fpos_subdomain_len < kCounterWidth + kSuffix.size() + 1 ||
        spec.fpos_subdomain_len > 200)
        throw ConfigError("frameworkpos subdomain length out of range");
    const std::size_t payload_len =
        spec.fpos_subdomain_len - kSuffix.size() - kCounterWidth;

    Rng rng(seed);
    std::vector<DnsQueryEvent> events;
    events.reserve(spec.query_count);
    for (uint32_t q = 0; q < spec.query_count; ++q) {
        std::string sub;
        sub.reserve(spec.fpos_subdomain_len);
        append_counter(sub, q, kHexAlphabet, kCounterWidth);
        append_random(sub, rng, kHexAlphabet, payload_len);
        sub += kSuffix;
        events.push_back(make_event(spec.start_time + q * (1.0 / 3.0), spec.client_id,
                                    sub + "." + spec.domain, attack_tool_label(spec.tool)));
    }
    return events;
}

std::vector<DnsQueryEvent> gen_denis(const AttackSpec& spec, uint64_t seed) {
    validate_attack(spec);
    constexpr std::size_t kCounterWidth = 6;
    if (spec.denis_token_len < kCounterWidth + 1 || spec.denis_token_len > 200)
        throw ConfigError("denis token length out of range");

    Rng rng(seed);
    std::vector<DnsQueryEvent> events;
    events.reserve(spec.query_count);
    for (uint32_t q = 0; q < spec.query_count; ++q) {
        std::string sub;
        sub.reserve(spec.denis_token_len);
        append_counter(sub, q, kBase64ishAlphabet, kCounterWidth);
        append_random(sub, rng, kBase64ishAlphabet, spec.denis_token_len - kCounterWidth);
        events.push_back(make_event(spec.start_time + q * 1.5, spec.client_id,
                                    sub + "." + spec.domain, attack_tool_label(spec.tool)));
    }
    return events;
}

std::vector<DnsQueryEvent> gen_attack(const AttackSpec& spec, uint64_t seed) {
    switch (spec.tool) {
        case AttackTool::iodine: return gen_iodine(spec, seed);
        case AttackTool::frameworkpos: return gen_frameworkpos(spec, seed);
        case AttackTool::denis: return gen_denis(spec, seed);
    }
    throw ConfigError("unknown attack tool");
}

std::vector<DnsQueryEvent> gen_benign(const BenignSpec& spec, uint64_t seed) {
    const SubdomainMixture& mix = spec.mixture;
    const double weight_sum = mix.empty_weight + mix.pool_weight + mix.unique_weight;
    if (std::abs(weight_sum - 1.0) > 1e-9)
        throw ConfigError("mixture weights must sum to 1");
    if (mix.empty_weight < 0 || mix.pool_weight < 0 || mix.unique_weight < 0)
        throw ConfigError("mixture weights must be non-negative");
    if (spec.n_clients == 0 || spec.n_domains == 0)
        throw ConfigError("benign spec needs clients and domains");
    if (mix.pool_weight > 0 && mix.pool_size == 0)
        throw ConfigError("pool weight requires a non-empty pool");

    static constexpr std::string_view kTlds[] = {"com", "net", "org", "io"};

    // Zipf CDF over domain ranks
    std::vector<double> cdf(spec.n_domains);
    double acc = 0.0;
    for (std::size_t i = 0; i < spec.n_domains; ++i) {
        acc += 1.0 / std::pow(static_cast<double>(i + 1), spec.zipf_exponent);
        cdf[i] = acc;
    }
    for (double& v : cdf)
        v /= acc;

    std::vector<std::string> domains(spec.n_domains);
    for (std::size_t i = 0; i < spec.n_domains; ++i)
        domains[i] = "b" + std::to_string(i) + "." + std::string(kTlds[i % 4]);

    // per-domain pools are derived lazily from (seed, domain rank) so large
    // domain counts do not pay for unused pools
    Rng rng(splitmix64(seed));
    const auto pool_token = [&](std::size_t domain_idx, std::size_t slot) {
        Rng pool_rng(splitmix64(splitmix64(seed ^ domain_idx) ^ slot));
        std::string token;
        append_random(token, pool_rng, kBase32Alphabet, 3 + pool_rng.below(6));
        return token;
    };

    const auto count = static_cast<std::size_t>(
        std::llround(spec.duration_seconds * spec.mean_rate_qps));
    std::vector<double> times(count);
    for (std::size_t i = 0; i < count; ++i)
        times[i] = spec.start_time + rng.unit() * spec.duration_seconds;
    std::sort(times.begin(), times.end());

    std::vector<DnsQueryEvent> events;
    events.reserve(count);
    uint64_t unique_counter = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const double u = rng.unit();
        const std::size_t domain_idx = std::min<std::size_t>(
            static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin()),
            spec.n_domains - 1);
        const std::string client = "h" + std::to_string(rng.below(spec.n_clients));

        std::string sub;
        const double pick = rng.unit();
        if (pick < mix.empty_weight) {
            // empty subdomain
        } else if (pick < mix.empty_weight + mix.pool_weight) {
            sub = pool_token(domain_idx, rng.below(mix.pool_size));
        } else {
            sub = "u";
            append_counter(sub, unique_counter++, kBase32Alphabet, 8);
            append_random(sub, rng, kBase32Alphabet, 4);
        }

        std::string qname = sub.empty() ? domains[domain_idx] : sub + "." + domains[domain_idx];
        events.push_back(make_event(times[i], client, std::move(qname), "benign"));
    }
    return events;
}

std::vector<DnsQueryEvent> merge_streams(std::vector<std::vector<DnsQueryEvent>> streams) {
    std::vector<DnsQueryEvent> merged;
    std::size_t total = 0;
    for (const auto& stream : streams)
        total += stream.size();
    merged.reserve(total);
    for (auto& stream : streams) {
        for (auto& event : stream)
            merged.push_back(std::move(event));
    }
    std::stable_sort(merged.begin(), merged.end(),
                     [](const DnsQueryEvent& a, const DnsQueryEvent& b) {
                         return a.timestamp < b.timestamp;
                     });
    return merged;
}

} // namespace dnshh
