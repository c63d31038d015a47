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
#include <string>
#include <string_view>
#include <vector>

#include "dnshh/stream.hpp"

namespace dnshh {

//! Synthetic attack workloads. All generators are pure functions of
//! (spec, seed): same inputs, byte-identical output.
enum class AttackTool : uint8_t { iodine, frameworkpos, denis };

AttackTool parse_attack_tool(std::string_view name);  // throws ConfigError
std::string_view attack_tool_label(AttackTool tool);

struct AttackSpec {
    AttackTool tool = AttackTool::iodine;
    std::string domain;     // attacker-registered domain, one per infected host
    std::string client_id;  // the infected host
    double start_time = 0.0;
    uint32_t query_count = 100;  // must stay within [100, 10000]

    // per-tool knobs
    double iodine_gap_seconds = 0.05;   // back-to-back, high throughput
    std::size_t iodine_qname_target = 250;  // total qname length aimed for
    std::size_t fpos_subdomain_len = 40;    // one encoded card record per query
    std::size_t denis_token_len = 15;       // keep-alive token length
};

//! Subdomain behavior of background traffic: a share of empty subdomains,
//! a share drawn from a small per-domain pool, and a share unique per query.
struct SubdomainMixture {
    double empty_weight = 0.4;
    double pool_weight = 0.5;
    double unique_weight = 0.1;
    std::size_t pool_size = 5;
};

struct BenignSpec {
    std::size_t n_clients = 100;
    std::size_t n_domains = 1000;
    double zipf_exponent = 1.1;  // domain popularity
    SubdomainMixture mixture;
    double duration_seconds = 600.0;
    double mean_rate_qps = 100.0;
    double start_time = 0.0;
};

//! High-throughput tunnel: near-maximal multi-label qnames over a base32
//! alphabet, unique per query, back to back.
std::vector<DnsQueryEvent> gen_iodine(const AttackSpec& spec, uint64_t seed);

//! Card-record exfiltration: fixed-length encoded subdomain, three queries
//! per second, unique per query.
std::vector<DnsQueryEvent> gen_frameworkpos(const AttackSpec& spec, uint64_t seed);

//! Slow C&C keep-alive: short tokens every 1.5 seconds.
std::vector<DnsQueryEvent> gen_denis(const AttackSpec& spec, uint64_t seed);

//! Dispatch on spec.tool.
std::vector<DnsQueryEvent> gen_attack(const AttackSpec& spec, uint64_t seed);

//! Zipf-popular domains, mixture-driven subdomains, uniform event times
//! over the duration. Labeled "benign".
std::vector<DnsQueryEvent> gen_benign(const BenignSpec& spec, uint64_t seed);

//! Merge by timestamp; ties keep input order (stream, then element).
std::vector<DnsQueryEvent> merge_streams(std::vector<std::vector<DnsQueryEvent>> streams);

} // namespace dnshh
