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
#include "dnshh/allowlist.hpp"

#include <charconv>
#include <fstream>

#include "dnshh/errors.hpp"

namespace dnshh {

AllowlistMode parse_allowlist_mode(std::string_view name) {
    if (name == "pre")
        return AllowlistMode::pre;
    if (name == "post")
        return AllowlistMode::post;
    throw ConfigError("unknown allowlist mode: '" + std::string(name) + "'");
}

Allowlist Allowlist::load_toplist(const std::filesystem::path& path, uint64_t max_rank,
                                  const QnameExtractor& extractor, uint64_t* skipped_rows) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open allowlist file: " + path.string());

    std::set<std::string> entries;
    uint64_t skipped = 0;
    uint64_t line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        ++line_no;

        uint64_t rank = line_no;
        std::string_view domain = line;
        if (const std::size_t comma = line.find(','); comma != std::string::npos) {
            const std::string_view rank_field(line.data(), comma);
            const auto res = std::from_chars(rank_field.data(),
                                             rank_field.data() + rank_field.size(), rank);
            if (res.ec != std::errc() || res.ptr != rank_field.data() + rank_field.size()) {
                ++skipped;
                continue;
            }
            domain = std::string_view(line).substr(comma + 1);
        }
        if (rank > max_rank)
            continue;
        if (!looks_like_hostname(domain)) {
            ++skipped;
            continue;
        }
        entries.insert(extractor.extract(domain).domain);
    }
    if (skipped_rows)
        *skipped_rows = skipped;
    return Allowlist(std::move(entries), AllowlistSource::static_toplist);
}

void Allowlist::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open allowlist file for writing: " + path.string());
    for (const std::string& domain : entries_)
        out << domain << '\n';
    if (!out)
        throw IoError("failed writing allowlist: " + path.string());
}

bool is_allowed(std::span<const Allowlist* const> lists, std::string_view domain) {
    for (const Allowlist* list : lists) {
        if (list && list->contains(domain))
            return true;
    }
    return false;
}

Allowlist generate_peacetime(const EngineConfig& config, std::span<const DnsQueryEvent> events,
                             const QnameExtractor& extractor, uint64_t* parse_errors) {
    InfoHeavyHitters engine{config};
    uint64_t bad = 0;
    std::set<std::string> alerted;
    for (const DnsQueryEvent& event : events) {
        StreamElement element;
        try {
            element = extractor.extract(event.qname);
        } catch (const ParseError&) {
            ++bad;
            continue;
        }
        if (auto alert = engine.process(element, event.timestamp, event.client_id))
            alerted.insert(alert->domain);
    }
    if (parse_errors)
        *parse_errors = bad;
    return Allowlist(std::move(alerted), AllowlistSource::peacetime);
}

} // namespace dnshh
