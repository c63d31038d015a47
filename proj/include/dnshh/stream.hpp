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
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace dnshh {

//! One raw query-log record.
struct DnsQueryEvent {
    double timestamp = 0.0;  // seconds since epoch
    std::string client_id;
    std::string qname;       // non-empty, <= 255 chars
    std::string label;       // "" = unlabeled; "benign" or an attack tool name

    bool operator==(const DnsQueryEvent&) const = default;
};

//! A query name split into its registered domain and the remaining labels.
struct StreamElement {
    std::string domain;      // registered domain, lowercase
    std::string subdomain;   // leading labels joined by dots, case preserved

    bool operator==(const StreamElement&) const = default;
};

struct ExtractionConfig {
    int label_depth = 2;  // trailing labels forming the registered domain
    std::optional<std::filesystem::path> suffix_list_path;  // wins when set
};

/*!
 * Public-suffix rule set (publicsuffix.org format subset: exact rules,
 * "*." wildcard rules, "!" exception rules; comments and blank lines
 * ignored). Lookup returns the number of labels in the public suffix.
 */
class SuffixList {
public:
    static SuffixList load(const std::filesystem::path& path);
    static SuffixList from_lines(std::span<const std::string> lines);

    //! labels are lowercase, leftmost first. Falls back to the implicit
    //! "*" rule (one label) when nothing matches.
    std::size_t public_suffix_labels(std::span<const std::string> labels) const;

    bool empty() const { return rules_.empty() && exceptions_.empty(); }

private:
    std::unordered_set<std::string> rules_;       // includes "*." forms
    std::unordered_set<std::string> exceptions_;  // stored without '!'
    std::size_t max_rule_labels_ = 0;
};

/*!
 * Splits qnames into (domain, subdomain) stream elements. Stateless after
 * construction; safe to share across threads.
 */
class QnameExtractor {
public:
    explicit QnameExtractor(ExtractionConfig config = {});

    //! Throws ParseError on a malformed name (empty label, label > 63 chars,
    //! total length > 255). A single trailing root dot is stripped first.
    //! Names with fewer labels than the extraction depth become
    //! (lowercased qname, "").
    StreamElement extract(std::string_view qname) const;

    const ExtractionConfig& config() const { return config_; }

private:
    ExtractionConfig config_;
    SuffixList suffixes_;
};

//! Structural hostname check used when ingesting allowlist rows; stricter
//! than qname parsing (letters, digits, '-', '_' and dots only).
bool looks_like_hostname(std::string_view s);

enum class StreamFormat { jsonl, csv };

StreamFormat parse_stream_format(std::string_view name);  // throws ConfigError

//! Parse one record; std::nullopt if the row is malformed.
std::optional<DnsQueryEvent> parse_jsonl_event(std::string_view line);
std::optional<DnsQueryEvent> parse_csv_event(std::string_view line, bool has_label);

/*!
 * Streaming reader over a query-log file; memory use is independent of file
 * size. Malformed rows are skipped and counted; a missing or unreadable file
 * throws IoError; a CSV file with a bad header throws FormatError.
 */
class EventReader {
public:
    EventReader(const std::filesystem::path& path, StreamFormat format);

    std::optional<DnsQueryEvent> next();

    uint64_t skipped_rows() const { return skipped_; }

private:
    std::ifstream in_;
    StreamFormat format_;
    bool header_parsed_ = false;
    bool csv_has_label_ = false;
    uint64_t skipped_ = 0;
};

//! Convenience: read a whole file into memory (tests, harness).
std::vector<DnsQueryEvent> read_events(const std::filesystem::path& path, StreamFormat format,
                                       uint64_t* skipped_rows = nullptr);

std::string event_to_jsonl(const DnsQueryEvent& event);
std::string event_to_csv(const DnsQueryEvent& event);
void write_events(std::ostream& out, std::span<const DnsQueryEvent> events, StreamFormat format);
void write_events_file(const std::filesystem::path& path, std::span<const DnsQueryEvent> events,
                       StreamFormat format);

} // namespace dnshh
