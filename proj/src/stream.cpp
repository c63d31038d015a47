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
#include "dnshh/stream.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <ostream>

#include "json.hpp"

#include "dnshh/errors.hpp"

namespace dnshh {

namespace {

constexpr std::size_t kMaxQnameLen = 255;
constexpr std::size_t kMaxLabelLen = 63;

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string> split_labels(std::string_view name) {
    std::vector<std::string> labels;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = name.find('.', start);
        if (dot == std::string_view::npos) {
            labels.emplace_back(name.substr(start));
            break;
        }
        labels.emplace_back(name.substr(start, dot - start));
        start = dot + 1;
    }
    return labels;
}

std::string join_labels(std::span<const std::string> labels) {
    std::string out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i > 0)
            out += '.';
        out += labels[i];
    }
    return out;
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

SuffixList SuffixList::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open suffix list: " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        lines.push_back(line);
    return from_lines(lines);
}

SuffixList SuffixList::from_lines(std::span<const std::string> lines) {
    SuffixList list;
    for (const std::string& raw : lines) {
        std::string line = raw;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        const std::size_t cut = line.find_first_of(" \t");
        if (cut != std::string::npos)
            line.resize(cut);
        if (line.empty() || line.starts_with("//"))
            continue;
        line = lowercase(line);
        const auto labels = static_cast<std::size_t>(
            std::count(line.begin(), line.end(), '.') + 1);
        if (line.front() == '!') {
            list.exceptions_.insert(line.substr(1));
        } else {
            list.rules_.insert(line);
        }
        list.max_rule_labels_ = std::max(list.max_rule_labels_, labels);
    }
    return list;
}

std::size_t SuffixList::public_suffix_labels(std::span<const std::string> labels) const {
    const std::size_t n = labels.size();
    // Exception rules beat everything; the public suffix is the exception
    // rule with its leftmost label removed.
    for (std::size_t len = std::min(n, max_rule_labels_); len >= 1; --len) {
        const std::string candidate = join_labels(labels.subspan(n - len));
        if (exceptions_.contains(candidate))
            return len - 1;
    }
    std::size_t best = 0;
    for (std::size_t len = std::min(n, max_rule_labels_); len >= 1; --len) {
        const std::string candidate = join_labels(labels.subspan(n - len));
        if (rules_.contains(candidate)) {
            best = std::max(best, len);
            break;  // longest first, nothing longer left
        }
        if (len >= 2) {
            const std::string wildcard = "*." + join_labels(labels.subspan(n - len + 1));
            if (rules_.contains(wildcard)) {
                best = std::max(best, len);
                break;
            }
        }
    }
    if (best == 0)
        best = 1;  // implicit "*" rule: the rightmost label
    return best;
}

QnameExtractor::QnameExtractor(ExtractionConfig config) : config_(std::move(config)) {
    if (config_.label_depth < 2)
        throw ConfigError("label depth must be >= 2, got " + std::to_string(config_.label_depth));
    if (config_.suffix_list_path)
        suffixes_ = SuffixList::load(*config_.suffix_list_path);
}

StreamElement QnameExtractor::extract(std::string_view qname) const {
    if (qname.empty())
        throw ParseError("empty qname");
    std::string_view name = qname;
    if (name.back() == '.')
        name.remove_suffix(1);  // trailing root dot
    if (name.empty())
        throw ParseError("qname is only a root dot: '" + std::string(qname) + "'");
    if (name.size() > kMaxQnameLen)
        throw ParseError("qname longer than 255 chars: '" + std::string(qname) + "'");

    const std::vector<std::string> labels = split_labels(name);
    for (const std::string& label : labels) {
        if (label.empty())
            throw ParseError("empty label in qname: '" + std::string(qname) + "'");
        if (label.size() > kMaxLabelLen)
            throw ParseError("label longer than 63 chars in qname: '" + std::string(qname) + "'");
    }

    std::size_t domain_labels;
    if (!suffixes_.empty()) {
        std::vector<std::string> lower;
        lower.reserve(labels.size());
        for (const std::string& label : labels)
            lower.push_back(lowercase(label));
        domain_labels = std::min(labels.size(), suffixes_.public_suffix_labels(lower) + 1);
    } else {
        domain_labels = std::min<std::size_t>(labels.size(),
                                              static_cast<std::size_t>(config_.label_depth));
    }

    const std::size_t sub_labels = labels.size() - domain_labels;
    StreamElement element;
    element.domain = lowercase(join_labels(std::span(labels).subspan(sub_labels)));
    element.subdomain = join_labels(std::span(labels).subspan(0, sub_labels));
    return element;
}

bool looks_like_hostname(std::string_view s) {
    if (s.empty() || s.size() > kMaxQnameLen)
        return false;
    if (s.back() == '.')
        s.remove_suffix(1);
    if (s.empty())
        return false;
    std::size_t label_len = 0;
    for (char c : s) {
        if (c == '.') {
            if (label_len == 0)
                return false;
            label_len = 0;
            continue;
        }
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_';
        if (!ok)
            return false;
        if (++label_len > kMaxLabelLen)
            return false;
    }
    return label_len > 0;
}

StreamFormat parse_stream_format(std::string_view name) {
    if (name == "jsonl")
        return StreamFormat::jsonl;
    if (name == "csv")
        return StreamFormat::csv;
    throw ConfigError("unknown stream format: '" + std::string(name) + "'");
}

namespace {

bool valid_event(const DnsQueryEvent& event) {
    return !event.qname.empty() && event.qname.size() <= kMaxQnameLen &&
           std::isfinite(event.timestamp) && event.timestamp >= 0.0;
}

} // namespace

std::optional<DnsQueryEvent> parse_jsonl_event(std::string_view line) {
    const nlohmann::json row = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (!row.is_object())
        return std::nullopt;
    const auto ts = row.find("ts");
    const auto client = row.find("client");
    const auto qname = row.find("qname");
    if (ts == row.end() || !ts->is_number() || client == row.end() || !client->is_string() ||
        qname == row.end() || !qname->is_string())
        return std::nullopt;

    DnsQueryEvent event;
    event.timestamp = ts->get<double>();
    event.client_id = client->get<std::string>();
    event.qname = qname->get<std::string>();
    if (const auto label = row.find("label"); label != row.end() && label->is_string())
        event.label = label->get<std::string>();
    if (!valid_event(event))
        return std::nullopt;
    return event;
}

std::optional<DnsQueryEvent> parse_csv_event(std::string_view line, bool has_label) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    const std::size_t expected = has_label ? 4 : 3;
    if (fields.size() != expected)
        return std::nullopt;

    DnsQueryEvent event;
    const auto res =
        std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), event.timestamp);
    if (res.ec != std::errc() || res.ptr != fields[0].data() + fields[0].size())
        return std::nullopt;
    event.client_id = std::string(fields[1]);
    event.qname = std::string(fields[2]);
    if (has_label)
        event.label = std::string(fields[3]);
    if (!valid_event(event))
        return std::nullopt;
    return event;
}

EventReader::EventReader(const std::filesystem::path& path, StreamFormat format)
    : in_(path), format_(format) {
    if (!in_)
        throw IoError("cannot open input file: " + path.string());
}

std::optional<DnsQueryEvent> EventReader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (format_ == StreamFormat::csv && !header_parsed_) {
            header_parsed_ = true;
            if (line == "ts,client,qname") {
                csv_has_label_ = false;
            } else if (line == "ts,client,qname,label") {
                csv_has_label_ = true;
            } else {
                throw FormatError("bad csv header: '" + line + "'");
            }
            continue;
        }
        auto event = format_ == StreamFormat::jsonl ? parse_jsonl_event(line)
                                                    : parse_csv_event(line, csv_has_label_);
        if (event)
            return event;
        ++skipped_;
    }
    return std::nullopt;
}

std::vector<DnsQueryEvent> read_events(const std::filesystem::path& path, StreamFormat format,
                                       uint64_t* skipped_rows) {
    EventReader reader(path, format);
    std::vector<DnsQueryEvent> events;
    while (auto event = reader.next())
        events.push_back(std::move(*event));
    if (skipped_rows)
        *skipped_rows = reader.skipped_rows();
    return events;
}

std::string event_to_jsonl(const DnsQueryEvent& event) {
    nlohmann::json row;
    row["ts"] = event.timestamp;
    row["client"] = event.client_id;
    row["qname"] = event.qname;
    if (!event.label.empty())
        row["label"] = event.label;
    return row.dump();
}

std::string event_to_csv(const DnsQueryEvent& event) {
    std::string out = format_double(event.timestamp);
    out += ',';
    out += event.client_id;
    out += ',';
    out += event.qname;
    if (!event.label.empty()) {
        out += ',';
        out += event.label;
    }
    return out;
}

void write_events(std::ostream& out, std::span<const DnsQueryEvent> events, StreamFormat format) {
    if (format == StreamFormat::csv) {
        const bool any_label =
            std::any_of(events.begin(), events.end(),
                        [](const DnsQueryEvent& e) { return !e.label.empty(); });
        out << (any_label ? "ts,client,qname,label" : "ts,client,qname") << '\n';
        for (const DnsQueryEvent& event : events) {
            if (any_label && event.label.empty()) {
                out << event_to_csv(event) << ",\n";  // keep column count stable
            } else {
                out << event_to_csv(event) << '\n';
            }
        }
        return;
    }
    for (const DnsQueryEvent& event : events)
        out << event_to_jsonl(event) << '\n';
}

void write_events_file(const std::filesystem::path& path, std::span<const DnsQueryEvent> events,
                       StreamFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open output file: " + path.string());
    write_events(out, events, format);
}

} // namespace dnshh
