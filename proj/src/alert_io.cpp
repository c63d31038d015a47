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
#include "dnshh/alert_io.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"

#include "dnshh/errors.hpp"

namespace dnshh {

std::string alert_to_jsonl(const Alert& alert, std::optional<std::string_view> method) {
    nlohmann::json row;
    row["domain"] = alert.domain;
    row["window_start"] = alert.window_start;
    row["event_time"] = alert.event_time;
    row["estimated_bytes"] = alert.estimated_bytes;
    row["threshold_bytes"] = alert.threshold_bytes;
    if (!alert.triggering_client.empty())
        row["client"] = alert.triggering_client;
    row["suppressed_repeat_count"] = alert.suppressed_repeat_count;
    if (method)
        row["method"] = *method;
    return row.dump();
}

std::optional<Alert> parse_alert_jsonl(std::string_view line) {
    const nlohmann::json row = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (!row.is_object())
        return std::nullopt;
    Alert alert;
    const auto domain = row.find("domain");
    if (domain == row.end() || !domain->is_string())
        return std::nullopt;
    alert.domain = domain->get<std::string>();
    const auto number = [&](const char* key, double& out) {
        const auto it = row.find(key);
        if (it == row.end() || !it->is_number())
            return false;
        out = it->get<double>();
        return true;
    };
    if (!number("window_start", alert.window_start) ||
        !number("event_time", alert.event_time) ||
        !number("estimated_bytes", alert.estimated_bytes) ||
        !number("threshold_bytes", alert.threshold_bytes))
        return std::nullopt;
    if (const auto client = row.find("client"); client != row.end() && client->is_string())
        alert.triggering_client = client->get<std::string>();
    if (const auto n = row.find("suppressed_repeat_count");
        n != row.end() && n->is_number_unsigned())
        alert.suppressed_repeat_count = n->get<uint64_t>();
    return alert;
}

std::string alerts_to_jsonl(std::span<const Alert> alerts,
                            std::optional<std::string_view> method) {
    std::string out;
    for (const Alert& alert : alerts) {
        out += alert_to_jsonl(alert, method);
        out += '\n';
    }
    return out;
}

std::vector<Alert> read_alerts_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open alert file: " + path.string());
    std::vector<Alert> alerts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        if (auto alert = parse_alert_jsonl(line))
            alerts.push_back(std::move(*alert));
    }
    return alerts;
}

void sort_alerts(std::vector<Alert>& alerts) {
    std::stable_sort(alerts.begin(), alerts.end(), [](const Alert& a, const Alert& b) {
        if (a.window_start != b.window_start)
            return a.window_start < b.window_start;
        return a.domain < b.domain;
    });
}

} // namespace dnshh
