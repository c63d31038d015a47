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

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dnshh/engine.hpp"

namespace dnshh {

//! One JSONL record: domain, window_start, event_time, estimated_bytes,
//! threshold_bytes, client (omitted when empty), suppressed_repeat_count,
//! plus a "method" field when one is given (the baseline tags its alerts).
std::string alert_to_jsonl(const Alert& alert, std::optional<std::string_view> method = {});

//! Inverse of alert_to_jsonl; std::nullopt on malformed input.
std::optional<Alert> parse_alert_jsonl(std::string_view line);

std::string alerts_to_jsonl(std::span<const Alert> alerts,
                            std::optional<std::string_view> method = {});

std::vector<Alert> read_alerts_jsonl(const std::filesystem::path& path);

//! Deterministic output order for merged or batched alert sets.
void sort_alerts(std::vector<Alert>& alerts);

} // namespace dnshh
