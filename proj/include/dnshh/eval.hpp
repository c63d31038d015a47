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

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dnshh/allowlist.hpp"
#include "dnshh/engine.hpp"
#include "dnshh/paxson.hpp"
#include "dnshh/stream.hpp"

namespace dnshh {

enum class Method : uint8_t { ibhh, paxson };

Method parse_method(std::string_view name);  // throws ConfigError
std::string_view method_name(Method method);

//! One full pass of a detector over an in-memory stream.
struct DetectorSetup {
    Method method = Method::ibhh;
    EngineConfig engine;
    int zlib_level = 6;
    bool paxson_per_client_key = true;
    AllowlistMode allowlist_mode = AllowlistMode::post;
    std::vector<const Allowlist*> allowlists;
};

struct DetectorRun {
    std::vector<Alert> alerts;      // after post-filtering, sorted
    std::vector<Alert> raw_alerts;  // before allowlist suppression, sorted
    uint64_t parse_errors = 0;
    uint64_t prefilter_dropped = 0;
    uint64_t postfilter_suppressed = 0;
};

DetectorRun run_detector(const DetectorSetup& setup, std::span<const DnsQueryEvent> events,
                         const QnameExtractor& extractor);

//! Threshold candidates: fine steps up to fine_max, then coarse steps up to
//! max. Defaults cover 0.1..1 by 0.1 and 2..400 by 1.
struct TuningGrid {
    double fine_step = 0.1;
    double fine_max = 1.0;
    double coarse_step = 1.0;
    double max = 400.0;

    std::vector<double> candidates() const;
};

struct TuneResult {
    double threshold_bps = 0.0;
    double achieved_fpr = 0.0;
    bool attainable = false;
    //! Lowest FPR seen on the grid, for diagnostics when unattainable.
    double best_fpr = 1.0;
    double best_fpr_threshold = 0.0;
};

/*!
 * Smallest grid threshold whose run over the (assumed benign) training
 * stream alerts at most an acceptable fraction of hosts. Hosts are counted
 * by alert attribution when the method provides one, otherwise by the
 * fraction of distinct domains alerted.
 */
TuneResult tune_threshold(const DetectorSetup& setup, std::span<const DnsQueryEvent> events,
                          const QnameExtractor& extractor, double acceptable_fpr,
                          const TuningGrid& grid = {});

struct ExperimentConfig {
    Method method = Method::ibhh;
    EngineConfig engine;  // detection_threshold_bps ignored when tuning
    ExtractionConfig extraction;
    int zlib_level = 6;
    bool paxson_per_client_key = true;

    std::vector<std::filesystem::path> allowlist_paths;  // static toplists
    AllowlistMode allowlist_mode = AllowlistMode::post;
    bool use_peacetime = true;  // only when a peacetime stream is given

    double acceptable_fpr = 0.01;
    TuningGrid grid;
    //! Skip tuning and use this threshold directly.
    std::optional<double> threshold_bps_override;

    std::filesystem::path train_path, peacetime_path, test_path;
    StreamFormat format = StreamFormat::jsonl;
    uint64_t seed = 0;  // echoed into reports
};

struct MetricsReport {
    std::string method;
    double acceptable_fpr = 0.0;
    double tuned_threshold_bps = 0.0;  // the detectable exfiltration rate
    bool threshold_attainable = true;
    uint64_t seed = 0;

    uint64_t tp_domains = 0, fp_domains = 0;
    uint64_t tp_queries = 0, fp_queries = 0;
    double host_tpr = 0.0, host_fpr = 0.0;
    bool host_metrics_valid = false;
    std::string warning;

    //! Same stream without allowlist suppression, exposing the lists' effect.
    uint64_t fp_domains_unfiltered = 0;
    double host_fpr_unfiltered = 0.0;

    std::map<double, uint64_t> per_window_alert_counts;
    std::vector<std::string> tp_domain_list, fp_domain_list;

    std::string to_json() const;
};

//! Ground truth extracted from a labeled stream: domains and hosts touched
//! by events whose label names an attack tool.
struct StreamLabels {
    std::set<std::string> attack_domains;
    std::set<std::string> infected_hosts;
    std::set<std::string> all_hosts;
    bool any_labels = false;
};

StreamLabels collect_labels(std::span<const DnsQueryEvent> events,
                            const QnameExtractor& extractor);

//! Pure function of the alert set and the labeled stream; reports are
//! exactly recomputable from emitted alert JSONL plus the input.
MetricsReport compute_metrics(std::span<const Alert> alerts, const StreamLabels& labels);

MetricsReport run_experiment(const ExperimentConfig& config);

//! In-memory variant; empty spans stand for absent datasets.
MetricsReport run_experiment_events(const ExperimentConfig& config,
                                    std::span<const DnsQueryEvent> train,
                                    std::span<const DnsQueryEvent> peacetime,
                                    std::span<const DnsQueryEvent> test);

//! Side-by-side CSV (one row per report) and a human-readable table. The
//! CSV always carries the header, even for zero reports.
std::string comparison_csv(std::span<const MetricsReport> reports);
std::string comparison_table(std::span<const MetricsReport> reports);

} // namespace dnshh
