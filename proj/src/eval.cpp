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
#include "dnshh/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "dnshh/alert_io.hpp"
#include "dnshh/errors.hpp"

namespace dnshh {

Method parse_method(std::string_view name) {
    if (name == "ibhh")
        return Method::ibhh;
    if (name == "paxson")
        return Method::paxson;
    throw ConfigError("unknown method: '" + std::string(name) + "'");
}

std::string_view method_name(Method method) {
    return method == Method::ibhh ? "ibhh" : "paxson";
}

namespace {

Allowlist merge_lists(std::span<const Allowlist* const> lists) {
    std::set<std::string> merged;
    for (const Allowlist* list : lists) {
        if (list)
            merged.insert(list->entries().begin(), list->entries().end());
    }
    return Allowlist(std::move(merged), AllowlistSource::static_toplist);
}

} // namespace

DetectorRun run_detector(const DetectorSetup& setup, std::span<const DnsQueryEvent> events,
                         const QnameExtractor& extractor) {
    DetectorRun run;
    const bool pre = setup.allowlist_mode == AllowlistMode::pre && !setup.allowlists.empty();
    const Allowlist merged = pre ? merge_lists(setup.allowlists) : Allowlist{};

    std::vector<Alert> alerts;
    if (setup.method == Method::ibhh) {
        InfoHeavyHitters engine{setup.engine};
        if (pre)
            engine.set_prefilter(&merged);
        for (const DnsQueryEvent& event : events) {
            StreamElement element;
            try {
                element = extractor.extract(event.qname);
            } catch (const ParseError&) {
                ++run.parse_errors;
                continue;
            }
            engine.process(element, event.timestamp, event.client_id);
            if (engine.has_finalized_alerts()) {
                auto batch = engine.take_finalized_alerts();
                alerts.insert(alerts.end(), batch.begin(), batch.end());
            }
        }
        auto tail = engine.finalize();
        alerts.insert(alerts.end(), tail.begin(), tail.end());
        run.prefilter_dropped = engine.prefilter_dropped();
    } else {
        PaxsonConfig config;
        config.window_seconds = setup.engine.window_seconds;
        config.detection_threshold_bps = setup.engine.detection_threshold_bps;
        config.zlib_level = setup.zlib_level;
        config.per_client_key = setup.paxson_per_client_key;
        config.initial_window_start = setup.engine.initial_window_start;
        CompressionBaseline baseline{config};
        for (const DnsQueryEvent& event : events) {
            StreamElement element;
            try {
                element = extractor.extract(event.qname);
            } catch (const ParseError&) {
                ++run.parse_errors;
                continue;
            }
            if (pre && merged.contains(element.domain)) {
                ++run.prefilter_dropped;
                continue;
            }
            auto batch = baseline.observe(element, event.timestamp, event.client_id);
            alerts.insert(alerts.end(), batch.begin(), batch.end());
        }
        auto tail = baseline.finalize();
        alerts.insert(alerts.end(), tail.begin(), tail.end());
    }

    sort_alerts(alerts);
    run.raw_alerts = alerts;
    if (setup.allowlist_mode == AllowlistMode::post && !setup.allowlists.empty()) {
        std::vector<Alert> kept;
        kept.reserve(alerts.size());
        for (Alert& alert : alerts) {
            if (is_allowed(setup.allowlists, alert.domain)) {
                ++run.postfilter_suppressed;
            } else {
                kept.push_back(std::move(alert));
            }
        }
        run.alerts = std::move(kept);
    } else {
        run.alerts = std::move(alerts);
    }
    return run;
}

std::vector<double> TuningGrid::candidates() const {
    std::vector<double> out;
    const auto fine_steps = static_cast<long>(std::llround(fine_max / fine_step));
    for (long i = 1; i <= fine_steps; ++i)
        out.push_back(static_cast<double>(i) * fine_step);
    for (double v = fine_max + coarse_step; v <= max + 1e-12; v += coarse_step)
        out.push_back(v);
    return out;
}

namespace {

//! Fraction of hosts alerted when alerts carry a client, otherwise the
//! fraction of distinct stream domains alerted.
double benign_alert_fraction(std::span<const Alert> alerts,
                             std::span<const DnsQueryEvent> events,
                             const QnameExtractor& extractor) {
    const bool attributable =
        std::all_of(alerts.begin(), alerts.end(),
                    [](const Alert& a) { return !a.triggering_client.empty(); });
    if (attributable) {
        std::set<std::string> hosts;
        for (const DnsQueryEvent& event : events)
            hosts.insert(event.client_id);
        if (hosts.empty())
            return 0.0;
        std::set<std::string> alerted;
        for (const Alert& alert : alerts)
            alerted.insert(alert.triggering_client);
        return static_cast<double>(alerted.size()) / static_cast<double>(hosts.size());
    }
    std::set<std::string> domains;
    for (const DnsQueryEvent& event : events) {
        try {
            domains.insert(extractor.extract(event.qname).domain);
        } catch (const ParseError&) {
        }
    }
    if (domains.empty())
        return 0.0;
    std::set<std::string> alerted;
    for (const Alert& alert : alerts)
        alerted.insert(alert.domain);
    return static_cast<double>(alerted.size()) / static_cast<double>(domains.size());
}

} // namespace

TuneResult tune_threshold(const DetectorSetup& setup, std::span<const DnsQueryEvent> events,
                          const QnameExtractor& extractor, double acceptable_fpr,
                          const TuningGrid& grid) {
    if (!(acceptable_fpr > 0.0) || !(acceptable_fpr < 1.0))
        throw ConfigError("acceptable FPR must be inside (0, 1)");

    TuneResult result;
    for (double threshold : grid.candidates()) {
        DetectorSetup candidate = setup;
        candidate.engine.detection_threshold_bps = threshold;
        const DetectorRun run = run_detector(candidate, events, extractor);
        const double fpr = benign_alert_fraction(run.alerts, events, extractor);
        if (fpr < result.best_fpr) {
            result.best_fpr = fpr;
            result.best_fpr_threshold = threshold;
        }
        if (fpr <= acceptable_fpr) {
            result.threshold_bps = threshold;
            result.achieved_fpr = fpr;
            result.attainable = true;
            return result;
        }
    }
    result.threshold_bps = result.best_fpr_threshold;
    result.achieved_fpr = result.best_fpr;
    result.attainable = false;
    return result;
}

StreamLabels collect_labels(std::span<const DnsQueryEvent> events,
                            const QnameExtractor& extractor) {
    StreamLabels labels;
    for (const DnsQueryEvent& event : events) {
        labels.all_hosts.insert(event.client_id);
        if (!event.label.empty())
            labels.any_labels = true;
        if (event.label.empty() || event.label == "benign")
            continue;
        labels.infected_hosts.insert(event.client_id);
        try {
            labels.attack_domains.insert(extractor.extract(event.qname).domain);
        } catch (const ParseError&) {
        }
    }
    return labels;
}

MetricsReport compute_metrics(std::span<const Alert> alerts, const StreamLabels& labels) {
    MetricsReport report;

    std::set<std::string> tp_domains, fp_domains;
    std::set<std::string> alerted_hosts;
    bool attributable = true;
    for (const Alert& alert : alerts) {
        const bool tp = labels.attack_domains.contains(alert.domain);
        (tp ? tp_domains : fp_domains).insert(alert.domain);
        const uint64_t queries = 1 + alert.suppressed_repeat_count;
        (tp ? report.tp_queries : report.fp_queries) += queries;
        if (alert.triggering_client.empty()) {
            attributable = false;
        } else {
            alerted_hosts.insert(alert.triggering_client);
        }
        report.per_window_alert_counts[alert.window_start] += 1;
    }
    report.tp_domains = tp_domains.size();
    report.fp_domains = fp_domains.size();
    report.tp_domain_list.assign(tp_domains.begin(), tp_domains.end());
    report.fp_domain_list.assign(fp_domains.begin(), fp_domains.end());

    if (!labels.any_labels) {
        report.host_metrics_valid = false;
        report.warning = "stream carries no labels; host metrics omitted";
        return report;
    }
    if (!attributable) {
        report.host_metrics_valid = false;
        report.warning = "alerts lack client attribution; host metrics omitted";
        return report;
    }

    uint64_t tp_hosts = 0, fp_hosts = 0;
    for (const std::string& host : alerted_hosts) {
        if (labels.infected_hosts.contains(host)) {
            ++tp_hosts;
        } else {
            ++fp_hosts;
        }
    }
    const std::size_t uninfected =
        labels.all_hosts.size() - labels.infected_hosts.size();
    report.host_tpr = labels.infected_hosts.empty()
                          ? 0.0
                          : static_cast<double>(tp_hosts) /
                                static_cast<double>(labels.infected_hosts.size());
    report.host_fpr = uninfected == 0
                          ? 0.0
                          : static_cast<double>(fp_hosts) / static_cast<double>(uninfected);
    report.host_metrics_valid = true;
    return report;
}

MetricsReport run_experiment_events(const ExperimentConfig& config,
                                    std::span<const DnsQueryEvent> train,
                                    std::span<const DnsQueryEvent> peacetime,
                                    std::span<const DnsQueryEvent> test) {
    const QnameExtractor extractor{config.extraction};

    DetectorSetup setup;
    setup.method = config.method;
    setup.engine = config.engine;
    setup.zlib_level = config.zlib_level;
    setup.paxson_per_client_key = config.paxson_per_client_key;
    setup.allowlist_mode = config.allowlist_mode;

    std::vector<Allowlist> owned_lists;
    owned_lists.reserve(config.allowlist_paths.size() + 1);  // + peacetime slot
    for (const auto& path : config.allowlist_paths)
        owned_lists.push_back(Allowlist::load_toplist(path, UINT64_MAX, extractor));

    // Tune on the training stream before any peacetime learning; static
    // toplists apply during tuning, the peacetime list is built afterwards.
    double threshold = config.engine.detection_threshold_bps;
    bool attainable = true;
    if (config.threshold_bps_override) {
        threshold = *config.threshold_bps_override;
    } else if (!train.empty()) {
        DetectorSetup tune_setup = setup;
        for (const Allowlist& list : owned_lists)
            tune_setup.allowlists.push_back(&list);
        const TuneResult tuned =
            tune_threshold(tune_setup, train, extractor, config.acceptable_fpr, config.grid);
        threshold = tuned.threshold_bps;
        attainable = tuned.attainable;
    }
    setup.engine.detection_threshold_bps = threshold;

    if (config.use_peacetime && !peacetime.empty()) {
        EngineConfig peace_config = config.engine;
        peace_config.detection_threshold_bps = threshold;
        owned_lists.push_back(generate_peacetime(peace_config, peacetime, extractor));
    }
    for (const Allowlist& list : owned_lists)
        setup.allowlists.push_back(&list);

    const DetectorRun run = run_detector(setup, test, extractor);
    const StreamLabels labels = collect_labels(test, extractor);

    MetricsReport report = compute_metrics(run.alerts, labels);
    report.method = std::string(method_name(config.method));
    report.acceptable_fpr = config.acceptable_fpr;
    report.tuned_threshold_bps = threshold;
    report.threshold_attainable = attainable;
    report.seed = config.seed;

    const MetricsReport unfiltered = compute_metrics(run.raw_alerts, labels);
    report.fp_domains_unfiltered = unfiltered.fp_domains;
    report.host_fpr_unfiltered = unfiltered.host_fpr;
    return report;
}

MetricsReport run_experiment(const ExperimentConfig& config) {
    std::vector<DnsQueryEvent> train, peacetime, test;
    if (!config.train_path.empty())
        train = read_events(config.train_path, config.format);
    if (!config.peacetime_path.empty())
        peacetime = read_events(config.peacetime_path, config.format);
    if (config.test_path.empty())
        throw ConfigError("experiment needs a test stream");
    test = read_events(config.test_path, config.format);
    return run_experiment_events(config, train, peacetime, test);
}

std::string MetricsReport::to_json() const {
    nlohmann::json out;
    out["method"] = method;
    out["acceptable_fpr"] = acceptable_fpr;
    out["der_bps"] = tuned_threshold_bps;
    out["threshold_attainable"] = threshold_attainable;
    out["seed"] = seed;
    out["tp_domains"] = tp_domains;
    out["fp_domains"] = fp_domains;
    out["tp_queries"] = tp_queries;
    out["fp_queries"] = fp_queries;
    out["host_metrics_valid"] = host_metrics_valid;
    if (host_metrics_valid) {
        out["host_tpr"] = host_tpr;
        out["host_fpr"] = host_fpr;
        out["host_fpr_unfiltered"] = host_fpr_unfiltered;
    }
    if (!warning.empty())
        out["warning"] = warning;
    out["fp_domains_unfiltered"] = fp_domains_unfiltered;
    nlohmann::json windows = nlohmann::json::array();
    for (const auto& [window, count] : per_window_alert_counts)
        windows.push_back({{"window_start", window}, {"alerts", count}});
    out["per_window_alert_counts"] = windows;
    out["tp_domain_list"] = tp_domain_list;
    out["fp_domain_list"] = fp_domain_list;
    return out.dump();
}

namespace {

std::string format_metric(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

} // namespace

std::string comparison_csv(std::span<const MetricsReport> reports) {
    std::string out =
        "method,acceptable_fpr,der_bps,threshold_attainable,tp_domains,fp_domains,"
        "tp_queries,fp_queries,host_tpr,host_fpr,host_fpr_unfiltered,fp_domains_unfiltered,"
        "seed\n";
    for (const MetricsReport& report : reports) {
        out += report.method;
        out += ',' + format_metric(report.acceptable_fpr);
        out += ',' + format_metric(report.tuned_threshold_bps);
        out += report.threshold_attainable ? ",1" : ",0";
        out += ',' + std::to_string(report.tp_domains);
        out += ',' + std::to_string(report.fp_domains);
        out += ',' + std::to_string(report.tp_queries);
        out += ',' + std::to_string(report.fp_queries);
        if (report.host_metrics_valid) {
            out += ',' + format_metric(report.host_tpr);
            out += ',' + format_metric(report.host_fpr);
            out += ',' + format_metric(report.host_fpr_unfiltered);
        } else {
            out += ",n/a,n/a,n/a";
        }
        out += ',' + std::to_string(report.fp_domains_unfiltered);
        out += ',' + std::to_string(report.seed);
        out += '\n';
    }
    return out;
}

std::string comparison_table(std::span<const MetricsReport> reports) {
    std::ostringstream out;
    out << "method    acc_fpr    der_bps    tpr      fpr      tp_dom  fp_dom\n";
    for (const MetricsReport& report : reports) {
        out << report.method;
        for (std::size_t i = report.method.size(); i < 10; ++i)
            out << ' ';
        std::string fields[4] = {
            format_metric(report.acceptable_fpr), format_metric(report.tuned_threshold_bps),
            report.host_metrics_valid ? format_metric(report.host_tpr) : "n/a",
            report.host_metrics_valid ? format_metric(report.host_fpr) : "n/a"};
        const std::size_t widths[4] = {11, 11, 9, 9};
        for (int i = 0; i < 4; ++i) {
            out << fields[i];
            for (std::size_t j = fields[i].size(); j < widths[i]; ++j)
                out << ' ';
        }
        out << report.tp_domains << "       " << report.fp_domains << '\n';
    }
    return out.str();
}

} // namespace dnshh
