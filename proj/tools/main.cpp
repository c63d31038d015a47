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
#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "dnshh/alert_io.hpp"
#include "dnshh/allowlist.hpp"
#include "dnshh/engine.hpp"
#include "dnshh/errors.hpp"
#include "dnshh/eval.hpp"
#include "dnshh/hash.hpp"
#include "dnshh/paxson.hpp"
#include "dnshh/stream.hpp"
#include "dnshh/traffic_gen.hpp"

namespace {

using namespace dnshh;

//! Fixed routing seed: shard assignment must not depend on --hash-seed so a
//! resharded replay stays comparable.
constexpr uint64_t kShardRouteSeed = 0x9e3779b97f4a7c15ULL;

//! Options shared by the detection-style subcommands. Flag names are part of
//! the tool's interface; keep them stable.
struct CommonOpts {
    std::string input;
    std::string format = "jsonl";
    std::size_t cache_size = 1000;
    double window_secs = 120.0;
    double threshold_bps = 0.0;
    std::vector<std::string> allowlists;
    std::string allowlist_mode = "post";
    int label_depth = 2;
    std::string suffix_list;
    uint64_t hash_seed = 0;
    int hll_precision = 12;
    std::string index_encoding = "paper";
    std::string method = "ibhh";
    std::string out;
    uint64_t seed = 0;
    unsigned shards = 1;
};

void add_common_flags(CLI::App& cmd, CommonOpts& opts, bool needs_input) {
    auto* input = cmd.add_option("--input", opts.input, "input stream file");
    if (needs_input)
        input->required();
    cmd.add_option("--format", opts.format, "input stream format")
        ->check(CLI::IsMember({"jsonl", "csv"}));
    cmd.add_option("--cache-size", opts.cache_size, "counter cache capacity (k)")
        ->capture_default_str();
    cmd.add_option("--window-secs", opts.window_secs, "detection window length in seconds")
        ->capture_default_str();
    cmd.add_option("--threshold-bps", opts.threshold_bps,
                   "detection threshold in bytes per second");
    cmd.add_option("--allowlist", opts.allowlists,
                   "allowlist file (repeatable; ranked CSV or one domain per line)");
    cmd.add_option("--allowlist-mode", opts.allowlist_mode, "apply lists pre or post detection")
        ->check(CLI::IsMember({"pre", "post"}));
    cmd.add_option("--label-depth", opts.label_depth,
                   "trailing labels forming the registered domain")
        ->capture_default_str();
    cmd.add_option("--suffix-list", opts.suffix_list, "public suffix list file");
    cmd.add_option("--hash-seed", opts.hash_seed, "seed for the pair and sketch hashes")
        ->capture_default_str();
    cmd.add_option("--hll-precision", opts.hll_precision, "sketch precision bits")
        ->capture_default_str();
    cmd.add_option("--index-encoding", opts.index_encoding,
                   "byte-index encoding inside the sketch keys")
        ->check(CLI::IsMember({"paper", "fixed"}));
    cmd.add_option("--method", opts.method, "detector to run")
        ->check(CLI::IsMember({"ibhh", "paxson"}));
    cmd.add_option("--out", opts.out, "output path (default stdout)");
    cmd.add_option("--seed", opts.seed, "generator seed")->capture_default_str();
    cmd.add_option("--shards", opts.shards, "partition domains across this many engines")
        ->capture_default_str();
}

EngineConfig engine_config_from(const CommonOpts& opts) {
    EngineConfig config;
    config.cache_size_k = opts.cache_size;
    config.detection_threshold_bps = opts.threshold_bps;
    config.window_seconds = opts.window_secs;
    config.pair_hash_seed = opts.hash_seed;
    config.hll_precision = opts.hll_precision;
    config.hll_hash_seed = splitmix64(opts.hash_seed);
    config.index_encoding = parse_index_encoding(opts.index_encoding);
    return config;
}

ExtractionConfig extraction_config_from(const CommonOpts& opts) {
    ExtractionConfig config;
    config.label_depth = opts.label_depth;
    if (!opts.suffix_list.empty())
        config.suffix_list_path = opts.suffix_list;
    return config;
}

std::vector<Allowlist> load_allowlists(const CommonOpts& opts, const QnameExtractor& extractor,
                                       uint64_t* skipped) {
    std::vector<Allowlist> lists;
    lists.reserve(opts.allowlists.size());
    for (const std::string& path : opts.allowlists) {
        uint64_t rows = 0;
        lists.push_back(Allowlist::load_toplist(path, UINT64_MAX, extractor, &rows));
        if (skipped)
            *skipped += rows;
    }
    return lists;
}

//! Every run echoes its effective configuration so results can be replayed.
void echo_config(const CLI::App& cmd) {
    std::ostringstream out;
    out << "# config " << cmd.get_name() << '\n';
    for (const CLI::Option* opt : cmd.get_options()) {
        const std::string name = opt->get_name();
        if (name.empty() || name == "--help" || name == "--config")
            continue;
        std::string value = opt->count() ? opt->results().at(0) : opt->get_default_str();
        if (opt->count() > 1) {
            value.clear();
            for (const auto& item : opt->results())
                value += (value.empty() ? "" : ",") + item;
        }
        out << name.substr(2) << '=' << value << '\n';
    }
    std::cerr << out.str();
}

struct OutputTarget {
    explicit OutputTarget(const std::string& path) {
        if (!path.empty()) {
            file.emplace(path, std::ios::binary);
            if (!*file)
                throw IoError("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file ? *file : std::cout; }
    std::optional<std::ofstream> file;
};

// ---------------------------------------------------------------------------
// sharded detection: one engine per domain partition, one worker thread each

struct ShardItem {
    StreamElement element;
    double time = 0.0;
    std::string client;
};

//! Bounded batch queue between the reader and one shard worker.
class ShardQueue {
public:
    void push(std::vector<ShardItem> batch) {
        std::unique_lock lock(mu_);
        cv_push_.wait(lock, [&] { return batches_.size() < kMaxBatches; });
        batches_.push_back(std::move(batch));
        cv_pop_.notify_one();
    }

    bool pop(std::vector<ShardItem>& out) {
        std::unique_lock lock(mu_);
        cv_pop_.wait(lock, [&] { return !batches_.empty() || closed_; });
        if (batches_.empty())
            return false;
        out = std::move(batches_.front());
        batches_.pop_front();
        cv_push_.notify_one();
        return true;
    }

    void close() {
        std::scoped_lock lock(mu_);
        closed_ = true;
        cv_pop_.notify_all();
    }

private:
    static constexpr std::size_t kMaxBatches = 8;
    std::mutex mu_;
    std::condition_variable cv_push_, cv_pop_;
    std::deque<std::vector<ShardItem>> batches_;
    bool closed_ = false;
};

struct Shard {
    explicit Shard(const EngineConfig& config) : engine(config) {}
    InfoHeavyHitters engine;
    ShardQueue queue;
    std::vector<Alert> alerts;  // worker-owned until join
    std::thread worker;
};

// ---------------------------------------------------------------------------
// detect

int cmd_detect(const CommonOpts& opts) {
    const QnameExtractor extractor{extraction_config_from(opts)};
    uint64_t allowlist_skipped_rows = 0;
    const std::vector<Allowlist> lists =
        load_allowlists(opts, extractor, &allowlist_skipped_rows);
    std::vector<const Allowlist*> list_ptrs;
    for (const Allowlist& list : lists)
        list_ptrs.push_back(&list);
    const AllowlistMode mode = parse_allowlist_mode(opts.allowlist_mode);
    const Method method = parse_method(opts.method);

    OutputTarget target(opts.out);
    std::ostream& out = target.stream();

    const Allowlist pre_merged = [&] {
        std::set<std::string> merged;
        if (mode == AllowlistMode::pre) {
            for (const Allowlist& list : lists)
                merged.insert(list.entries().begin(), list.entries().end());
        }
        return Allowlist(std::move(merged), AllowlistSource::static_toplist);
    }();

    uint64_t parse_errors = 0;
    uint64_t events = 0;
    uint64_t alerts_written = 0;
    uint64_t suppressed_repeats = 0;
    uint64_t postfilter_suppressed = 0;
    uint64_t prefilter_dropped = 0;

    const auto emit = [&](std::span<const Alert> batch,
                          std::optional<std::string_view> method_tag) {
        for (const Alert& alert : batch) {
            if (mode == AllowlistMode::post && is_allowed(list_ptrs, alert.domain)) {
                ++postfilter_suppressed;
                continue;
            }
            out << alert_to_jsonl(alert, method_tag) << '\n';
            ++alerts_written;
            suppressed_repeats += alert.suppressed_repeat_count;
        }
    };

    EventReader reader(opts.input, parse_stream_format(opts.format));

    if (method == Method::paxson) {
        PaxsonConfig config;
        config.window_seconds = opts.window_secs;
        config.detection_threshold_bps = opts.threshold_bps;
        CompressionBaseline baseline{config};
        while (auto event = reader.next()) {
            ++events;
            StreamElement element;
            try {
                element = extractor.extract(event->qname);
            } catch (const ParseError&) {
                ++parse_errors;
                continue;
            }
            if (mode == AllowlistMode::pre && pre_merged.contains(element.domain)) {
                ++prefilter_dropped;
                continue;
            }
            emit(baseline.observe(element, event->timestamp, event->client_id), "paxson");
        }
        emit(baseline.finalize(), "paxson");
    } else if (opts.shards <= 1) {
        // streaming path: alerts go out as their windows close
        InfoHeavyHitters engine{engine_config_from(opts)};
        if (mode == AllowlistMode::pre)
            engine.set_prefilter(&pre_merged);
        while (auto event = reader.next()) {
            ++events;
            StreamElement element;
            try {
                element = extractor.extract(event->qname);
            } catch (const ParseError&) {
                ++parse_errors;
                continue;
            }
            engine.process(element, event->timestamp, event->client_id);
            if (engine.has_finalized_alerts())
                emit(engine.take_finalized_alerts(), std::nullopt);
        }
        emit(engine.finalize(), std::nullopt);
        prefilter_dropped = engine.prefilter_dropped();
    } else {
        // domain-partitioned worker threads; per-shard alert streams are
        // merged and sorted once the input is exhausted
        EngineConfig config = engine_config_from(opts);
        {
            InfoHeavyHitters probe{config};  // fail fast on bad settings
            (void)probe;
        }
        const unsigned shards = opts.shards;
        std::vector<std::unique_ptr<Shard>> workers;
        std::vector<std::vector<ShardItem>> batches(shards);
        constexpr std::size_t kBatchSize = 1024;

        // all shards share one window clock anchored at the first event, so
        // a resharded replay reports the same window boundaries
        const auto ensure_workers = [&](double first_event_time) {
            if (!workers.empty())
                return;
            if (!config.initial_window_start)
                config.initial_window_start = first_event_time;
            for (unsigned s = 0; s < shards; ++s) {
                workers.push_back(std::make_unique<Shard>(config));
                Shard* shard = workers.back().get();
                if (mode == AllowlistMode::pre)
                    shard->engine.set_prefilter(&pre_merged);
                shard->worker = std::thread([shard] {
                    std::vector<ShardItem> batch;
                    while (shard->queue.pop(batch)) {
                        for (const ShardItem& item : batch)
                            shard->engine.process(item.element, item.time, item.client);
                        if (shard->engine.has_finalized_alerts()) {
                            auto done = shard->engine.take_finalized_alerts();
                            shard->alerts.insert(shard->alerts.end(), done.begin(), done.end());
                        }
                    }
                });
            }
        };

        while (auto event = reader.next()) {
            ++events;
            StreamElement element;
            try {
                element = extractor.extract(event->qname);
            } catch (const ParseError&) {
                ++parse_errors;
                continue;
            }
            ensure_workers(event->timestamp);
            const std::size_t shard = hash64(element.domain, kShardRouteSeed) % shards;
            batches[shard].push_back(
                {std::move(element), event->timestamp, std::move(event->client_id)});
            if (batches[shard].size() >= kBatchSize) {
                workers[shard]->queue.push(std::move(batches[shard]));
                batches[shard] = {};
            }
        }
        for (unsigned s = 0; s < workers.size(); ++s) {
            if (!batches[s].empty())
                workers[s]->queue.push(std::move(batches[s]));
            workers[s]->queue.close();
        }
        std::vector<Alert> pending;
        for (auto& shard : workers) {
            shard->worker.join();
            auto tail = shard->engine.finalize();
            pending.insert(pending.end(), shard->alerts.begin(), shard->alerts.end());
            pending.insert(pending.end(), tail.begin(), tail.end());
            prefilter_dropped += shard->engine.prefilter_dropped();
        }
        sort_alerts(pending);
        emit(pending, std::nullopt);
    }

    std::cerr << "events=" << events << " skipped_rows=" << reader.skipped_rows()
              << " parse_errors=" << parse_errors << " alerts=" << alerts_written
              << " suppressed_repeats=" << suppressed_repeats
              << " allowlist_suppressed=" << postfilter_suppressed
              << " prefilter_dropped=" << prefilter_dropped
              << " allowlist_rows_skipped=" << allowlist_skipped_rows << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// peacetime

int cmd_peacetime(const CommonOpts& opts) {
    const QnameExtractor extractor{extraction_config_from(opts)};
    const std::vector<DnsQueryEvent> events =
        read_events(opts.input, parse_stream_format(opts.format));
    EngineConfig config = engine_config_from(opts);
    uint64_t parse_errors = 0;
    const Allowlist list = generate_peacetime(config, events, extractor, &parse_errors);
    if (opts.out.empty())
        throw ConfigError("peacetime needs --out for the allowlist file");
    list.save(opts.out);
    std::cerr << "peacetime_domains=" << list.size() << " events=" << events.size()
              << " parse_errors=" << parse_errors << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// tune

int cmd_tune(const CommonOpts& opts, double acceptable_fpr, const TuningGrid& grid) {
    const QnameExtractor extractor{extraction_config_from(opts)};
    const std::vector<DnsQueryEvent> events =
        read_events(opts.input, parse_stream_format(opts.format));
    const std::vector<Allowlist> lists = load_allowlists(opts, extractor, nullptr);

    DetectorSetup setup;
    setup.method = parse_method(opts.method);
    setup.engine = engine_config_from(opts);
    setup.allowlist_mode = parse_allowlist_mode(opts.allowlist_mode);
    for (const Allowlist& list : lists)
        setup.allowlists.push_back(&list);

    const TuneResult result = tune_threshold(setup, events, extractor, acceptable_fpr, grid);
    OutputTarget target(opts.out);
    target.stream() << "threshold_bps=" << result.threshold_bps
                    << " achieved_fpr=" << result.achieved_fpr
                    << " attainable=" << (result.attainable ? "true" : "false") << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// gen

struct GenOpts {
    CommonOpts common;
    bool benign = false;
    std::size_t clients = 100;
    std::size_t domains = 1000;
    double zipf_s = 1.1;
    double duration = 600.0;
    double rate = 100.0;
    double mix_empty = 0.4;
    double mix_pool = 0.5;
    double mix_unique = 0.1;
    std::size_t pool_size = 5;
    std::vector<std::string> attacks;
};

AttackSpec parse_attack_arg(const std::string& arg) {
    AttackSpec spec;
    std::stringstream in(arg);
    std::string pair;
    while (std::getline(in, pair, ',')) {
        const std::size_t eq = pair.find('=');
        if (eq == std::string::npos)
            throw ConfigError("bad --attack entry (want key=value): '" + pair + "'");
        const std::string key = pair.substr(0, eq);
        const std::string value = pair.substr(eq + 1);
        if (key == "tool") {
            spec.tool = parse_attack_tool(value);
        } else if (key == "domain") {
            spec.domain = value;
        } else if (key == "client") {
            spec.client_id = value;
        } else if (key == "start") {
            spec.start_time = std::stod(value);
        } else if (key == "count") {
            spec.query_count = static_cast<uint32_t>(std::stoul(value));
        } else if (key == "gap") {
            spec.iodine_gap_seconds = std::stod(value);
        } else if (key == "subdomain-len") {
            spec.fpos_subdomain_len = std::stoul(value);
        } else if (key == "token-len") {
            spec.denis_token_len = std::stoul(value);
        } else {
            throw ConfigError("unknown --attack key: '" + key + "'");
        }
    }
    return spec;
}

int cmd_gen(const GenOpts& opts) {
    std::vector<std::vector<DnsQueryEvent>> streams;
    if (opts.benign) {
        BenignSpec spec;
        spec.n_clients = opts.clients;
        spec.n_domains = opts.domains;
        spec.zipf_exponent = opts.zipf_s;
        spec.duration_seconds = opts.duration;
        spec.mean_rate_qps = opts.rate;
        spec.mixture = {opts.mix_empty, opts.mix_pool, opts.mix_unique, opts.pool_size};
        streams.push_back(gen_benign(spec, opts.common.seed));
    }
    uint64_t attack_index = 0;
    for (const std::string& arg : opts.attacks) {
        const AttackSpec spec = parse_attack_arg(arg);
        streams.push_back(gen_attack(spec, splitmix64(opts.common.seed ^ ++attack_index)));
    }
    const std::vector<DnsQueryEvent> merged = merge_streams(std::move(streams));

    const StreamFormat format = parse_stream_format(opts.common.format);
    if (opts.common.out.empty()) {
        write_events(std::cout, merged, format);
    } else {
        write_events_file(opts.common.out, merged, format);
    }
    std::cerr << "events=" << merged.size() << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// bench

int cmd_bench(const CommonOpts& opts, std::size_t synthetic_events, unsigned runs) {
    const QnameExtractor extractor{extraction_config_from(opts)};
    const EngineConfig config = engine_config_from(opts);

    std::vector<DnsQueryEvent> events;
    if (!opts.input.empty()) {
        events = read_events(opts.input, parse_stream_format(opts.format));
    } else {
        BenignSpec spec;
        spec.n_clients = 1000;
        spec.n_domains = 10000;
        spec.duration_seconds = 600.0;
        spec.mean_rate_qps = static_cast<double>(synthetic_events) / spec.duration_seconds;
        events = gen_benign(spec, opts.seed);
    }

    nlohmann::json result;
    result["events"] = events.size();
    if (events.empty()) {
        result["qps"] = nullptr;  // undefined on an empty stream
        std::cout << result.dump() << '\n';
        return 0;
    }

    std::vector<double> qps_runs;
    std::size_t final_memory = 0;
    uint64_t alerts_per_run = 0;
    for (unsigned r = 0; r < runs; ++r) {
        InfoHeavyHitters engine{config};
        uint64_t fired = 0;
        const auto begin = std::chrono::steady_clock::now();
        for (const DnsQueryEvent& event : events) {
            StreamElement element;
            try {
                element = extractor.extract(event.qname);
            } catch (const ParseError&) {
                continue;
            }
            if (auto alert = engine.process(element, event.timestamp, event.client_id))
                ++fired;
        }
        const auto end = std::chrono::steady_clock::now();
        const double seconds = std::chrono::duration<double>(end - begin).count();
        qps_runs.push_back(static_cast<double>(events.size()) / seconds);
        final_memory = engine.memory_bytes();
        alerts_per_run = fired;  // identical across runs by construction
    }
    result["qps_runs"] = qps_runs;
    result["qps"] = *std::max_element(qps_runs.begin(), qps_runs.end());
    result["qps_min"] = *std::min_element(qps_runs.begin(), qps_runs.end());
    result["engine_memory_bytes"] = final_memory;
    result["alerts"] = alerts_per_run;
    std::cout << result.dump() << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// compare

int cmd_compare(const CommonOpts& opts, const std::string& train_path,
                const std::string& peacetime_path, const std::string& test_path,
                const std::vector<double>& fprs, const TuningGrid& grid,
                const std::string& json_path) {
    std::vector<MetricsReport> reports;
    for (const Method method : {Method::ibhh, Method::paxson}) {
        for (const double fpr : fprs) {
            ExperimentConfig config;
            config.method = method;
            config.engine = engine_config_from(opts);
            config.extraction = extraction_config_from(opts);
            for (const std::string& path : opts.allowlists)
                config.allowlist_paths.emplace_back(path);
            config.allowlist_mode = parse_allowlist_mode(opts.allowlist_mode);
            config.acceptable_fpr = fpr;
            config.grid = grid;
            config.train_path = train_path;
            config.peacetime_path = peacetime_path;
            config.test_path = test_path;
            config.format = parse_stream_format(opts.format);
            config.seed = opts.seed;
            reports.push_back(run_experiment(config));
        }
    }
    const std::string csv = comparison_csv(reports);
    if (!opts.out.empty()) {
        std::ofstream out(opts.out, std::ios::binary);
        if (!out)
            throw IoError("cannot open output file: " + opts.out);
        out << csv;
    }
    if (!json_path.empty()) {
        std::ofstream out(json_path, std::ios::binary);
        if (!out)
            throw IoError("cannot open output file: " + json_path);
        for (const MetricsReport& report : reports)
            out << report.to_json() << '\n';
    }
    std::cout << comparison_table(reports);
    if (opts.out.empty())
        std::cout << csv;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"streaming DNS exfiltration detector"};
    app.require_subcommand(1);
    app.set_config("--config");

    CommonOpts detect_opts;
    CLI::App* detect = app.add_subcommand("detect", "replay a stream and emit alerts as JSONL");
    add_common_flags(*detect, detect_opts, true);

    CommonOpts peacetime_opts;
    CLI::App* peacetime =
        app.add_subcommand("peacetime", "learn an allowlist from an assumed-benign stream");
    add_common_flags(*peacetime, peacetime_opts, true);

    CommonOpts tune_opts;
    double acceptable_fpr = 0.01;
    TuningGrid tune_grid;
    CLI::App* tune =
        app.add_subcommand("tune", "find the lowest threshold meeting an FPR target");
    add_common_flags(*tune, tune_opts, true);
    tune->add_option("--acceptable-fpr", acceptable_fpr, "FPR target in (0,1)")
        ->capture_default_str();
    tune->add_option("--grid-fine-step", tune_grid.fine_step)->capture_default_str();
    tune->add_option("--grid-fine-max", tune_grid.fine_max)->capture_default_str();
    tune->add_option("--grid-step", tune_grid.coarse_step)->capture_default_str();
    tune->add_option("--grid-max", tune_grid.max)->capture_default_str();

    GenOpts gen_opts;
    CLI::App* gen = app.add_subcommand("gen", "generate labeled synthetic streams");
    add_common_flags(*gen, gen_opts.common, false);
    gen->add_flag("--benign", gen_opts.benign, "include background traffic");
    gen->add_option("--clients", gen_opts.clients)->capture_default_str();
    gen->add_option("--domains", gen_opts.domains)->capture_default_str();
    gen->add_option("--zipf-s", gen_opts.zipf_s)->capture_default_str();
    gen->add_option("--duration", gen_opts.duration)->capture_default_str();
    gen->add_option("--rate", gen_opts.rate)->capture_default_str();
    gen->add_option("--mix-empty", gen_opts.mix_empty)->capture_default_str();
    gen->add_option("--mix-pool", gen_opts.mix_pool)->capture_default_str();
    gen->add_option("--mix-unique", gen_opts.mix_unique)->capture_default_str();
    gen->add_option("--pool-size", gen_opts.pool_size)->capture_default_str();
    gen->add_option("--attack", gen_opts.attacks,
                    "attack spec: tool=...,domain=...,client=...,start=...,count=...");

    CommonOpts bench_opts;
    std::size_t synthetic_events = 1000000;
    unsigned bench_runs = 5;
    CLI::App* bench = app.add_subcommand("bench", "measure detect-path throughput and memory");
    add_common_flags(*bench, bench_opts, false);
    bench->add_option("--synthetic-events", synthetic_events,
                      "events to generate when no --input is given")
        ->capture_default_str();
    bench->add_option("--runs", bench_runs, "repetitions to report spread")
        ->capture_default_str();

    CommonOpts compare_opts;
    std::string train_path, peacetime_path, test_path, compare_json;
    std::vector<double> compare_fprs;
    TuningGrid compare_grid;
    CLI::App* compare =
        app.add_subcommand("compare", "tune and evaluate both methods side by side");
    add_common_flags(*compare, compare_opts, false);
    compare->add_option("--train", train_path, "training stream")->required();
    compare->add_option("--test", test_path, "labeled test stream")->required();
    compare->add_option("--peacetime", peacetime_path, "peacetime stream");
    compare->add_option("--acceptable-fpr", compare_fprs, "FPR targets (repeatable)");
    compare->add_option("--out-json", compare_json, "also write reports as JSON lines");
    compare->add_option("--grid-fine-step", compare_grid.fine_step)->capture_default_str();
    compare->add_option("--grid-fine-max", compare_grid.fine_max)->capture_default_str();
    compare->add_option("--grid-step", compare_grid.coarse_step)->capture_default_str();
    compare->add_option("--grid-max", compare_grid.max)->capture_default_str();

    try {
        app.parse(argc, argv);
        if (detect->parsed()) {
            echo_config(*detect);
            return cmd_detect(detect_opts);
        }
        if (peacetime->parsed()) {
            echo_config(*peacetime);
            return cmd_peacetime(peacetime_opts);
        }
        if (tune->parsed()) {
            echo_config(*tune);
            return cmd_tune(tune_opts, acceptable_fpr, tune_grid);
        }
        if (gen->parsed()) {
            echo_config(*gen);
            return cmd_gen(gen_opts);
        }
        if (bench->parsed()) {
            echo_config(*bench);
            return cmd_bench(bench_opts, synthetic_events, bench_runs);
        }
        if (compare->parsed()) {
            echo_config(*compare);
            if (compare_fprs.empty())
                compare_fprs.push_back(0.01);
            return cmd_compare(compare_opts, train_path, peacetime_path, test_path,
                               compare_fprs, compare_grid, compare_json);
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
