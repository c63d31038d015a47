#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dnshh/alert_io.hpp"
#include "dnshh/stream.hpp"
#include "dnshh/traffic_gen.hpp"

using namespace dnshh;
namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* bin = std::getenv("DNSHH_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "DNSHH_BIN must point at the built binary");
    return bin;
}

struct RunResult {
    int exit_code = -1;
    std::string stdout_text;
    std::string stderr_text;
};

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path out_path =
        fs::temp_directory_path() / ("dnshh-cli-out-" + std::to_string(++counter));
    const fs::path err_path =
        fs::temp_directory_path() / ("dnshh-cli-err-" + std::to_string(counter));
    const std::string command =
        cli_path() + " " + args + " >" + out_path.string() + " 2>" + err_path.string();
    const int status = std::system(command.c_str());

    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    const auto slurp = [](const fs::path& path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return buffer.str();
    };
    result.stdout_text = slurp(out_path);
    result.stderr_text = slurp(err_path);
    fs::remove(out_path);
    fs::remove(err_path);
    return result;
}

std::string slurp_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

fs::path temp_file(const std::string& name) {
    return fs::temp_directory_path() / ("dnshh-cli-" + name);
}

//! Small benign fixture written once per process.
fs::path benign_fixture() {
    static fs::path path = [] {
        BenignSpec spec;
        spec.n_clients = 10;
        spec.n_domains = 30;
        spec.duration_seconds = 120.0;
        spec.mean_rate_qps = 20.0;
        spec.mixture = {0.5, 0.5, 0.0, 4};
        const auto events = gen_benign(spec, 77);
        const fs::path p = temp_file("benign.jsonl");
        write_events_file(p, events, StreamFormat::jsonl);
        return p;
    }();
    return path;
}

} // namespace

TEST_CASE("detect on a quiet stream exits zero with no alerts") {
    const auto result =
        run_cli("detect --input " + benign_fixture().string() + " --threshold-bps 100");
    CHECK(result.exit_code == 0);
    CHECK(result.stdout_text.empty());
    CHECK(result.stderr_text.find("alerts=0") != std::string::npos);
    CHECK(result.stderr_text.find("# config detect") != std::string::npos);
}

TEST_CASE("detect on a missing file fails with a diagnostic") {
    const auto result = run_cli("detect --input /no/such/stream.jsonl --threshold-bps 10");
    CHECK(result.exit_code != 0);
    CHECK(result.stderr_text.find("error:") != std::string::npos);
}

TEST_CASE("iodine fixture alerts at the 250 B/s, 120 s configuration") {
    AttackSpec spec;
    spec.tool = AttackTool::iodine;
    spec.domain = "tunnel.example";
    spec.client_id = "hq";
    spec.start_time = 0.0;
    spec.query_count = 3000;  // 150 s at the default gap
    const auto events = gen_iodine(spec, 5);
    const fs::path input = temp_file("iodine.jsonl");
    write_events_file(input, events, StreamFormat::jsonl);

    const fs::path out = temp_file("iodine-alerts.jsonl");
    const auto result = run_cli("detect --input " + input.string() +
                                " --threshold-bps 250 --window-secs 120 --out " + out.string());
    CHECK(result.exit_code == 0);
    const auto alerts = read_alerts_jsonl(out);
    REQUIRE_FALSE(alerts.empty());
    for (const auto& alert : alerts)
        CHECK(alert.domain == "tunnel.example");
    fs::remove(input);
    fs::remove(out);
}

TEST_CASE("detect output is byte-identical across runs") {
    const fs::path out1 = temp_file("det1.jsonl");
    const fs::path out2 = temp_file("det2.jsonl");
    const std::string base = "detect --input " + benign_fixture().string() +
                             " --threshold-bps 0.1 --hash-seed 9 --out ";
    CHECK(run_cli(base + out1.string()).exit_code == 0);
    CHECK(run_cli(base + out2.string()).exit_code == 0);
    const std::string text = slurp_file(out1);
    CHECK_FALSE(text.empty());
    CHECK(text == slurp_file(out2));
    fs::remove(out1);
    fs::remove(out2);
}

TEST_CASE("gen is deterministic and labeled") {
    const fs::path out1 = temp_file("gen1.jsonl");
    const fs::path out2 = temp_file("gen2.jsonl");
    const std::string base =
        "gen --benign --clients 5 --domains 10 --duration 60 --rate 10 "
        "--attack tool=denis,domain=c2.net,client=bot,start=3,count=100 --seed 4 --out ";
    CHECK(run_cli(base + out1.string()).exit_code == 0);
    CHECK(run_cli(base + out2.string()).exit_code == 0);
    const std::string text = slurp_file(out1);
    CHECK(text == slurp_file(out2));
    CHECK(text.find("\"label\":\"denis\"") != std::string::npos);
    CHECK(text.find("\"label\":\"benign\"") != std::string::npos);
    fs::remove(out1);
    fs::remove(out2);
}

TEST_CASE("gen rejects a bad attack spec") {
    const auto result = run_cli("gen --attack tool=warpdrive,domain=x.com,client=h,count=100");
    CHECK(result.exit_code != 0);
    CHECK(result.stderr_text.find("error:") != std::string::npos);
}

TEST_CASE("csv output parses back") {
    const fs::path out = temp_file("gen.csv");
    CHECK(run_cli("gen --benign --clients 3 --domains 5 --duration 30 --rate 5 --format csv "
                  "--seed 2 --out " +
                  out.string())
              .exit_code == 0);
    const auto events = read_events(out, StreamFormat::csv);
    CHECK_FALSE(events.empty());
    CHECK(events.front().label == "benign");
    fs::remove(out);
}

TEST_CASE("tune prints a machine-readable line") {
    const auto result = run_cli("tune --input " + benign_fixture().string() +
                                " --acceptable-fpr 0.5 --grid-max 20");
    CHECK(result.exit_code == 0);
    CHECK(result.stdout_text.find("threshold_bps=") == 0);
    CHECK(result.stdout_text.find("achieved_fpr=") != std::string::npos);
    CHECK(result.stdout_text.find("attainable=") != std::string::npos);
}

TEST_CASE("peacetime writes a sorted allowlist file") {
    // a chatty domain above 1 B/s plus quiet background
    AttackSpec chatty;
    chatty.tool = AttackTool::denis;
    chatty.domain = "av-updates.net";
    chatty.client_id = "h1";
    chatty.query_count = 200;
    const auto events = gen_denis(chatty, 3);
    const fs::path input = temp_file("peace.jsonl");
    write_events_file(input, events, StreamFormat::jsonl);

    const fs::path out = temp_file("peace-list.txt");
    const auto result = run_cli("peacetime --input " + input.string() +
                                " --threshold-bps 1 --out " + out.string());
    CHECK(result.exit_code == 0);
    CHECK(slurp_file(out) == "av-updates.net\n");

    // wartime: the learned list suppresses those alerts post-filter; the
    // 300 s stream spans three windows, each of which alerted
    const auto wartime = run_cli("detect --input " + input.string() +
                                 " --threshold-bps 1 --allowlist " + out.string());
    CHECK(wartime.exit_code == 0);
    CHECK(wartime.stdout_text.empty());
    CHECK(wartime.stderr_text.find("alerts=0") != std::string::npos);
    CHECK(wartime.stderr_text.find("allowlist_suppressed=3") != std::string::npos);
    fs::remove(input);
    fs::remove(out);
}

TEST_CASE("bench reports throughput on a small synthetic stream") {
    const auto result = run_cli("bench --synthetic-events 20000 --runs 2");
    CHECK(result.exit_code == 0);
    CHECK(result.stdout_text.find("\"qps\":") != std::string::npos);
    CHECK(result.stdout_text.find("\"engine_memory_bytes\":") != std::string::npos);
    CHECK(result.stdout_text.find("\"qps_runs\":") != std::string::npos);
}

TEST_CASE("bench on an empty stream reports qps as null") {
    const fs::path input = temp_file("empty-bench.jsonl");
    std::ofstream(input).close();
    const auto result = run_cli("bench --input " + input.string());
    CHECK(result.exit_code == 0);
    CHECK(result.stdout_text.find("\"qps\":null") != std::string::npos);
    fs::remove(input);
}

TEST_CASE("compare emits a csv over both methods and fpr settings") {
    // train and test reuse the benign fixture; keep the grid tiny
    const fs::path out = temp_file("compare.csv");
    const auto result = run_cli("compare --train " + benign_fixture().string() + " --test " +
                                benign_fixture().string() +
                                " --acceptable-fpr 0.5 --acceptable-fpr 0.9 --grid-max 5 "
                                "--out " +
                                out.string());
    CHECK(result.exit_code == 0);
    const std::string csv = slurp_file(out);
    CHECK(csv.find("method,") == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);  // header + 4 rows
    CHECK(csv.find("ibhh,0.5") != std::string::npos);
    CHECK(csv.find("paxson,0.9") != std::string::npos);
    fs::remove(out);

    // determinism of the full report
    const fs::path out2 = temp_file("compare2.csv");
    run_cli("compare --train " + benign_fixture().string() + " --test " +
            benign_fixture().string() +
            " --acceptable-fpr 0.5 --acceptable-fpr 0.9 --grid-max 5 --out " + out2.string());
    CHECK(csv == slurp_file(out2));
    fs::remove(out2);
}

TEST_CASE("shards produce the same alert set for one partition") {
    // sharded run with shards=2 covers the merge path; domains are disjoint
    // per engine so per-domain alerts agree with the unsharded run when no
    // evictions occur
    const fs::path out1 = temp_file("shard1.jsonl");
    const fs::path out2 = temp_file("shard2.jsonl");
    const std::string base = "detect --input " + benign_fixture().string() +
                             " --threshold-bps 0.1 --cache-size 1000 --out ";
    CHECK(run_cli(base + out1.string()).exit_code == 0);
    CHECK(run_cli(base + out2.string() + " --shards 2").exit_code == 0);
    const std::string text = slurp_file(out1);
    CHECK_FALSE(text.empty());
    CHECK(text == slurp_file(out2));
    fs::remove(out1);
    fs::remove(out2);
}

TEST_CASE("paxson method emits tagged alerts") {
    AttackSpec spec;
    spec.tool = AttackTool::frameworkpos;
    spec.domain = "posloot.io";
    spec.client_id = "term1";
    spec.query_count = 800;
    const auto events = gen_frameworkpos(spec, 8);
    const fs::path input = temp_file("paxson-in.jsonl");
    write_events_file(input, events, StreamFormat::jsonl);

    const fs::path out = temp_file("paxson-alerts.jsonl");
    const auto result = run_cli("detect --method paxson --input " + input.string() +
                                " --threshold-bps 15 --out " + out.string());
    CHECK(result.exit_code == 0);
    const std::string text = slurp_file(out);
    CHECK(text.find("\"method\":\"paxson\"") != std::string::npos);
    CHECK(text.find("\"domain\":\"posloot.io\"") != std::string::npos);
    fs::remove(input);
    fs::remove(out);
}

TEST_CASE("bad precision is a configuration error") {
    const auto result = run_cli("detect --input " + benign_fixture().string() +
                                " --threshold-bps 1 --hll-precision 20");
    CHECK(result.exit_code != 0);
    CHECK(result.stderr_text.find("error:") != std::string::npos);
    CHECK(result.stderr_text.find("precision") != std::string::npos);
}

TEST_CASE("suffix list and fixed index encoding are accepted") {
    const fs::path psl = temp_file("psl.dat");
    {
        std::ofstream out(psl);
        out << "com\nco.uk\nuk\n";
    }
    const auto result = run_cli("detect --input " + benign_fixture().string() +
                                " --threshold-bps 50 --suffix-list " + psl.string() +
                                " --index-encoding fixed");
    CHECK(result.exit_code == 0);
    CHECK(result.stderr_text.find("index-encoding=fixed") != std::string::npos);
    fs::remove(psl);
}

TEST_CASE("config files feed subcommand options") {
    const fs::path cfg = temp_file("cfg.ini");
    {
        std::ofstream out(cfg);
        out << "[detect]\nthreshold-bps=9999\n";
    }
    const auto result = run_cli("--config " + cfg.string() + " detect --input " +
                                benign_fixture().string());
    CHECK(result.exit_code == 0);
    CHECK(result.stderr_text.find("threshold-bps=9999") != std::string::npos);
    CHECK(result.stderr_text.find("alerts=0") != std::string::npos);
    fs::remove(cfg);
}
