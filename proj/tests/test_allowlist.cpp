#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "dnshh/allowlist.hpp"
#include "dnshh/engine.hpp"
#include "dnshh/errors.hpp"
#include "dnshh/traffic_gen.hpp"

using namespace dnshh;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
    const fs::path path = fs::temp_directory_path() / ("dnshh-allow-" + name);
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

EngineConfig quiet_config(double threshold_bps) {
    EngineConfig config;
    config.cache_size_k = 100;
    config.detection_threshold_bps = threshold_bps;
    config.window_seconds = 120.0;
    config.pair_hash_seed = 5;
    config.hll_hash_seed = 6;
    config.initial_window_start = 0.0;
    return config;
}

} // namespace

TEST_CASE("ranked csv toplist honors max_rank") {
    const fs::path path = write_temp("ranked.csv", "1,google.com\n2,facebook.com\n");
    const QnameExtractor extractor;
    const Allowlist list = Allowlist::load_toplist(path, 1, extractor);
    CHECK(list.size() == 1);
    CHECK(list.contains("google.com"));
    CHECK_FALSE(list.contains("facebook.com"));
    fs::remove(path);
}

TEST_CASE("plain domain-per-line file loads fully") {
    const fs::path path = write_temp("plain.txt", "one.com\ntwo.net\nthree.org\n");
    const Allowlist list = Allowlist::load_toplist(path, UINT64_MAX, QnameExtractor{});
    CHECK(list.size() == 3);
    CHECK(list.contains("two.net"));
    fs::remove(path);
}

TEST_CASE("malformed rows are skipped and counted") {
    const fs::path path =
        write_temp("dirty.csv", "1,good.com\nx,not a domain!\n3,also good.org\n4,fine.net\n");
    uint64_t skipped = 0;
    const Allowlist list = Allowlist::load_toplist(path, UINT64_MAX, QnameExtractor{}, &skipped);
    // "x" is not a rank and "also good.org" has a space
    CHECK(skipped == 2);
    CHECK(list.size() == 2);
    CHECK(list.contains("good.com"));
    CHECK(list.contains("fine.net"));
    fs::remove(path);
}

TEST_CASE("entries are lowercased and reduced to registered domains") {
    const fs::path path = write_temp("deep.txt", "WWW.Example.COM\ncdn.assets.site.net\n");
    const Allowlist list = Allowlist::load_toplist(path, UINT64_MAX, QnameExtractor{});
    CHECK(list.contains("example.com"));
    CHECK(list.contains("site.net"));
    CHECK_FALSE(list.contains("www.example.com"));
    fs::remove(path);
}

TEST_CASE("missing allowlist file is fatal") {
    CHECK_THROWS_AS(Allowlist::load_toplist("/no/such/file.txt", 10, QnameExtractor{}), IoError);
}

TEST_CASE("is_allowed is the union over lists") {
    const Allowlist a({"google.com"}, AllowlistSource::static_toplist);
    const Allowlist b({"intra.corp"}, AllowlistSource::peacetime);
    const Allowlist* lists[] = {&a, &b};
    CHECK(is_allowed(lists, "google.com"));
    CHECK(is_allowed(lists, "intra.corp"));
    CHECK_FALSE(is_allowed(lists, "evil.com"));
    CHECK_FALSE(is_allowed(std::span<const Allowlist* const>{}, "google.com"));
}

TEST_CASE("peacetime over a quiet stream is empty") {
    std::vector<DnsQueryEvent> events;
    for (int i = 0; i < 200; ++i)
        events.push_back({i * 0.5, "h1", "www.quiet" + std::to_string(i % 10) + ".com", ""});
    const Allowlist list = generate_peacetime(quiet_config(100.0), events, QnameExtractor{});
    CHECK(list.size() == 0);
    CHECK(list.source() == AllowlistSource::peacetime);
}

TEST_CASE("peacetime collects exactly the exceeding domains") {
    // one domain streams unique 40-char subdomains fast enough to exceed
    // 10 B/s over 120 s; everything else stays under
    std::vector<std::vector<DnsQueryEvent>> streams;
    AttackSpec chatty;
    chatty.tool = AttackTool::frameworkpos;
    chatty.domain = "telemetry-vendor.com";
    chatty.client_id = "h2";
    chatty.start_time = 0.0;
    chatty.query_count = 400;
    streams.push_back(gen_frameworkpos(chatty, 11));
    std::vector<DnsQueryEvent> background;
    for (int i = 0; i < 300; ++i)
        background.push_back({i * 0.4, "h1", "www.calm" + std::to_string(i % 5) + ".net", ""});
    streams.push_back(std::move(background));
    const auto events = merge_streams(std::move(streams));

    const Allowlist list = generate_peacetime(quiet_config(10.0), events, QnameExtractor{});
    CHECK(list.size() == 1);
    CHECK(list.contains("telemetry-vendor.com"));

    const Allowlist again = generate_peacetime(quiet_config(10.0), events, QnameExtractor{});
    CHECK(again.entries() == list.entries());
}

TEST_CASE("allowlist files round-trip sorted") {
    const Allowlist list({"zeta.com", "alpha.org", "mid.net"}, AllowlistSource::peacetime);
    const fs::path path = fs::temp_directory_path() / "dnshh-allow-save.txt";
    list.save(path);
    std::ifstream in(path);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line))
        lines.push_back(line);
    CHECK(lines == std::vector<std::string>{"alpha.org", "mid.net", "zeta.com"});

    const Allowlist back = Allowlist::load_toplist(path, UINT64_MAX, QnameExtractor{});
    CHECK(back.entries() == list.entries());
    fs::remove(path);
}
