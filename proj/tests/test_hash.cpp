#include "doctest.h"

#include <set>
#include <string>

#include "dnshh/hash.hpp"

using namespace dnshh;

TEST_CASE("hash64 matches the xxHash64 reference vectors") {
    CHECK(hash64("", 0) == 0xEF46DB3751D8E999ULL);
    CHECK(hash64("a", 0) == 0xD24EC4F1A98C6E5BULL);
    CHECK(hash64("abc", 0) == 0x44BC2CF5AD770999ULL);
}

TEST_CASE("hash64 is deterministic and seed-sensitive") {
    CHECK(hash64("hello", 1) == hash64("hello", 1));
    CHECK(hash64("hello", 1) != hash64("hello", 2));
    CHECK(hash64("hello", 1) != hash64("hellp", 1));
}

TEST_CASE("hash64 covers all tail lengths") {
    std::set<uint64_t> seen;
    std::string s;
    for (int len = 0; len <= 40; ++len) {
        seen.insert(hash64(s, 42));
        s += static_cast<char>('a' + len % 26);
    }
    CHECK(seen.size() == 41);
}

TEST_CASE("to_unit_interval stays in [0,1)") {
    CHECK(to_unit_interval(0) == 0.0);
    CHECK(to_unit_interval(UINT64_MAX) < 1.0);
    CHECK(to_unit_interval(UINT64_MAX) > 0.999999);
}

TEST_CASE("splitmix64 scrambles nearby seeds") {
    CHECK(splitmix64(0) != splitmix64(1));
    CHECK(splitmix64(1) != splitmix64(2));
}
