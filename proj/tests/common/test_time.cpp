#include <doctest.h>

#include <stdexcept>

#include "postforge/time.hpp"

using namespace postforge;

TEST_CASE("time: parse and format") {
  CHECK(to_epoch(parse_timestamp("1970-01-01")) == 0);
  CHECK(to_epoch(parse_timestamp("2013-01-01")) == 1'356'998'400);
  CHECK(to_epoch(parse_timestamp("2019-12-31T23:59:59Z")) == 1'577'836'799);
  CHECK(to_epoch(parse_timestamp("2019-12-31T23:59:59")) == 1'577'836'799);
  CHECK(format_timestamp(from_epoch(1'700'000'000)) == "2023-11-14T22:13:20Z");
  for (std::int64_t t : {0LL, 951'782'400LL, 1'700'000'000LL, 4'102'444'799LL}) {
    CHECK(to_epoch(parse_timestamp(format_timestamp(from_epoch(t)))) == t);
  }
  for (const char* bad : {"", "2019-13-01", "2019-02-30", "yesterday", "2019-01-01T25:00:00", "2019-01-01 junk", "2019-01-01T-1:00:00"}) {
    CHECK_THROWS_AS(parse_timestamp(bad), std::invalid_argument);
  }
}

TEST_CASE("time: durations") {
  CHECK(parse_duration("90d") == days(90));
  CHECK(parse_duration("6h") == hours(6));
  CHECK(parse_duration("30m") == std::chrono::minutes(30));
  CHECK(parse_duration("45s") == std::chrono::seconds(45));
  CHECK(parse_duration("120") == std::chrono::seconds(120));
  for (const char* bad : {"", "h", "5x", "-3h", "1.5h"}) CHECK_THROWS_AS(parse_duration(bad), std::invalid_argument);
}
