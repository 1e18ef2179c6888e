#include "clvkit/error.hpp"
#include "clvkit/ingest.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

using namespace clvkit;
using namespace std::chrono;
using Catch::Matchers::WithinAbs;

namespace {

ParseResult parse(const std::string& text, const ColumnMapping& mapping = {}) {
    std::istringstream in(text);
    return parse_transactions(in, mapping);
}

Timestamp on_day(int n) { return Timestamp{sys_days{2022y / January / 1} + days{n}}; }

TransactionRecord txn(const std::string& user, const std::string& id, Timestamp ts, double value) {
    return {user, id, ts, value};
}

} // namespace

TEST_CASE("parse three well-formed rows", "[ingest]") {
    const ParseResult r = parse(
        "user_id,transaction_id,timestamp,value\n"
        "u1,t1,2022-01-01,5\n"
        "u1,t2,2022-01-11T10:00:00Z,7\n"
        "u2,t3,2022-01-05 08:30:00,1.5\n");
    CHECK(r.log.size() == 3);
    CHECK(r.rejected.empty());
    CHECK(r.log[0].user_id == "u1");
    CHECK(r.log[2].value == 1.5);
}

TEST_CASE("bad rows are rejected and counted", "[ingest]") {
    const ParseResult r = parse(
        "user_id,transaction_id,timestamp,value\n"
        "u1,t1,2022-01-01,abc\n"
        "u1,t2,not-a-date,7\n"
        "u1,t3,2022-01-03,-1\n"
        "u1,t4\n"
        ",t5,2022-01-03,1\n"
        "u2,t6,2022-01-05,2\n");
    REQUIRE(r.log.size() == 1);
    CHECK(r.log[0].transaction_id == "t6");
    REQUIRE(r.rejected.size() == 5);
    CHECK(r.rejected[0].line == 2);
    CHECK_FALSE(r.rejected[0].reason.empty());
}

TEST_CASE("duplicate transaction id names the id", "[ingest]") {
    try {
        (void)parse("user_id,transaction_id,timestamp,value\nu1,dup,2022-01-01,1\nu2,dup,2022-01-02,1\n");
        FAIL("expected DuplicateIdError");
    } catch (const DuplicateIdError& e) {
        CHECK(e.id() == "dup");
        CHECK(std::string(e.what()).find("dup") != std::string::npos);
    }
}

TEST_CASE("missing mapped column is a format error", "[ingest]") {
    CHECK_THROWS_AS(parse("user_id,timestamp,value\nu1,2022-01-01,1\n"), FormatError);
}

TEST_CASE("custom column mapping and delimiter", "[ingest]") {
    ColumnMapping m{"customer", "order", "when", "amount", ';'};
    const ParseResult r = parse("order;customer;amount;when\no1;c9;\"3,5\";2022-02-01\no2;c9;4;2022-02-03\n", m);
    REQUIRE(r.rejected.size() == 1);  // "3,5" is not a number
    REQUIRE(r.log.size() == 1);
    CHECK(r.log[0].user_id == "c9");
}

TEST_CASE("records are sorted by user then time", "[ingest]") {
    const ParseResult r = parse(
        "user_id,transaction_id,timestamp,value\n"
        "b,t1,2022-01-03,1\n"
        "a,t2,2022-01-09,1\n"
        "a,t3,2022-01-02,1\n");
    REQUIRE(r.log.size() == 3);
    CHECK(r.log[0].transaction_id == "t3");
    CHECK(r.log[1].transaction_id == "t2");
    CHECK(r.log[2].transaction_id == "t1");
}

TEST_CASE("timestamps with offsets and fractions", "[ingest]") {
    CHECK(parse_timestamp("2022-01-01T02:00:00+02:00") == on_day(0));
    CHECK(parse_timestamp("2022-01-01") == on_day(0));
    CHECK(parse_timestamp("2021-12-31T19:00:00-0500") == on_day(0));
    CHECK(format_timestamp(parse_timestamp("2022-03-04T05:06:07.250Z")) == "2022-03-04T05:06:07.250Z");
    CHECK(format_timestamp(on_day(3)) == "2022-01-04T00:00:00Z");
    CHECK_THROWS_AS(parse_timestamp("2022-13-01"), FormatError);
    CHECK_THROWS_AS(parse_timestamp("2022-02-30"), FormatError);
    CHECK_THROWS_AS(parse_timestamp("yesterday"), FormatError);
}

TEST_CASE("time unit parsing", "[ingest]") {
    CHECK(parse_time_unit("1d") == kOneDay);
    CHECK(parse_time_unit("7") == days{7});
    CHECK(parse_time_unit("12h") == hours{12});
    CHECK(parse_time_unit("1w") == days{7});
    CHECK(parse_time_unit("500ms") == milliseconds{500});
    CHECK_THROWS(parse_time_unit("0d"));
    CHECK_THROWS(parse_time_unit("fortnight"));
}

TEST_CASE("summarize hand-counted customer", "[ingest][rfm]") {
    const TransactionLog log{txn("u", "1", on_day(0), 5), txn("u", "2", on_day(10), 7), txn("u", "3", on_day(30), 9)};
    const auto rows = summarize_rfm(log, on_day(40));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].frequency == 2);
    CHECK(rows[0].recency == 30.0);
    CHECK(rows[0].age == 40.0);
    CHECK(rows[0].monetary == 8.0);
}

TEST_CASE("single purchase day customer", "[ingest][rfm]") {
    const TransactionLog log{txn("u", "1", on_day(3), 5)};
    const auto rows = summarize_rfm(log, on_day(10));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].frequency == 0);
    CHECK(rows[0].recency == 0.0);
    CHECK(rows[0].monetary == 0.0);
    CHECK(rows[0].age == 7.0);
}

TEST_CASE("same-day transactions merge into one purchase day", "[ingest][rfm]") {
    const TransactionLog log{txn("u", "1", on_day(0), 1), txn("u", "2", on_day(5) + hours{1}, 3),
                             txn("u", "3", on_day(5) + hours{20}, 4)};
    const auto rows = summarize_rfm(log, on_day(10));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].frequency == 1);
    CHECK(rows[0].monetary == 7.0);
    CHECK(rows[0].recency == 5.0);
}

TEST_CASE("summarize edge cases", "[ingest][rfm]") {
    CHECK(summarize_rfm(TransactionLog{}, on_day(1)).empty());
    const TransactionLog late{txn("u", "1", on_day(5), 1)};
    CHECK_THROWS_AS(summarize_rfm(late, on_day(4)), InputError);
}

TEST_CASE("non-day time unit", "[ingest][rfm]") {
    const TransactionLog log{txn("u", "1", on_day(0), 1), txn("u", "2", on_day(14), 2)};
    const auto rows = summarize_rfm(log, on_day(28), days{7});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].recency == 2.0);
    CHECK(rows[0].age == 4.0);
}

TEST_CASE("summarize invariants on a random log", "[ingest][rfm][property]") {
    std::mt19937_64 eng(17);
    std::uniform_int_distribution<int> user(0, 49), when(0, 120 * 24);
    TransactionLog log;
    std::set<std::pair<std::string, int>> user_days;
    for (int i = 0; i < 600; ++i) {
        const std::string u = "u" + std::to_string(user(eng));
        const int h = when(eng);
        log.push_back(txn(u, "t" + std::to_string(i), on_day(0) + hours{h}, 1.0 + i % 7));
        user_days.insert({u, h / 24});
    }
    const auto rows = summarize_rfm(log, on_day(121));

    std::int64_t total = 0;
    for (const auto& r : rows) {
        CHECK(r.recency >= 0.0);
        CHECK(r.recency <= r.age);
        if (r.frequency == 0) {
            CHECK(r.recency == 0.0);
            CHECK(r.monetary == 0.0);
        }
        total += r.frequency + 1;
    }
    CHECK(total == static_cast<std::int64_t>(user_days.size()));
    CHECK(std::is_sorted(rows.begin(), rows.end(),
                         [](const RfmRow& a, const RfmRow& b) { return a.user_id < b.user_id; }));

    std::shuffle(log.begin(), log.end(), eng);
    const auto again = summarize_rfm(log, on_day(121));
    REQUIRE(again.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(again[i].user_id == rows[i].user_id);
        CHECK(again[i].frequency == rows[i].frequency);
        CHECK(again[i].recency == rows[i].recency);
        CHECK(again[i].monetary == rows[i].monetary);
    }
}

TEST_CASE("calibration holdout boundary rules", "[ingest][holdout]") {
    const TransactionLog log{txn("a", "1", on_day(0), 1),   txn("a", "2", on_day(20), 1), txn("a", "3", on_day(90), 1),
                             txn("a", "4", on_day(100), 1), txn("a", "5", on_day(110), 2), txn("b", "6", on_day(95), 1)};
    const auto s = calibration_holdout_summary(log, on_day(90), on_day(120));
    CHECK(s.excluded_customers == 1);
    REQUIRE(s.rows.size() == 1);
    const auto& r = s.rows[0];
    CHECK(r.user_id == "a");
    CHECK(r.frequency_cal == 2);
    CHECK(r.recency_cal == 90.0);
    CHECK(r.age_cal == 90.0);
    CHECK(r.frequency_holdout == 2);
    CHECK(r.holdout_duration == 30.0);
    // Five purchase days in total, first in calibration.
    CHECK(r.frequency_cal + r.frequency_holdout == 5 - 1);
}

TEST_CASE("calibration matches summarize at the calibration end", "[ingest][holdout]") {
    const TransactionLog log{txn("a", "1", on_day(0), 1), txn("a", "2", on_day(20), 4), txn("a", "3", on_day(60), 6),
                             txn("c", "4", on_day(10), 2)};
    const auto cal = calibration_holdout_summary(log, on_day(30), on_day(80));
    TransactionLog before;
    std::copy_if(log.begin(), log.end(), std::back_inserter(before),
                 [](const TransactionRecord& t) { return t.timestamp <= on_day(30); });
    const auto rfm = summarize_rfm(before, on_day(30));
    REQUIRE(cal.rows.size() == rfm.size());
    for (std::size_t i = 0; i < rfm.size(); ++i) {
        CHECK(cal.rows[i].frequency_cal == rfm[i].frequency);
        CHECK(cal.rows[i].recency_cal == rfm[i].recency);
        CHECK(cal.rows[i].age_cal == rfm[i].age);
        CHECK(cal.rows[i].monetary_cal == rfm[i].monetary);
    }
}

TEST_CASE("calibration window ordering", "[ingest][holdout]") {
    const TransactionLog log{txn("a", "1", on_day(0), 1)};
    CHECK_THROWS_AS(calibration_holdout_summary(log, on_day(10), on_day(10)), InputError);
    CHECK_THROWS_AS(calibration_holdout_summary(log, on_day(10), on_day(5)), InputError);
}
