#include "clvkit/ingest.hpp"

#include "clvkit/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <unordered_map>
#include <unordered_set>

namespace clvkit {

namespace {

using namespace std::chrono;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) {
        s.remove_suffix(1);
    }
    return s;
}

// Parses exactly `width` digits at `pos`, advancing it.
std::optional<int> take_digits(std::string_view s, std::size_t& pos, std::size_t width) {
    if (pos + width > s.size()) return std::nullopt;
    int v = 0;
    for (std::size_t i = 0; i < width; ++i) {
        const char c = s[pos + i];
        if (c < '0' || c > '9') return std::nullopt;
        v = v * 10 + (c - '0');
    }
    pos += width;
    return v;
}

[[noreturn]] void bad_timestamp(std::string_view text) {
    throw FormatError("unparseable timestamp '" + std::string(text) + "'");
}

double unit_count(milliseconds d, TimeUnit unit) {
    return static_cast<double>(d.count()) / static_cast<double>(unit.count());
}

sys_days day_of(Timestamp ts) { return floor<days>(ts); }

struct PurchaseDay {
    sys_days day;
    double value;
};

// Collapses one customer's (time-sorted) records into purchase days.
template <typename Range>
std::vector<PurchaseDay> purchase_days(const Range& records) {
    std::vector<PurchaseDay> out;
    for (const TransactionRecord& r : records) {
        const sys_days d = day_of(r.timestamp);
        if (!out.empty() && out.back().day == d) {
            out.back().value += r.value;
        } else {
            out.push_back({d, r.value});
        }
    }
    return out;
}

struct CalibrationStats {
    std::int64_t frequency;
    double recency;
    double age;
    double monetary;
};

CalibrationStats stats_from_days(const std::vector<PurchaseDay>& pdays, Timestamp end, TimeUnit unit) {
    const sys_days first = pdays.front().day;
    const sys_days last = pdays.back().day;
    CalibrationStats s{};
    s.frequency = static_cast<std::int64_t>(pdays.size()) - 1;
    s.recency = unit_count(duration_cast<milliseconds>(last - first), unit);
    s.age = unit_count(end - Timestamp{first}, unit);
    if (s.frequency > 0) {
        double total = 0.0;
        for (std::size_t i = 1; i < pdays.size(); ++i) total += pdays[i].value;
        s.monetary = total / static_cast<double>(s.frequency);
    }
    return s;
}

// Walks the log customer by customer, sorting a copy when the input is not already ordered.
template <typename Fn>
void for_each_customer(std::span<const TransactionRecord> log, Fn&& fn) {
    auto less = [](const TransactionRecord& l, const TransactionRecord& r) {
        if (l.user_id != r.user_id) return l.user_id < r.user_id;
        if (l.timestamp != r.timestamp) return l.timestamp < r.timestamp;
        return l.transaction_id < r.transaction_id;
    };
    std::vector<TransactionRecord> sorted;
    std::span<const TransactionRecord> view = log;
    if (!std::is_sorted(log.begin(), log.end(), less)) {
        sorted.assign(log.begin(), log.end());
        std::sort(sorted.begin(), sorted.end(), less);
        view = sorted;
    }
    std::size_t begin = 0;
    while (begin < view.size()) {
        std::size_t end = begin + 1;
        while (end < view.size() && view[end].user_id == view[begin].user_id) ++end;
        fn(view.subspan(begin, end - begin));
        begin = end;
    }
}

} // namespace

Timestamp parse_timestamp(std::string_view text) {
    const std::string_view s = trim(text);
    std::size_t pos = 0;
    const auto y = take_digits(s, pos, 4);
    if (!y || pos >= s.size() || s[pos++] != '-') bad_timestamp(text);
    const auto mo = take_digits(s, pos, 2);
    if (!mo || pos >= s.size() || s[pos++] != '-') bad_timestamp(text);
    const auto d = take_digits(s, pos, 2);
    if (!d) bad_timestamp(text);
    const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)}, day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) bad_timestamp(text);

    milliseconds time_of_day{0};
    milliseconds offset{0};
    if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
        ++pos;
        const auto hh = take_digits(s, pos, 2);
        if (!hh || pos >= s.size() || s[pos++] != ':') bad_timestamp(text);
        const auto mm = take_digits(s, pos, 2);
        if (!mm) bad_timestamp(text);
        int ss = 0;
        int ms = 0;
        if (pos < s.size() && s[pos] == ':') {
            ++pos;
            const auto sec = take_digits(s, pos, 2);
            if (!sec) bad_timestamp(text);
            ss = *sec;
            if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
                ++pos;
                int scale = 100;
                std::size_t digits = 0;
                while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
                    ms += (s[pos] - '0') * scale;
                    scale /= 10;
                    ++pos;
                    ++digits;
                }
                if (digits == 0) bad_timestamp(text);
            }
        }
        if (*hh > 23 || *mm > 59 || ss > 60) bad_timestamp(text);
        time_of_day = hours{*hh} + minutes{*mm} + seconds{ss} + milliseconds{ms};
    }
    if (pos < s.size()) {
        const char c = s[pos];
        if (c == 'Z' || c == 'z') {
            ++pos;
        } else if (c == '+' || c == '-') {
            ++pos;
            const auto oh = take_digits(s, pos, 2);
            if (!oh) bad_timestamp(text);
            if (pos < s.size() && s[pos] == ':') ++pos;
            const auto om = take_digits(s, pos, 2);
            if (!om) bad_timestamp(text);
            offset = hours{*oh} + minutes{*om};
            if (c == '-') offset = -offset;
        }
    }
    if (pos != s.size()) bad_timestamp(text);
    return Timestamp{sys_days{ymd}} + time_of_day - offset;
}

std::string format_timestamp(Timestamp ts) {
    const sys_days d = floor<days>(ts);
    const year_month_day ymd{d};
    const hh_mm_ss<milliseconds> tod{ts - Timestamp{d}};
    char buf[40];
    const auto ms = tod.subseconds().count();
    if (ms == 0) {
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                      static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                      static_cast<int>(tod.seconds().count()));
    } else {
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                      static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                      static_cast<int>(tod.seconds().count()), static_cast<int>(ms));
    }
    return buf;
}

TimeUnit parse_time_unit(std::string_view text) {
    const std::string_view s = trim(text);
    double amount = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), amount);
    if (ec != std::errc{} || !(amount > 0.0)) {
        throw InputError("time unit must be a positive duration like 1d or 12h, got '" + std::string(text) + "'");
    }
    const std::string_view suffix(ptr, static_cast<std::size_t>(s.data() + s.size() - ptr));
    double ms_per = 0.0;
    if (suffix.empty() || suffix == "d") {
        ms_per = 86'400'000.0;
    } else if (suffix == "h") {
        ms_per = 3'600'000.0;
    } else if (suffix == "m" || suffix == "min") {
        ms_per = 60'000.0;
    } else if (suffix == "s") {
        ms_per = 1'000.0;
    } else if (suffix == "ms") {
        ms_per = 1.0;
    } else if (suffix == "w") {
        ms_per = 7.0 * 86'400'000.0;
    } else {
        throw InputError("unknown time unit suffix '" + std::string(suffix) + "'");
    }
    const auto count = static_cast<std::int64_t>(std::llround(amount * ms_per));
    if (count <= 0) throw InputError("time unit rounds to zero milliseconds");
    return TimeUnit{count};
}

std::vector<std::string> split_delimited(std::string_view line, char delimiter) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delimiter) {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    for (auto& f : fields) f = std::string(trim(f));
    return fields;
}

ParseResult parse_transactions(std::istream& source, const ColumnMapping& mapping) {
    std::string line;
    if (!std::getline(source, line)) throw FormatError("empty input: missing header row");
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    const auto header = split_delimited(line, mapping.delimiter);

    auto column = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw FormatError("missing required column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t user_col = column(mapping.user_id);
    const std::size_t txn_col = column(mapping.transaction_id);
    const std::size_t time_col = column(mapping.timestamp);
    const std::size_t value_col = column(mapping.value);
    const std::size_t needed = std::max({user_col, txn_col, time_col, value_col}) + 1;

    ParseResult result;
    std::unordered_set<std::string> seen_ids;
    std::size_t line_no = 1;
    while (std::getline(source, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_delimited(line, mapping.delimiter);
        if (fields.size() < needed) {
            result.rejected.push_back({line_no, "expected at least " + std::to_string(needed) + " fields, found " +
                                                    std::to_string(fields.size())});
            continue;
        }
        TransactionRecord rec;
        rec.user_id = std::move(fields[user_col]);
        rec.transaction_id = std::move(fields[txn_col]);
        if (rec.user_id.empty() || rec.transaction_id.empty()) {
            result.rejected.push_back({line_no, "empty user or transaction id"});
            continue;
        }
        try {
            rec.timestamp = parse_timestamp(fields[time_col]);
        } catch (const FormatError& e) {
            result.rejected.push_back({line_no, e.what()});
            continue;
        }
        const std::string& vs = fields[value_col];
        const auto [ptr, ec] = std::from_chars(vs.data(), vs.data() + vs.size(), rec.value);
        if (ec != std::errc{} || ptr != vs.data() + vs.size() || !std::isfinite(rec.value)) {
            result.rejected.push_back({line_no, "unparseable value '" + vs + "'"});
            continue;
        }
        if (rec.value < 0.0) {
            result.rejected.push_back({line_no, "negative value '" + vs + "'"});
            continue;
        }
        if (!seen_ids.insert(rec.transaction_id).second) throw DuplicateIdError(rec.transaction_id);
        result.log.push_back(std::move(rec));
    }
    std::sort(result.log.begin(), result.log.end(), [](const TransactionRecord& l, const TransactionRecord& r) {
        if (l.user_id != r.user_id) return l.user_id < r.user_id;
        if (l.timestamp != r.timestamp) return l.timestamp < r.timestamp;
        return l.transaction_id < r.transaction_id;
    });
    return result;
}

std::vector<RfmRow> summarize_rfm(std::span<const TransactionRecord> log, Timestamp observation_end,
                                  TimeUnit time_unit) {
    if (time_unit.count() <= 0) throw InputError("time unit must be positive");
    std::vector<RfmRow> rows;
    for_each_customer(log, [&](std::span<const TransactionRecord> records) {
        if (records.back().timestamp > observation_end) {
            throw InputError("transaction " + records.back().transaction_id + " of user " + records.back().user_id +
                             " is after the observation end " + format_timestamp(observation_end));
        }
        const auto pdays = purchase_days(records);
        const CalibrationStats s = stats_from_days(pdays, observation_end, time_unit);
        rows.push_back({records.front().user_id, s.frequency, s.recency, s.age, s.monetary});
    });
    return rows;
}

CalibrationHoldoutSummary calibration_holdout_summary(std::span<const TransactionRecord> log,
                                                      Timestamp calibration_end, Timestamp observation_end,
                                                      TimeUnit time_unit) {
    if (!(calibration_end < observation_end)) {
        throw InputError("calibration end must be earlier than observation end");
    }
    if (time_unit.count() <= 0) throw InputError("time unit must be positive");
    const double holdout_duration = unit_count(observation_end - calibration_end, time_unit);

    CalibrationHoldoutSummary out;
    for_each_customer(log, [&](std::span<const TransactionRecord> records) {
        if (records.back().timestamp > observation_end) {
            throw InputError("transaction " + records.back().transaction_id + " of user " + records.back().user_id +
                             " is after the observation end " + format_timestamp(observation_end));
        }
        const auto split = std::find_if(records.begin(), records.end(),
                                        [&](const TransactionRecord& r) { return r.timestamp > calibration_end; });
        if (split == records.begin()) {
            ++out.excluded_customers;
            return;
        }
        const auto cal_days = purchase_days(std::span(records.begin(), split));
        const auto hold_days = purchase_days(std::span(split, records.end()));
        const CalibrationStats s = stats_from_days(cal_days, calibration_end, time_unit);

        std::int64_t holdout = 0;
        for (const PurchaseDay& d : hold_days) {
            if (d.day != cal_days.back().day) ++holdout;
        }
        out.rows.push_back({records.front().user_id, s.frequency, s.recency, s.age, s.monetary, holdout,
                            holdout_duration});
    });
    return out;
}

} // namespace clvkit
