#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace clvkit {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;
using TimeUnit = std::chrono::milliseconds;

inline constexpr TimeUnit kOneDay = std::chrono::days{1};

struct TransactionRecord {
    std::string user_id;
    std::string transaction_id;
    Timestamp timestamp;
    double value{0.0};
};

/// Records sorted by (user_id, timestamp, transaction_id).
using TransactionLog = std::vector<TransactionRecord>;

struct ColumnMapping {
    std::string user_id{"user_id"};
    std::string transaction_id{"transaction_id"};
    std::string timestamp{"timestamp"};
    std::string value{"value"};
    char delimiter{','};
};

struct RejectedRow {
    std::size_t line{0};  // 1-based, header is line 1
    std::string reason;
};

struct ParseResult {
    TransactionLog log;
    std::vector<RejectedRow> rejected;
};

/// Per-customer sufficient statistics. Times are in model time units.
struct RfmRow {
    std::string user_id;
    std::int64_t frequency{0};  // repeat purchase days
    double recency{0.0};        // first to last purchase day
    double age{0.0};            // first purchase day to observation end
    double monetary{0.0};       // mean value per repeat purchase day; 0 without repeats
};

struct CalibrationHoldoutRow {
    std::string user_id;
    std::int64_t frequency_cal{0};
    double recency_cal{0.0};
    double age_cal{0.0};
    double monetary_cal{0.0};
    std::int64_t frequency_holdout{0};
    double holdout_duration{0.0};
};

struct CalibrationHoldoutSummary {
    std::vector<CalibrationHoldoutRow> rows;
    /// Customers whose first purchase falls after the calibration end.
    std::size_t excluded_customers{0};
};

/// Parses ISO-8601 dates and date-times: YYYY-MM-DD[(T| )HH:MM[:SS[.fff]]][Z|+HH:MM|-HH:MM|+HHMM].
/// Values without an offset are taken as UTC. Throws FormatError.
[[nodiscard]] Timestamp parse_timestamp(std::string_view text);

/// "YYYY-MM-DDTHH:MM:SSZ", with ".mmm" appended when milliseconds are nonzero.
[[nodiscard]] std::string format_timestamp(Timestamp ts);

/// Durations such as "1d", "12h", "30m", "45s", "500ms"; a bare number means days.
[[nodiscard]] TimeUnit parse_time_unit(std::string_view text);

/// Splits one delimited line; double-quoted fields may contain the delimiter and "" escapes.
[[nodiscard]] std::vector<std::string> split_delimited(std::string_view line, char delimiter);

/// Reads a header row plus records. Malformed rows are rejected and reported, not fatal.
/// Throws FormatError when a mapped column is missing and DuplicateIdError on a repeated transaction id.
[[nodiscard]] ParseResult parse_transactions(std::istream& source, const ColumnMapping& mapping = {});

/// Same-calendar-day (UTC) transactions merge into one purchase day with summed value.
/// Rows are ordered by user_id. Throws InputError if a transaction is after `observation_end`.
[[nodiscard]] std::vector<RfmRow> summarize_rfm(std::span<const TransactionRecord> log, Timestamp observation_end,
                                                TimeUnit time_unit = kOneDay);

/// Calibration statistics over timestamps <= calibration_end; holdout counts purchase days in
/// (calibration_end, observation_end] not already seen in calibration.
[[nodiscard]] CalibrationHoldoutSummary calibration_holdout_summary(std::span<const TransactionRecord> log,
                                                                    Timestamp calibration_end,
                                                                    Timestamp observation_end,
                                                                    TimeUnit time_unit = kOneDay);

} // namespace clvkit
