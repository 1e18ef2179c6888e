#pragma once

#include "clvkit/bgnbd.hpp"
#include "clvkit/evaluate.hpp"
#include "clvkit/gamma_gamma.hpp"
#include "clvkit/ingest.hpp"
#include "clvkit/predict.hpp"
#include "clvkit/simulate.hpp"

#include <json.hpp>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace clvkit {

using Json = nlohmann::json;

/// Shortest decimal text that parses back to the same double.
[[nodiscard]] std::string format_number(double value);

/// Parameter documents. Loading checks the model tag and throws FormatError on any missing field.
[[nodiscard]] Json to_json(const BgnbdParams& params);
[[nodiscard]] Json to_json(const GgParams& params);
[[nodiscard]] BgnbdParams bgnbd_from_json(const Json& doc);
[[nodiscard]] GgParams gg_from_json(const Json& doc);

/// "parameter,coeff,lower 95% CI,upper 95% CI" followed by one row per coefficient, six decimals.
[[nodiscard]] std::string coefficient_table(const BgnbdParams& params);
/// Spend-model rows are labelled p, q, lambda.
[[nodiscard]] std::string coefficient_table(const GgParams& params);

void write_transactions_csv(std::ostream& out, std::span<const TransactionRecord> log);

void write_rfm_csv(std::ostream& out, std::span<const RfmRow> rows);
void write_rfm_jsonl(std::ostream& out, std::span<const RfmRow> rows);
/// Header must name user_id, frequency, recency, age; monetary is optional. Throws FormatError.
[[nodiscard]] std::vector<RfmRow> read_rfm_csv(std::istream& in);

void write_calibration_csv(std::ostream& out, std::span<const CalibrationHoldoutRow> rows);
void write_calibration_jsonl(std::ostream& out, std::span<const CalibrationHoldoutRow> rows);
[[nodiscard]] std::vector<CalibrationHoldoutRow> read_calibration_csv(std::istream& in);

/// Columns user_id, p_alive, expected_txns, expected_value, expected_clv, horizon.
void write_predictions_csv(std::ostream& out, std::span<const CustomerPrediction> rows);
void write_predictions_jsonl(std::ostream& out, std::span<const CustomerPrediction> rows);

/// Header "recency\frequency,0,1,...", one row per recency; empty cells are blank.
void write_matrix_csv(std::ostream& out, const FrequencyRecencyMatrix& m);
[[nodiscard]] Json to_json(const FrequencyRecencyMatrix& m);

/// Columns time, p_alive, is_purchase (0/1).
void write_timeline_csv(std::ostream& out, std::span<const ChurnTimelinePoint> points);
void write_timeline_jsonl(std::ostream& out, std::span<const ChurnTimelinePoint> points);

/// Columns user_id, lambda, p_dropout, spend_rate, n_transactions.
void write_latent_csv(std::ostream& out, const Simulation& sim);

/// Columns bin, actual, simulated.
void write_frequency_comparison_csv(std::ostream& out, const FrequencyComparison& cmp);
[[nodiscard]] Json to_json(const FrequencyComparison& cmp);

/// Columns frequency_cal, n, mean_actual, mean_predicted, low_support.
void write_holdout_groups_csv(std::ostream& out, std::span<const FrequencyGroup> groups);
[[nodiscard]] Json to_json(const MetricsReport& metrics);
[[nodiscard]] Json to_json(const HoldoutEvaluation& eval);

} // namespace clvkit
