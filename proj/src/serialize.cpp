#include "clvkit/serialize.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

namespace clvkit {

namespace {

constexpr const char* kBgnbdTag = "bg/nbd";
constexpr const char* kGgTag = "gamma-gamma";
constexpr std::array<const char*, 3> kGgTableLabels{"p", "q", "lambda"};

Json coefficient_entry(double estimate, double se, const std::pair<double, double>& ci) {
    return {{"estimate", estimate}, {"se", se}, {"lower_95", ci.first}, {"upper_95", ci.second}};
}

Json fit_settings_json(const FitSettings& fit) {
    return {{"initial_simplex_scale", fit.optimizer.initial_simplex_scale},
            {"tolerance", fit.optimizer.tolerance},
            {"max_iterations", fit.optimizer.max_iterations},
            {"restarts", fit.optimizer.restarts},
            {"penalizer", fit.penalizer},
            {"iterations", fit.iterations},
            {"evaluations", fit.evaluations},
            {"converged", fit.converged}};
}

const Json& field(const Json& doc, const char* key) {
    if (!doc.is_object() || !doc.contains(key)) throw FormatError(std::string("parameter document lacks '") + key + "'");
    return doc.at(key);
}

double number_field(const Json& doc, const char* key) {
    const Json& v = field(doc, key);
    if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (!v.is_number()) throw FormatError(std::string("parameter field '") + key + "' is not a number");
    return v.get<double>();
}

template <typename Int>
Int integer_field(const Json& doc, const char* key) {
    const Json& v = field(doc, key);
    if (!v.is_number_integer()) throw FormatError(std::string("parameter field '") + key + "' is not an integer");
    return v.get<Int>();
}

FitSettings fit_settings_from_json(const Json& doc) {
    FitSettings fit;
    fit.optimizer.initial_simplex_scale = number_field(doc, "initial_simplex_scale");
    fit.optimizer.tolerance = number_field(doc, "tolerance");
    fit.optimizer.max_iterations = integer_field<std::size_t>(doc, "max_iterations");
    fit.optimizer.restarts = integer_field<std::size_t>(doc, "restarts");
    fit.penalizer = number_field(doc, "penalizer");
    fit.iterations = integer_field<std::size_t>(doc, "iterations");
    fit.evaluations = integer_field<std::size_t>(doc, "evaluations");
    const Json& converged = field(doc, "converged");
    if (!converged.is_boolean()) throw FormatError("parameter field 'converged' is not a boolean");
    fit.converged = converged.get<bool>();
    return fit;
}

void check_tag(const Json& doc, const char* expected) {
    const Json& tag = field(doc, "model");
    if (!tag.is_string() || tag.get<std::string>() != expected) {
        throw FormatError(std::string("expected a '") + expected + "' parameter document");
    }
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

template <std::size_t N>
std::string table(const std::array<const char*, N>& labels, const std::array<double, N>& coeff,
                  const std::array<std::pair<double, double>, N>& ci) {
    std::string out = "parameter,coeff,lower 95% CI,upper 95% CI\n";
    for (std::size_t i = 0; i < N; ++i) {
        out += std::string(labels[i]) + "," + fixed6(coeff[i]) + "," + fixed6(ci[i].first) + "," +
               fixed6(ci[i].second) + "\n";
    }
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (const char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

// Header-indexed reader for the numeric tables this module writes.
class CsvTable {
public:
    explicit CsvTable(std::istream& in) : in_(in) {
        std::string header;
        if (!std::getline(in_, header)) throw FormatError("table is empty");
        strip_cr(header);
        const auto names = split_delimited(header, ',');
        for (std::size_t i = 0; i < names.size(); ++i) columns_[names[i]] = i;
    }

    [[nodiscard]] bool has(const std::string& name) const { return columns_.count(name) > 0; }

    [[nodiscard]] std::size_t column(const std::string& name) const {
        const auto it = columns_.find(name);
        if (it == columns_.end()) throw FormatError("table lacks column '" + name + "'");
        return it->second;
    }

    bool next(std::vector<std::string>& fields) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_;
            strip_cr(line);
            if (line.empty()) continue;
            fields = split_delimited(line, ',');
            if (fields.size() < columns_.size()) {
                throw FormatError("line " + std::to_string(line_ + 1) + ": expected " +
                                  std::to_string(columns_.size()) + " fields");
            }
            return true;
        }
        return false;
    }

    [[nodiscard]] double real(const std::vector<std::string>& fields, std::size_t col) const {
        const std::string& s = fields[col];
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) {
            throw FormatError("line " + std::to_string(line_ + 1) + ": '" + s + "' is not a number");
        }
        return v;
    }

    [[nodiscard]] std::int64_t integer(const std::vector<std::string>& fields, std::size_t col) const {
        const std::string& s = fields[col];
        std::int64_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) {
            throw FormatError("line " + std::to_string(line_ + 1) + ": '" + s + "' is not an integer");
        }
        return v;
    }

private:
    static void strip_cr(std::string& s) {
        if (!s.empty() && s.back() == '\r') s.pop_back();
    }

    std::istream& in_;
    std::map<std::string, std::size_t> columns_;
    std::size_t line_{0};
};

} // namespace

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

Json to_json(const BgnbdParams& params) {
    Json coeffs = Json::object();
    const auto values = params.coefficients.as_array();
    for (std::size_t i = 0; i < 4; ++i) {
        coeffs[kBgnbdParameterNames[i]] = coefficient_entry(values[i], params.standard_errors[i], params.ci95[i]);
    }
    return {{"model", kBgnbdTag},
            {"coefficients", coeffs},
            {"log_likelihood", params.log_likelihood},
            {"n_customers", params.n_customers},
            {"fit", fit_settings_json(params.fit)}};
}

Json to_json(const GgParams& params) {
    Json coeffs = Json::object();
    const auto values = params.coefficients.as_array();
    for (std::size_t i = 0; i < 3; ++i) {
        coeffs[kGgParameterNames[i]] = coefficient_entry(values[i], params.standard_errors[i], params.ci95[i]);
    }
    coeffs["lambda"] = coeffs["gamma"];
    Json doc = {{"model", kGgTag},
                {"coefficients", coeffs},
                {"log_likelihood", params.log_likelihood},
                {"n_customers", params.n_customers},
                {"correlation_threshold", params.correlation_threshold},
                {"sample_mean_monetary", params.sample_mean_monetary},
                {"warnings", params.warnings},
                {"fit", fit_settings_json(params.fit)}};
    // nlohmann writes NaN as null; null reads back as NaN.
    doc["frequency_monetary_correlation"] = std::isnan(params.frequency_monetary_correlation)
                                                ? Json(nullptr)
                                                : Json(params.frequency_monetary_correlation);
    return doc;
}

BgnbdParams bgnbd_from_json(const Json& doc) {
    check_tag(doc, kBgnbdTag);
    BgnbdParams out;
    const Json& coeffs = field(doc, "coefficients");
    std::array<double, 4> values{};
    for (std::size_t i = 0; i < 4; ++i) {
        const Json& entry = field(coeffs, kBgnbdParameterNames[i]);
        values[i] = number_field(entry, "estimate");
        out.standard_errors[i] = number_field(entry, "se");
        out.ci95[i] = {number_field(entry, "lower_95"), number_field(entry, "upper_95")};
    }
    out.coefficients = {values[0], values[1], values[2], values[3]};
    out.coefficients.validate();
    out.log_likelihood = number_field(doc, "log_likelihood");
    out.n_customers = integer_field<std::size_t>(doc, "n_customers");
    out.fit = fit_settings_from_json(field(doc, "fit"));
    return out;
}

GgParams gg_from_json(const Json& doc) {
    check_tag(doc, kGgTag);
    GgParams out;
    const Json& coeffs = field(doc, "coefficients");
    std::array<double, 3> values{};
    for (std::size_t i = 0; i < 3; ++i) {
        // The third coefficient may appear under its table label only.
        const char* key = (i == 2 && !coeffs.contains("gamma")) ? "lambda" : kGgParameterNames[i];
        const Json& entry = field(coeffs, key);
        values[i] = number_field(entry, "estimate");
        out.standard_errors[i] = number_field(entry, "se");
        out.ci95[i] = {number_field(entry, "lower_95"), number_field(entry, "upper_95")};
    }
    out.coefficients = {values[0], values[1], values[2]};
    out.coefficients.validate();
    out.log_likelihood = number_field(doc, "log_likelihood");
    out.n_customers = integer_field<std::size_t>(doc, "n_customers");
    out.frequency_monetary_correlation = number_field(doc, "frequency_monetary_correlation");
    out.correlation_threshold = number_field(doc, "correlation_threshold");
    out.sample_mean_monetary = number_field(doc, "sample_mean_monetary");
    const Json& warnings = field(doc, "warnings");
    if (!warnings.is_array()) throw FormatError("parameter field 'warnings' is not an array");
    for (const Json& w : warnings) out.warnings.push_back(w.get<std::string>());
    out.fit = fit_settings_from_json(field(doc, "fit"));
    return out;
}

std::string coefficient_table(const BgnbdParams& params) {
    return table(kBgnbdParameterNames, params.coefficients.as_array(), params.ci95);
}

std::string coefficient_table(const GgParams& params) {
    return table(kGgTableLabels, params.coefficients.as_array(), params.ci95);
}

void write_transactions_csv(std::ostream& out, std::span<const TransactionRecord> log) {
    out << "user_id,transaction_id,timestamp,value\n";
    for (const auto& t : log) {
        out << csv_field(t.user_id) << ',' << csv_field(t.transaction_id) << ',' << format_timestamp(t.timestamp)
            << ',' << format_number(t.value) << '\n';
    }
}

void write_rfm_csv(std::ostream& out, std::span<const RfmRow> rows) {
    out << "user_id,frequency,recency,age,monetary\n";
    for (const auto& r : rows) {
        out << csv_field(r.user_id) << ',' << r.frequency << ',' << format_number(r.recency) << ',';
        out << format_number(r.age) << ',' << format_number(r.monetary) << '\n';
    }
}

void write_rfm_jsonl(std::ostream& out, std::span<const RfmRow> rows) {
    for (const auto& r : rows) {
        out << Json{{"user_id", r.user_id},
                    {"frequency", r.frequency},
                    {"recency", r.recency},
                    {"age", r.age},
                    {"monetary", r.monetary}}
                   .dump()
            << '\n';
    }
}

std::vector<RfmRow> read_rfm_csv(std::istream& in) {
    CsvTable t(in);
    const std::size_t c_id = t.column("user_id");
    const std::size_t c_x = t.column("frequency");
    const std::size_t c_tx = t.column("recency");
    const std::size_t c_T = t.column("age");
    const bool has_m = t.has("monetary");
    const std::size_t c_m = has_m ? t.column("monetary") : 0;
    std::vector<RfmRow> rows;
    std::vector<std::string> f;
    while (t.next(f)) {
        RfmRow r;
        r.user_id = f[c_id];
        r.frequency = t.integer(f, c_x);
        r.recency = t.real(f, c_tx);
        r.age = t.real(f, c_T);
        if (has_m) r.monetary = t.real(f, c_m);
        if (r.frequency < 0 || !(r.recency >= 0.0) || !(r.recency <= r.age)) {
            throw FormatError("RFM row for '" + r.user_id + "' violates 0 <= recency <= age or frequency >= 0");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_calibration_csv(std::ostream& out, std::span<const CalibrationHoldoutRow> rows) {
    out << "user_id,frequency_cal,recency_cal,age_cal,monetary_cal,frequency_holdout,holdout_duration\n";
    for (const auto& r : rows) {
        out << csv_field(r.user_id) << ',' << r.frequency_cal << ',' << format_number(r.recency_cal) << ',';
        out << format_number(r.age_cal) << ',';
        out << format_number(r.monetary_cal) << ',' << r.frequency_holdout << ',';
        out << format_number(r.holdout_duration) << '\n';
    }
}

void write_calibration_jsonl(std::ostream& out, std::span<const CalibrationHoldoutRow> rows) {
    for (const auto& r : rows) {
        out << Json{{"user_id", r.user_id},
                    {"frequency_cal", r.frequency_cal},
                    {"recency_cal", r.recency_cal},
                    {"age_cal", r.age_cal},
                    {"monetary_cal", r.monetary_cal},
                    {"frequency_holdout", r.frequency_holdout},
                    {"holdout_duration", r.holdout_duration}}
                   .dump()
            << '\n';
    }
}

std::vector<CalibrationHoldoutRow> read_calibration_csv(std::istream& in) {
    CsvTable t(in);
    const std::size_t c_id = t.column("user_id");
    const std::size_t c_x = t.column("frequency_cal");
    const std::size_t c_tx = t.column("recency_cal");
    const std::size_t c_T = t.column("age_cal");
    const std::size_t c_m = t.column("monetary_cal");
    const std::size_t c_h = t.column("frequency_holdout");
    const std::size_t c_d = t.column("holdout_duration");
    std::vector<CalibrationHoldoutRow> rows;
    std::vector<std::string> f;
    while (t.next(f)) {
        rows.push_back({f[c_id], t.integer(f, c_x), t.real(f, c_tx), t.real(f, c_T), t.real(f, c_m),
                        t.integer(f, c_h), t.real(f, c_d)});
    }
    return rows;
}

void write_predictions_csv(std::ostream& out, std::span<const CustomerPrediction> rows) {
    out << "user_id,p_alive,expected_txns,expected_value,expected_clv,horizon\n";
    for (const auto& p : rows) {
        out << csv_field(p.user_id) << ',' << format_number(p.p_alive) << ',';
        out << format_number(p.expected_transactions) << ',';
        out << format_number(p.expected_value) << ',';
        out << format_number(p.expected_clv) << ',';
        out << format_number(p.horizon) << '\n';
    }
}

void write_predictions_jsonl(std::ostream& out, std::span<const CustomerPrediction> rows) {
    for (const auto& p : rows) {
        Json j = Json::object();
        j["user_id"] = p.user_id;
        j["p_alive"] = p.p_alive;
        j["expected_txns"] = p.expected_transactions;
        j["expected_value"] = p.expected_value;
        j["expected_clv"] = p.expected_clv;
        j["horizon"] = p.horizon;
        out << j.dump() << '\n';
    }
}

void write_matrix_csv(std::ostream& out, const FrequencyRecencyMatrix& m) {
    out << "recency\\frequency";
    for (const auto x : m.frequency) out << ',' << x;
    out << '\n';
    for (std::size_t i = 0; i < m.recency.size(); ++i) {
        out << format_number(m.recency[i]);
        for (std::size_t j = 0; j < m.frequency.size(); ++j) {
            out << ',';
            if (const auto& cell = m.at(i, j)) out << format_number(*cell);
        }
        out << '\n';
    }
}

Json to_json(const FrequencyRecencyMatrix& m) {
    Json cells = Json::array();
    for (std::size_t i = 0; i < m.recency.size(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < m.frequency.size(); ++j) {
            const auto& cell = m.at(i, j);
            row.push_back(cell ? Json(*cell) : Json(nullptr));
        }
        cells.push_back(std::move(row));
    }
    return {{"frequency", m.frequency}, {"recency", m.recency}, {"cells", cells}};
}

void write_timeline_csv(std::ostream& out, std::span<const ChurnTimelinePoint> points) {
    out << "time,p_alive,is_purchase\n";
    for (const auto& p : points) {
        out << format_number(p.time) << ',';
        out << format_number(p.p_alive) << ',' << (p.is_purchase ? 1 : 0) << '\n';
    }
}

void write_timeline_jsonl(std::ostream& out, std::span<const ChurnTimelinePoint> points) {
    for (const auto& p : points) {
        out << Json{{"time", p.time}, {"p_alive", p.p_alive}, {"is_purchase", p.is_purchase}}.dump() << '\n';
    }
}

void write_latent_csv(std::ostream& out, const Simulation& sim) {
    out << "user_id,lambda,p_dropout,spend_rate,n_transactions\n";
    for (std::size_t i = 0; i < sim.customers.size(); ++i) {
        const auto& c = sim.customers[i];
        out << simulated_user_id(i) << ',' << format_number(c.latent.lambda) << ',';
        out << format_number(c.latent.p_dropout) << ',';
        if (!std::isnan(c.spend_rate)) out << format_number(c.spend_rate);
        out << ',' << c.times.size() << '\n';
    }
}

void write_frequency_comparison_csv(std::ostream& out, const FrequencyComparison& cmp) {
    out << "bin,actual,simulated\n";
    for (const auto& b : cmp.bins) {
        out << b.label << ',' << format_number(b.actual) << ',';
        out << format_number(b.simulated) << '\n';
    }
}

Json to_json(const FrequencyComparison& cmp) {
    Json bins = Json::array();
    for (const auto& b : cmp.bins) bins.push_back({{"bin", b.label}, {"actual", b.actual}, {"simulated", b.simulated}});
    return {{"bins", bins}, {"n_actual", cmp.n_actual}, {"n_simulated", cmp.n_simulated}};
}

void write_holdout_groups_csv(std::ostream& out, std::span<const FrequencyGroup> groups) {
    out << "frequency_cal,n,mean_actual,mean_predicted,low_support\n";
    for (const auto& g : groups) {
        out << g.frequency_cal << ',' << g.n << ',' << format_number(g.mean_actual) << ',';
        out << format_number(g.mean_predicted) << ',' << (g.low_support ? 1 : 0) << '\n';
    }
}

Json to_json(const MetricsReport& metrics) {
    return {{"mse", metrics.mse}, {"mae", metrics.mae}, {"msle", metrics.msle}, {"n", metrics.n}};
}

Json to_json(const HoldoutEvaluation& eval) {
    Json groups = Json::array();
    for (const auto& g : eval.groups) {
        groups.push_back({{"frequency_cal", g.frequency_cal},
                          {"n", g.n},
                          {"mean_actual", g.mean_actual},
                          {"mean_predicted", g.mean_predicted},
                          {"low_support", g.low_support}});
    }
    return {{"groups", groups}, {"metrics", to_json(eval.metrics)}};
}

} // namespace clvkit
