#include "clvkit/cli.hpp"

#include "clvkit/evaluate.hpp"
#include "clvkit/ingest.hpp"
#include "clvkit/predict.hpp"
#include "clvkit/serialize.hpp"
#include "clvkit/simulate.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace clvkit {

namespace {

constexpr const char* kVersion = "0.1.0";

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Settings {
    std::string config;
    std::string output;
    std::string format{"text"};
    bool stamp{false};

    std::string input;
    std::string rfm;
    std::string calibration;
    std::string bgnbd;
    std::string gg;
    std::string save;
    std::string latent;
    std::string metrics;

    std::string user_col{"user_id"};
    std::string txn_col{"transaction_id"};
    std::string time_col{"timestamp"};
    std::string value_col{"value"};
    std::string delimiter{","};
    std::string time_unit{"1d"};
    std::string observation_end;
    std::string calibration_end;

    double penalizer{0.0};
    double tolerance{1e-8};
    std::size_t max_iterations{10000};
    std::size_t restarts{1};
    double simplex_scale{0.5};
    double correlation_threshold{0.1};

    double horizon{1.0};
    double discount_rate{0.0};

    std::string user;
    double grid_step{1.0};

    std::string mode{"p_alive"};
    std::string eval_mode{"holdout"};
    std::int64_t max_frequency{20};
    double max_recency{30.0};
    double recency_step{1.0};
    double age{30.0};

    std::size_t customers{1000};
    double r{0.0};
    double alpha{0.0};
    double a{0.0};
    double b{0.0};
    double p{std::numeric_limits<double>::quiet_NaN()};
    double q{std::numeric_limits<double>::quiet_NaN()};
    double gamma{std::numeric_limits<double>::quiet_NaN()};
    std::uint64_t seed{0};
    std::string origin{"2022-01-01T00:00:00Z"};

    std::size_t multiplier{10};
    std::int64_t max_bin{7};
};

struct Run {
    Settings s;
    CLI::App* command{nullptr};
    std::vector<std::string> warnings;
    Json extra = Json::object();  // command-specific facts for the metadata
};

void add_output_options(CLI::App* sub, Settings& s) {
    sub->add_option("--config", s.config, "JSON object of flag values; explicit flags win");
    sub->add_option("--output", s.output, "Primary output path (default: standard output)");
    sub->add_option("--format", s.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    sub->add_flag("--stamp", s.stamp, "Record the wall-clock time in the metadata");
}

void add_ingest_options(CLI::App* sub, Settings& s) {
    sub->add_option("--input", s.input, "Transaction file");
    sub->add_option("--user-col", s.user_col);
    sub->add_option("--txn-col", s.txn_col);
    sub->add_option("--time-col", s.time_col);
    sub->add_option("--value-col", s.value_col);
    sub->add_option("--delimiter", s.delimiter);
    sub->add_option("--time-unit", s.time_unit, "Model time unit, e.g. 1d, 7d, 12h");
    sub->add_option("--observation-end", s.observation_end, "ISO-8601 end of the observation window");
}

void add_optimizer_options(CLI::App* sub, Settings& s) {
    sub->add_option("--rfm", s.rfm, "RFM table written by summarize");
    sub->add_option("--save", s.save, "Write the parameter document here");
    sub->add_option("--tolerance", s.tolerance);
    sub->add_option("--max-iterations", s.max_iterations);
    sub->add_option("--restarts", s.restarts);
    sub->add_option("--simplex-scale", s.simplex_scale);
}

OptimizerConfig optimizer_config(const Settings& s) {
    OptimizerConfig c;
    c.initial_simplex_scale = s.simplex_scale;
    c.tolerance = s.tolerance;
    c.max_iterations = s.max_iterations;
    c.restarts = s.restarts;
    return c;
}

// Applies a --config document: keys are long flag names without dashes.
void merge_config(CLI::App* sub, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::exception& e) {
        throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw UsageError("config file must hold a JSON object");
    for (const auto& [key, value] : doc.items()) {
        CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (opt == nullptr || key == "config") throw UsageError("unknown config key '" + key + "'");
        if (opt->count() > 0) continue;
        std::string text;
        if (value.is_string()) {
            text = value.get<std::string>();
        } else if (value.is_number_float()) {
            text = format_number(value.get<double>());
        } else if (value.is_number() || value.is_boolean()) {
            text = value.dump();
        } else {
            throw UsageError("config key '" + key + "' must be a string, number or boolean");
        }
        opt->add_result(text);
        try {
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw UsageError("config key '" + key + "': " + e.what());
        }
    }
}

void require(const Run& run, std::initializer_list<const char*> names) {
    for (const char* name : names) {
        if (run.command->get_option(name)->count() == 0) {
            throw UsageError(run.command->get_name() + " requires " + name);
        }
    }
}

Timestamp flag_timestamp(const std::string& name, const std::string& text) {
    try {
        return parse_timestamp(text);
    } catch (const std::exception& e) {
        throw UsageError(name + ": " + e.what());
    }
}

TimeUnit flag_time_unit(const std::string& text) {
    try {
        return parse_time_unit(text);
    } catch (const std::exception& e) {
        throw UsageError(std::string("--time-unit: ") + e.what());
    }
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    return in;
}

Json read_json(const std::string& path) {
    auto in = open_input(path);
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw FormatError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << text;
    if (!out) throw InputError("failed writing '" + path + "'");
}

ColumnMapping column_mapping(const Settings& s) {
    if (s.delimiter.size() != 1) throw UsageError("--delimiter must be a single character");
    return {s.user_col, s.txn_col, s.time_col, s.value_col, s.delimiter.front()};
}

TransactionLog load_transactions(Run& run) {
    auto in = open_input(run.s.input);
    ParseResult parsed = parse_transactions(in, column_mapping(run.s));
    for (const RejectedRow& row : parsed.rejected) {
        run.warnings.push_back("line " + std::to_string(row.line) + " rejected: " + row.reason);
    }
    run.extra["rejected_rows"] = parsed.rejected.size();
    return std::move(parsed.log);
}

std::vector<RfmRow> load_rfm(const std::string& path) {
    auto in = open_input(path);
    return read_rfm_csv(in);
}

bool json_format(const Run& run) { return run.s.format == "json"; }

std::string cmd_summarize(Run& run) {
    require(run, {"--input", "--observation-end"});
    const Settings& s = run.s;
    const TimeUnit unit = flag_time_unit(s.time_unit);
    const Timestamp observation_end = flag_timestamp("--observation-end", s.observation_end);
    const TransactionLog log = load_transactions(run);
    std::ostringstream out;
    if (!s.calibration_end.empty()) {
        const Timestamp calibration_end = flag_timestamp("--calibration-end", s.calibration_end);
        if (!(calibration_end < observation_end)) {
            throw UsageError("--calibration-end must precede --observation-end");
        }
        const CalibrationHoldoutSummary summary = calibration_holdout_summary(log, calibration_end, observation_end, unit);
        run.extra["excluded_customers"] = summary.excluded_customers;
        if (json_format(run)) {
            write_calibration_jsonl(out, summary.rows);
        } else {
            write_calibration_csv(out, summary.rows);
        }
    } else {
        const std::vector<RfmRow> rows = summarize_rfm(log, observation_end, unit);
        if (json_format(run)) {
            write_rfm_jsonl(out, rows);
        } else {
            write_rfm_csv(out, rows);
        }
    }
    return out.str();
}

std::string render_document(const Run& run, const Json& doc, const std::string& table) {
    if (!run.s.save.empty()) write_file(run.s.save, doc.dump(2) + "\n");
    return json_format(run) ? doc.dump(2) + "\n" : table;
}

std::string cmd_fit_bgnbd(Run& run) {
    require(run, {"--rfm"});
    const std::vector<RfmRow> rows = load_rfm(run.s.rfm);
    const BgnbdParams params = fit_bgnbd(rows, optimizer_config(run.s), run.s.penalizer);
    return render_document(run, to_json(params), coefficient_table(params));
}

std::string cmd_fit_gg(Run& run) {
    require(run, {"--rfm"});
    const std::vector<RfmRow> rows = load_rfm(run.s.rfm);
    const GgParams params = fit_gg(rows, optimizer_config(run.s), run.s.correlation_threshold,
                                   [&](const std::string& msg) { run.warnings.push_back(msg); });
    return render_document(run, to_json(params), coefficient_table(params));
}

std::string cmd_predict(Run& run) {
    require(run, {"--bgnbd", "--gg", "--rfm", "--horizon"});
    const BgnbdParams bgnbd = bgnbd_from_json(read_json(run.s.bgnbd));
    const GgParams gg = gg_from_json(read_json(run.s.gg));
    std::vector<RfmRow> rows = load_rfm(run.s.rfm);
    std::stable_sort(rows.begin(), rows.end(),
                     [](const RfmRow& x, const RfmRow& y) { return x.user_id < y.user_id; });
    const auto predictions = predict_customers(bgnbd, gg, rows, run.s.horizon, run.s.discount_rate);
    // Provenance of each customer's spend estimate, counted by source.
    Json sources = Json::object();
    for (const ValueSource src : {ValueSource::conditional_mean, ValueSource::population_mean, ValueSource::sample_mean}) {
        sources[std::string(to_string(src))] = 0;
    }
    for (const auto& p : predictions) {
        auto& n = sources[std::string(to_string(p.value_source))];
        n = n.get<std::size_t>() + 1;
    }
    run.extra["value_sources"] = sources;
    std::ostringstream out;
    if (json_format(run)) {
        write_predictions_jsonl(out, predictions);
    } else {
        write_predictions_csv(out, predictions);
    }
    return out.str();
}

std::string cmd_churn_timeline(Run& run) {
    require(run, {"--bgnbd", "--input", "--user", "--observation-end"});
    const Settings& s = run.s;
    const BgnbdParams params = bgnbd_from_json(read_json(s.bgnbd));
    const TimeUnit unit = flag_time_unit(s.time_unit);
    const Timestamp observation_end = flag_timestamp("--observation-end", s.observation_end);
    const TransactionLog log = load_transactions(run);

    using std::chrono::days;
    std::vector<Timestamp> purchase_days;
    for (const TransactionRecord& t : log) {
        if (t.user_id != s.user) continue;
        const Timestamp day{std::chrono::floor<days>(t.timestamp)};
        if (purchase_days.empty() || purchase_days.back() != day) purchase_days.push_back(day);
    }
    if (purchase_days.empty()) throw InputError("no transactions for user '" + s.user + "'");
    const Timestamp first = purchase_days.front();
    const auto units = [&](Timestamp ts) {
        return static_cast<double>((ts - first).count()) / static_cast<double>(unit.count());
    };
    std::vector<double> purchases;
    for (const Timestamp d : purchase_days) purchases.push_back(units(d));
    const auto points = churn_timeline(params.coefficients, purchases, s.grid_step, units(observation_end));
    std::ostringstream out;
    if (json_format(run)) {
        write_timeline_jsonl(out, points);
    } else {
        write_timeline_csv(out, points);
    }
    return out.str();
}

std::string cmd_matrix(Run& run) {
    require(run, {"--bgnbd"});
    const Settings& s = run.s;
    const BgnbdParams params = bgnbd_from_json(read_json(s.bgnbd));
    MatrixSpec spec;
    spec.max_frequency = s.max_frequency;
    spec.max_recency = s.max_recency;
    spec.recency_step = s.recency_step;
    spec.age = s.age;
    spec.horizon = s.horizon;
    spec.mode = s.mode == "expected" ? MatrixMode::expected_purchases : MatrixMode::p_alive;
    const FrequencyRecencyMatrix m = frequency_recency_matrix(params.coefficients, spec);
    if (json_format(run)) return to_json(m).dump() + "\n";
    std::ostringstream out;
    write_matrix_csv(out, m);
    return out.str();
}

std::string cmd_simulate(Run& run) {
    require(run, {"--horizon", "--r", "--alpha", "--a", "--b"});
    const Settings& s = run.s;
    SimulationConfig config;
    config.n_customers = s.customers;
    config.horizon = s.horizon;
    config.bgnbd = {s.r, s.alpha, s.a, s.b};
    config.seed = s.seed;
    const int spend_given = (std::isnan(s.p) ? 0 : 1) + (std::isnan(s.q) ? 0 : 1) + (std::isnan(s.gamma) ? 0 : 1);
    if (spend_given == 3) {
        config.spend = GgCoefficients{s.p, s.q, s.gamma};
    } else if (spend_given != 0) {
        throw UsageError("--p, --q and --gamma must be given together");
    }
    const TimeUnit unit = flag_time_unit(s.time_unit);
    const Timestamp origin = flag_timestamp("--origin", s.origin);

    const Simulation sim = simulate_customers(config);
    if (!s.latent.empty()) {
        std::ostringstream latent;
        write_latent_csv(latent, sim);
        write_file(s.latent, latent.str());
    }
    const TransactionLog log = simulation_transactions(sim, origin, unit);
    run.extra["transactions"] = log.size();
    std::ostringstream out;
    if (json_format(run)) {
        for (const auto& t : log) {
            out << Json{{"user_id", t.user_id},
                        {"transaction_id", t.transaction_id},
                        {"timestamp", format_timestamp(t.timestamp)},
                        {"value", t.value}}
                       .dump()
                << '\n';
        }
    } else {
        write_transactions_csv(out, log);
    }
    return out.str();
}

std::string cmd_evaluate(Run& run) {
    require(run, {"--bgnbd"});
    const Settings& s = run.s;
    const BgnbdParams params = bgnbd_from_json(read_json(s.bgnbd));
    std::ostringstream out;
    if (s.eval_mode == "frequency") {
        require(run, {"--rfm", "--horizon"});
        const std::vector<RfmRow> rows = load_rfm(s.rfm);
        const FrequencyComparison cmp =
            repeat_frequency_comparison(rows, params.coefficients, {s.horizon, s.seed, s.multiplier, s.max_bin});
        if (json_format(run)) return to_json(cmp).dump(2) + "\n";
        write_frequency_comparison_csv(out, cmp);
        return out.str();
    }
    require(run, {"--calibration"});
    auto in = open_input(s.calibration);
    const std::vector<CalibrationHoldoutRow> rows = read_calibration_csv(in);
    const HoldoutEvaluation eval = calibration_holdout_eval(rows, params.coefficients);
    run.extra["metrics"] = to_json(eval.metrics);
    if (!s.metrics.empty()) write_file(s.metrics, to_json(eval.metrics).dump(2) + "\n");
    if (json_format(run)) return to_json(eval).dump(2) + "\n";
    write_holdout_groups_csv(out, eval.groups);
    return out.str();
}

Json resolved_options(const CLI::App* sub) {
    Json options = Json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        if (opt->get_lnames().empty()) continue;
        const std::string& name = opt->get_lnames().front();
        if (name == "help") continue;
        if (opt->get_expected_min() == 0) {
            options[name] = opt->count() > 0 ? "true" : "false";
        } else if (opt->count() > 0) {
            const auto& results = opt->results();
            std::string joined;
            for (std::size_t i = 0; i < results.size(); ++i) joined += (i ? "," : "") + results[i];
            options[name] = joined;
        } else {
            options[name] = opt->get_default_str();
        }
    }
    return options;
}

std::string utc_now() {
    const auto now = std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
    return format_timestamp(now);
}

const char* error_category(const std::exception& e) {
    if (dynamic_cast<const FitError*>(&e) != nullptr) return "fit error";
    if (dynamic_cast<const DomainError*>(&e) != nullptr) return "domain error";
    if (dynamic_cast<const InputError*>(&e) != nullptr) return "input error";
    if (dynamic_cast<const FormatError*>(&e) != nullptr) return "format error";
    if (dynamic_cast<const NumericError*>(&e) != nullptr) return "numeric error";
    return "error";
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Customer lifetime value toolkit: purchase-count and spend models", "clvkit"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Run run;
    Settings& s = run.s;
    using Handler = std::string (*)(Run&);
    std::vector<std::pair<CLI::App*, Handler>> commands;

    auto* summarize = app.add_subcommand("summarize", "Transactions to RFM or calibration/holdout rows");
    add_output_options(summarize, s);
    add_ingest_options(summarize, s);
    summarize->add_option("--calibration-end", s.calibration_end, "Emit a calibration/holdout split at this time");
    commands.emplace_back(summarize, &cmd_summarize);

    auto* fit_b = app.add_subcommand("fit-bgnbd", "Fit the purchase-count model");
    add_output_options(fit_b, s);
    add_optimizer_options(fit_b, s);
    fit_b->add_option("--penalizer", s.penalizer, "Weight of the squared log-parameter penalty");
    commands.emplace_back(fit_b, &cmd_fit_bgnbd);

    auto* fit_g = app.add_subcommand("fit-gg", "Fit the spend model");
    add_output_options(fit_g, s);
    add_optimizer_options(fit_g, s);
    fit_g->add_option("--correlation-threshold", s.correlation_threshold);
    commands.emplace_back(fit_g, &cmd_fit_gg);

    auto* predict = app.add_subcommand("predict", "Per-customer P(alive), purchases and spend over a horizon");
    add_output_options(predict, s);
    predict->add_option("--bgnbd", s.bgnbd, "Purchase-count parameter document");
    predict->add_option("--gg", s.gg, "Spend parameter document");
    predict->add_option("--rfm", s.rfm);
    predict->add_option("--horizon", s.horizon);
    predict->add_option("--discount-rate", s.discount_rate);
    commands.emplace_back(predict, &cmd_predict);

    auto* timeline = app.add_subcommand("churn-timeline", "P(alive) over time for one customer");
    add_output_options(timeline, s);
    add_ingest_options(timeline, s);
    timeline->add_option("--bgnbd", s.bgnbd);
    timeline->add_option("--user", s.user);
    timeline->add_option("--grid-step", s.grid_step);
    commands.emplace_back(timeline, &cmd_churn_timeline);

    auto* matrix = app.add_subcommand("matrix", "Frequency x recency grid of P(alive) or expected purchases");
    add_output_options(matrix, s);
    matrix->add_option("--bgnbd", s.bgnbd);
    matrix->add_option("--mode", s.mode)->check(CLI::IsMember({"p_alive", "expected"}));
    matrix->add_option("--max-frequency", s.max_frequency);
    matrix->add_option("--max-recency", s.max_recency);
    matrix->add_option("--recency-step", s.recency_step);
    matrix->add_option("--age", s.age);
    matrix->add_option("--horizon", s.horizon);
    commands.emplace_back(matrix, &cmd_matrix);

    auto* simulate = app.add_subcommand("simulate", "Synthetic transactions from known parameters");
    add_output_options(simulate, s);
    simulate->add_option("--customers", s.customers);
    simulate->add_option("--horizon", s.horizon, "Observation length in time units");
    simulate->add_option("--r", s.r);
    simulate->add_option("--alpha", s.alpha);
    simulate->add_option("--a", s.a);
    simulate->add_option("--b", s.b);
    simulate->add_option("--p", s.p);
    simulate->add_option("--q", s.q);
    simulate->add_option("--gamma", s.gamma);
    simulate->add_option("--seed", s.seed);
    simulate->add_option("--origin", s.origin, "ISO-8601 time of t = 0");
    simulate->add_option("--time-unit", s.time_unit);
    simulate->add_option("--latent", s.latent, "Write per-customer latent draws here");
    commands.emplace_back(simulate, &cmd_simulate);

    auto* evaluate = app.add_subcommand("evaluate", "Holdout or repeat-frequency validation");
    add_output_options(evaluate, s);
    evaluate->add_option("--bgnbd", s.bgnbd);
    evaluate->add_option("--mode", s.eval_mode)->check(CLI::IsMember({"holdout", "frequency"}));
    evaluate->add_option("--calibration", s.calibration, "Calibration/holdout table written by summarize");
    evaluate->add_option("--metrics", s.metrics, "Write the metrics document here");
    evaluate->add_option("--rfm", s.rfm);
    evaluate->add_option("--horizon", s.horizon);
    evaluate->add_option("--seed", s.seed);
    evaluate->add_option("--multiplier", s.multiplier);
    evaluate->add_option("--max-bin", s.max_bin);
    commands.emplace_back(evaluate, &cmd_evaluate);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    Handler handler = nullptr;
    for (const auto& [sub, h] : commands) {
        if (sub->parsed()) {
            run.command = sub;
            handler = h;
        }
    }

    try {
        if (!s.config.empty()) merge_config(run.command, s.config);
        const std::string primary = handler(run);

        Json meta = {{"command", run.command->get_name()},
                     {"version", kVersion},
                     {"options", resolved_options(run.command)},
                     {"warnings", run.warnings}};
        for (const auto& [key, value] : run.extra.items()) meta[key] = value;
        if (s.stamp) meta["generated_at"] = utc_now();

        for (const std::string& w : run.warnings) err << "warning: " << w << '\n';
        if (s.output.empty()) {
            out << primary;
            err << meta.dump(2) << '\n';
        } else {
            write_file(s.output, primary);
            write_file(s.output + ".meta.json", meta.dump(2) + "\n");
        }
        return kExitOk;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << error_category(e) << ": " << e.what() << '\n';
        return kExitFailure;
    }
}

} // namespace clvkit
