// Command-line front end: dataset/model generation, corruption sweeps,
// kernel uncertainty scoring and error-detection evaluation.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qipf/bandwidth.hpp"
#include "qipf/datasets.hpp"
#include "qipf/errors.hpp"
#include "qipf/kernel_field.hpp"
#include "qipf/metrics.hpp"
#include "qipf/mlp.hpp"
#include "qipf/predictions.hpp"
#include "qipf/qipf.hpp"
#include "qipf/rng.hpp"
#include "plotting.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qipf;

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string());
}

void write_config_echo(const json& config, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << config.dump(2) << "\n";
}

struct GridSpec {
    double lo = 0.0;
    double hi = 0.0;
    int steps = 0; // interval count; points = steps + 1

    std::vector<double> points() const {
        std::vector<double> xs(static_cast<std::size_t>(steps) + 1);
        for (int i = 0; i <= steps; ++i)
            xs[static_cast<std::size_t>(i)] =
                lo + (hi - lo) * static_cast<double>(i) / steps;
        return xs;
    }
};

GridSpec parse_grid(const std::string& spec) {
    GridSpec g;
    const auto c1 = spec.find(':');
    const auto c2 = spec.find(':', c1 == std::string::npos ? 0 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw InvalidParameterError("grid spec must be lo:hi:steps, got '" + spec + "'");
    try {
        g.lo = std::stod(spec.substr(0, c1));
        g.hi = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
        g.steps = std::stoi(spec.substr(c2 + 1));
    } catch (const std::exception&) {
        throw InvalidParameterError("grid spec must be lo:hi:steps, got '" + spec + "'");
    }
    if (!(g.hi > g.lo) || g.steps < 1)
        throw InvalidParameterError("grid spec needs hi > lo and steps >= 1");
    return g;
}

// ---------------------------------------------------------------- demo-sine

struct DemoSineOptions {
    std::vector<double> widths{0.15, 0.3, 0.5};
    int modes = 8;
    int first_mode = 1;
    std::string grid = "-2:2:400";
    int samples = 512;
    std::string calibration = "grid"; // grid | samples
    std::string out_dir = "demo_sine_out";
};

void run_demo_sine(const DemoSineOptions& opt) {
    if (opt.samples < 2) throw InvalidParameterError("need at least 2 samples");
    if (opt.calibration != "grid" && opt.calibration != "samples")
        throw InvalidParameterError("--calibration must be grid or samples");
    const GridSpec grid = parse_grid(opt.grid);
    ensure_dir(opt.out_dir);

    // unit sine sampled uniformly over one period
    Matrix samples(static_cast<std::size_t>(opt.samples), 1);
    for (int i = 0; i < opt.samples; ++i)
        samples(static_cast<std::size_t>(i), 0) =
            std::sin(2.0 * std::numbers::pi * i / opt.samples);

    const auto xs = grid.points();
    Matrix queries(xs.size(), 1);
    for (std::size_t i = 0; i < xs.size(); ++i) queries(i, 0) = xs[i];

    for (double width : opt.widths) {
        KernelField field(samples, width);
        const Matrix& calib = opt.calibration == "grid" ? queries : samples;
        Energies energies = calibrate_energies(field, calib, opt.modes, opt.first_mode);
        ModeSpectrum spec = decompose(queries, field, energies);

        const fs::path csv_path =
            fs::path(opt.out_dir) / ("sine_w" + fmt_short(width) + ".csv");
        std::ofstream csv(csv_path);
        if (!csv) throw IoError("cannot write " + csv_path.string());
        csv << "x,ipf,qipf";
        for (int p = 0; p < opt.modes; ++p)
            csv << ",mode_" << opt.first_mode + p;
        csv << "\n";
        std::vector<double> ipf_values(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            ipf_values[i] = ipf(queries.row(i), field);
            csv << fmt17(xs[i]) << "," << fmt17(ipf_values[i]) << ","
                << fmt17(spec.base_qipf[i]);
            for (int p = 0; p < opt.modes; ++p)
                csv << "," << fmt17(spec.modes(i, static_cast<std::size_t>(p)));
            csv << "\n";
        }
        csv.close();

        std::vector<plotting::Series> series;
        series.push_back({"ipf", xs, ipf_values});
        series.push_back({"qipf", xs, spec.base_qipf});
        for (int p = 0; p < opt.modes; ++p) {
            plotting::Series s;
            s.label = "mode " + std::to_string(opt.first_mode + p);
            s.x = xs;
            s.y.resize(xs.size());
            for (std::size_t i = 0; i < xs.size(); ++i)
                s.y[i] = spec.modes(i, static_cast<std::size_t>(p));
            series.push_back(std::move(s));
        }
        plotting::PlotOptions popt;
        popt.title = "kernel width " + fmt_short(width);
        popt.x_label = "x";
        popt.y_label = "value";
        popt.y_lo_percentile = 0.02; // mode spikes near denominator zeros
        popt.y_hi_percentile = 0.98;
        plotting::write_svg(
            fs::path(opt.out_dir) / ("sine_w" + fmt_short(width) + ".svg"), series,
            popt);
        std::cout << "wrote " << csv_path.string() << "\n";
    }

    json echo{{"subcommand", "demo-sine"},
              {"widths", opt.widths},
              {"modes", opt.modes},
              {"first_mode", opt.first_mode},
              {"grid", {{"lo", grid.lo}, {"hi", grid.hi}, {"steps", grid.steps}}},
              {"samples", opt.samples},
              {"calibration", opt.calibration},
              {"out_dir", opt.out_dir}};
    write_config_echo(echo, fs::path(opt.out_dir) / "config_echo.json");
}

// -------------------------------------------------------------------- train

struct TrainCliOptions {
    std::string generator = "blobs";
    std::size_t n = 400;
    int classes = 2;
    double spread = 0.3;
    double noise = 0.1;
    double test_frac = 0.3;
    int epochs = 200;
    double lr = 1e-3;
    double dropout_rate = 0.2;
    std::uint64_t seed = 7;
    std::string out_dir = "train_out";
};

void run_train(const TrainCliOptions& opt) {
    ensure_dir(opt.out_dir);
    Dataset full;
    if (opt.generator == "blobs")
        full = make_blobs(opt.n, opt.classes, opt.spread, opt.seed);
    else if (opt.generator == "moons")
        full = make_moons(opt.n, opt.noise, opt.seed);
    else
        throw InvalidParameterError("generator must be blobs or moons");

    auto [train_split, test_split] = split_train_test(full, opt.test_frac, opt.seed);
    ToyModel model = train(train_split, opt.epochs, opt.lr, opt.seed);
    model.dropout_rate = opt.dropout_rate;

    const fs::path dir(opt.out_dir);
    save_dataset(train_split, test_split, dir / "dataset.json");
    save_model(model, dir / "model.json");
    save_predictions(predict_raw(model, train_split.features, train_split.labels),
                     dir / "train_predictions.csv");
    PredictionSet test_preds =
        predict_raw(model, test_split.features, test_split.labels);
    save_predictions(test_preds, dir / "test_predictions.csv");

    std::size_t test_hits = 0;
    for (auto c : test_preds.correct) test_hits += c;
    const double test_acc =
        static_cast<double>(test_hits) / static_cast<double>(test_preds.size());
    std::cout << "train accuracy " << model.train_accuracy << ", test accuracy "
              << test_acc << "\n";

    json echo{{"subcommand", "train"},
              {"generator", opt.generator},
              {"n", opt.n},
              {"classes", opt.classes},
              {"spread", opt.spread},
              {"noise", opt.noise},
              {"test_frac", opt.test_frac},
              {"epochs", opt.epochs},
              {"learning_rate", opt.lr},
              {"dropout_rate", opt.dropout_rate},
              {"seed", opt.seed},
              {"train_accuracy", model.train_accuracy},
              {"test_accuracy", test_acc},
              {"out_dir", opt.out_dir}};
    write_config_echo(echo, dir / "config_echo.json");
}

// ------------------------------------------------------------------ corrupt

struct CorruptOptions {
    std::string dataset_path;
    std::string corruption = "rotation";
    int severity = 0;
    std::string split = "test";
    std::string out_path = "corrupted_dataset.json";
};

void run_corrupt(const CorruptOptions& opt) {
    if (opt.split != "test" && opt.split != "train" && opt.split != "both")
        throw InvalidParameterError("--split must be test, train or both");
    auto [train_split, test_split] = load_dataset(opt.dataset_path);
    const CorruptionSpec spec{corruption_kind_from_string(opt.corruption),
                              opt.severity};
    if (opt.split == "test" || opt.split == "both")
        test_split.features = corrupt(test_split.features, spec);
    if (opt.split == "train" || opt.split == "both")
        train_split.features = corrupt(train_split.features, spec);
    save_dataset(train_split, test_split, opt.out_path);

    json echo{{"subcommand", "corrupt"},
              {"dataset", opt.dataset_path},
              {"corruption", opt.corruption},
              {"severity", opt.severity},
              {"parameter", corruption_parameter(spec.kind, spec.severity)},
              {"split", opt.split},
              {"out", opt.out_path}};
    write_config_echo(echo, fs::path(opt.out_path).string() + ".config.json");
    std::cout << "wrote " << opt.out_path << "\n";
}

// -------------------------------------------------------------------- score

struct SigmaPolicy {
    bool auto_factor = false;
    double fixed_factor = 1.0;
};

SigmaPolicy parse_sigma_policy(const std::string& text) {
    SigmaPolicy p;
    if (text == "auto") {
        p.auto_factor = true;
        return p;
    }
    try {
        p.fixed_factor = std::stod(text);
    } catch (const std::exception&) {
        throw InvalidParameterError("--sigma-factor must be 'auto' or a number");
    }
    if (!(p.fixed_factor > 0.0))
        throw InvalidParameterError("--sigma-factor must be positive");
    return p;
}

// Field + calibration fitted on training predictions; shared by score and
// sweep.
struct FittedField {
    KernelField field;
    Energies energies;
    json echo; // bandwidth details for the config echo
};

FittedField fit_field(const PredictionSet& train_preds, std::size_t downsample_n,
                      const SigmaPolicy& policy,
                      const std::vector<double>& factor_grid, double val_frac,
                      int modes, int first_mode, std::uint64_t seed) {
    const std::size_t target = std::min(downsample_n, train_preds.size());
    PredictionSet inducing = downsample(train_preds, target, seed);

    // Degenerate inducing sets (one row, or all rows identical) have no
    // Silverman width; unit width keeps tiny demos usable.
    double sigma0 = 1.0;
    bool silverman_fallback = true;
    if (inducing.size() >= 2) {
        try {
            sigma0 = silverman(inducing.logits);
            silverman_fallback = false;
        } catch (const DegenerateDataError&) {
        }
    }
    double factor = policy.fixed_factor;
    bool fallback = false;
    std::vector<double> auc_per_factor;
    if (policy.auto_factor && inducing.size() < 2) {
        factor = 1.0;
        fallback = true;
    } else if (policy.auto_factor) {
        BandwidthConfig cfg;
        cfg.silverman_sigma = sigma0;
        cfg.factor_grid = factor_grid;
        cfg.validation_fraction = val_frac;
        cfg.modes = modes;
        cfg.first_mode = first_mode;
        cfg.seed = seed;
        FactorSelection sel = cross_validate_factor(inducing, cfg);
        factor = sel.factor;
        fallback = sel.fallback;
        auc_per_factor = sel.auc_per_factor;
    }

    const double sigma = sigma0 * factor;
    KernelField field(inducing.logits, sigma);
    Energies energies = calibrate_energies(field, inducing.logits, modes, first_mode);

    json echo{{"inducing_points", inducing.size()},
              {"downsample_requested", downsample_n},
              {"silverman_sigma", sigma0},
              {"silverman_fallback", silverman_fallback},
              {"sigma_factor", factor},
              {"sigma_factor_policy", policy.auto_factor ? "auto" : "fixed"},
              {"cv_fallback", fallback},
              {"effective_sigma", sigma},
              {"modes", modes},
              {"first_mode", first_mode}};
    if (!auc_per_factor.empty()) {
        json aucs = json::array();
        for (double a : auc_per_factor)
            std::isnan(a) ? aucs.push_back(nullptr) : aucs.push_back(a);
        echo["cv_auc_per_factor"] = aucs;
        echo["cv_factor_grid"] = factor_grid;
    }
    return {std::move(field), std::move(energies), std::move(echo)};
}

void write_scores_csv(const fs::path& path, const ModeSpectrum& spec) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "base_qipf";
    const int m = spec.energies.mode_count();
    for (int p = 0; p < m; ++p)
        out << ",mode_" << spec.energies.first_mode + p;
    out << ",score\n";
    for (std::size_t i = 0; i < spec.score.size(); ++i) {
        out << fmt17(spec.base_qipf[i]);
        for (int p = 0; p < m; ++p)
            out << "," << fmt17(spec.modes(i, static_cast<std::size_t>(p)));
        out << "," << fmt17(spec.score[i]) << "\n";
    }
    if (!out) throw IoError("write failed for " + path.string());
}

struct ScoreOptions {
    std::string train_preds_path;
    std::string test_preds_path;
    int modes = 4;
    int first_mode = 1;
    std::string sigma_factor = "auto";
    std::vector<double> factor_grid{0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
    double val_frac = 0.2;
    std::size_t downsample_n = 6000;
    std::uint64_t seed = 1;
    std::string out_path = "scores.csv";
};

void run_score(const ScoreOptions& opt) {
    PredictionSet train_preds = load_predictions(opt.train_preds_path);
    PredictionSet test_preds = load_predictions(opt.test_preds_path);
    if (train_preds.classes() != test_preds.classes())
        throw ShapeError("train and test prediction files disagree on class count");

    FittedField fit =
        fit_field(train_preds, opt.downsample_n, parse_sigma_policy(opt.sigma_factor),
                  opt.factor_grid, opt.val_frac, opt.modes, opt.first_mode, opt.seed);
    ModeSpectrum spec = decompose(test_preds.logits, fit.field, fit.energies);
    write_scores_csv(opt.out_path, spec);

    json echo{{"subcommand", "score"},
              {"train_preds", opt.train_preds_path},
              {"test_preds", opt.test_preds_path},
              {"sigma_factor_option", opt.sigma_factor},
              {"val_frac", opt.val_frac},
              {"seed", opt.seed},
              {"rows_scored", test_preds.size()},
              {"bandwidth", fit.echo},
              {"out", opt.out_path}};
    write_config_echo(echo, fs::path(opt.out_path).string() + ".config.json");
    std::cout << "wrote " << opt.out_path << " (" << test_preds.size() << " rows)\n";
}

// ----------------------------------------------------------------- evaluate

std::vector<double> read_score_column(const fs::path& path,
                                      const std::string& column) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string header;
    if (!std::getline(in, header)) throw ParseError(path.string() + ": empty file");

    std::vector<std::string> names;
    std::string cur;
    for (char c : header) {
        if (c == ',') {
            names.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    names.push_back(cur);
    const auto it = std::find(names.begin(), names.end(), column);
    if (it == names.end())
        throw ParseError(path.string() + ": no column named '" + column + "'");
    const std::size_t col = static_cast<std::size_t>(it - names.begin());

    std::vector<double> values;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t field = 0, begin = 0;
        std::string token;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                if (field == col) token = line.substr(begin, i - begin);
                begin = i + 1;
                ++field;
            }
        }
        if (field != names.size())
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(names.size()) + " fields");
        char* end = nullptr;
        const double v = std::strtod(token.c_str(), &end);
        if (end == token.c_str() || *end != '\0')
            throw ParseError("line " + std::to_string(line_no) +
                             ": not a number: '" + token + "'");
        values.push_back(v);
        ++line_no;
    }
    return values;
}

struct EvaluateOptions {
    std::string scores_path;
    std::string preds_path;
    std::string score_column = "score";
    int bins = 20;
    std::string out_path = "report.json";
    std::string curves_prefix;
};

void run_evaluate(const EvaluateOptions& opt) {
    std::vector<double> scores = read_score_column(opt.scores_path, opt.score_column);
    PredictionSet preds = load_predictions(opt.preds_path);
    if (scores.size() != preds.size())
        throw ShapeError("scores and predictions row counts differ");
    std::vector<int> errors = preds.errors();

    EvalReport report = evaluate_scores(scores, errors, opt.bins);
    std::ofstream out(opt.out_path);
    if (!out) throw IoError("cannot write " + opt.out_path);
    out << to_json(report).dump(2) << "\n";

    if (!opt.curves_prefix.empty()) {
        auto dump_curve = [](const Curve& c, const fs::path& p, const char* xname,
                             const char* yname) {
            std::ofstream f(p);
            if (!f) throw IoError("cannot write " + p.string());
            f << xname << "," << yname << "\n";
            for (std::size_t i = 0; i < c.x.size(); ++i)
                f << fmt17(c.x[i]) << "," << fmt17(c.y[i]) << "\n";
        };
        dump_curve(report.roc, opt.curves_prefix + "_roc.csv", "fpr", "tpr");
        dump_curve(report.pr, opt.curves_prefix + "_pr.csv", "recall", "precision");
    }

    json echo{{"subcommand", "evaluate"},
              {"scores", opt.scores_path},
              {"preds", opt.preds_path},
              {"score_column", opt.score_column},
              {"bins", opt.bins},
              {"out", opt.out_path}};
    write_config_echo(echo, fs::path(opt.out_path).string() + ".config.json");
    std::cout << "roc_auc " << report.roc_auc << ", pr_auc " << report.pr_auc
              << ", point_biserial " << report.point_biserial << "\n";
}

// ----------------------------------------------------------------- baseline

struct BaselineOptions {
    std::string method = "mc-dropout";
    std::string model_path;
    std::string dataset_path;
    std::vector<std::string> member_paths; // ensemble members, optional
    int ensemble_size = 10;
    int epochs = 200;
    double lr = 1e-3;
    double rate = 0.2;
    int runs = 100;
    std::uint64_t seed = 1;
    std::string out_path = "baseline_scores.csv";
};

std::vector<ToyModel> ensemble_members(const BaselineOptions& opt,
                                       const Dataset& train_split) {
    std::vector<ToyModel> members;
    if (!opt.member_paths.empty()) {
        for (const auto& p : opt.member_paths) members.push_back(load_model(p));
    } else {
        for (int i = 0; i < opt.ensemble_size; ++i)
            members.push_back(train(train_split, opt.epochs, opt.lr,
                                    derive_seed(opt.seed, 2000 + i)));
    }
    if (members.size() < 2)
        throw InvalidParameterError("ensemble needs >= 2 members");
    return members;
}

void run_baseline(const BaselineOptions& opt) {
    auto [train_split, test_split] = load_dataset(opt.dataset_path);
    std::vector<double> scores(test_split.size());

    json method_echo;
    if (opt.method == "mc-dropout") {
        if (opt.model_path.empty())
            throw InvalidParameterError("mc-dropout needs --model");
        ToyModel model = load_model(opt.model_path);
        for (std::size_t i = 0; i < test_split.size(); ++i)
            scores[i] = mc_dropout_score(model, test_split.features.row(i), opt.rate,
                                         opt.runs, derive_seed(opt.seed, i));
        method_echo = {{"rate", opt.rate}, {"runs", opt.runs}};
    } else if (opt.method == "ensemble") {
        std::vector<ToyModel> members = ensemble_members(opt, train_split);
        for (std::size_t i = 0; i < test_split.size(); ++i)
            scores[i] = ensemble_score(members, test_split.features.row(i));
        method_echo = {{"members", members.size()},
                       {"trained_here", opt.member_paths.empty()}};
    } else {
        throw InvalidParameterError("--method must be mc-dropout or ensemble");
    }

    std::ofstream out(opt.out_path);
    if (!out) throw IoError("cannot write " + opt.out_path);
    out << "score\n";
    for (double s : scores) out << fmt17(s) << "\n";

    json echo{{"subcommand", "baseline"},
              {"method", opt.method},
              {"model", opt.model_path},
              {"dataset", opt.dataset_path},
              {"seed", opt.seed},
              {"details", method_echo},
              {"out", opt.out_path}};
    write_config_echo(echo, fs::path(opt.out_path).string() + ".config.json");
    std::cout << "wrote " << opt.out_path << "\n";
}

// -------------------------------------------------------------------- sweep

struct SweepOptions {
    std::string dataset_path;
    std::string model_path;
    std::string corruption = "rotation";
    std::vector<int> severities{0, 1, 2, 3, 4, 5};
    std::vector<std::string> methods{"qipf", "mc-dropout", "ensemble"};
    int modes = 4;
    int first_mode = 1;
    std::string sigma_factor = "auto";
    std::vector<double> factor_grid{0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
    double val_frac = 0.2;
    std::size_t downsample_n = 6000;
    double rate = 0.2;
    int runs = 100;
    int ensemble_size = 10;
    int epochs = 200;
    double lr = 1e-3;
    int bins = 20;
    std::uint64_t seed = 1;
    std::string out_dir = "sweep_out";
};

struct MetricsRow {
    std::string method;
    int severity = 0;
    double roc = std::numeric_limits<double>::quiet_NaN();
    double pr = std::numeric_limits<double>::quiet_NaN();
    double pb = std::numeric_limits<double>::quiet_NaN();
    double mean_score = 0.0;
};

// Per-(severity, method) report; metrics undefined on a single-class split
// are emitted as nulls instead of aborting the sweep.
json report_json(std::span<const double> scores, std::span<const int> errors,
                 int bins, MetricsRow& row) {
    json j;
    try {
        row.roc = roc_auc(scores, errors);
        j["roc_auc"] = row.roc;
        Curve roc = roc_curve(scores, errors);
        j["roc_points"] = {{"fpr", roc.x}, {"tpr", roc.y}};
    } catch (const UndefinedMetricError&) {
        j["roc_auc"] = nullptr;
    }
    try {
        row.pr = pr_auc(scores, errors);
        j["pr_auc"] = row.pr;
        Curve pr = pr_curve(scores, errors);
        j["pr_points"] = {{"recall", pr.x}, {"precision", pr.y}};
    } catch (const UndefinedMetricError&) {
        j["pr_auc"] = nullptr;
    }
    try {
        row.pb = point_biserial(scores, errors);
        j["point_biserial"] = row.pb;
    } catch (const UndefinedMetricError&) {
        j["point_biserial"] = nullptr;
    }
    ScoreHistogram hist = histogram(scores, errors, bins);
    j["histogram"] = {{"edges", hist.edges},
                      {"correct", hist.correct_counts},
                      {"wrong", hist.wrong_counts}};
    return j;
}

void run_sweep(const SweepOptions& opt) {
    ensure_dir(opt.out_dir);
    const fs::path dir(opt.out_dir);
    auto [train_split, test_split] = load_dataset(opt.dataset_path);
    ToyModel model = load_model(opt.model_path);
    const CorruptionKind kind = corruption_kind_from_string(opt.corruption);

    for (const auto& m : opt.methods)
        if (m != "qipf" && m != "mc-dropout" && m != "ensemble")
            throw InvalidParameterError("unknown method '" + m + "'");
    const bool want_qipf =
        std::count(opt.methods.begin(), opt.methods.end(), "qipf") > 0;
    const bool want_ens =
        std::count(opt.methods.begin(), opt.methods.end(), "ensemble") > 0;

    std::optional<FittedField> fit;
    if (want_qipf) {
        PredictionSet train_preds =
            predict_raw(model, train_split.features, train_split.labels);
        fit = fit_field(train_preds, opt.downsample_n,
                        parse_sigma_policy(opt.sigma_factor), opt.factor_grid,
                        opt.val_frac, opt.modes, opt.first_mode, opt.seed);
    }
    std::vector<ToyModel> members;
    if (want_ens) {
        if (opt.ensemble_size < 2)
            throw InvalidParameterError("ensemble needs >= 2 members");
        for (int i = 0; i < opt.ensemble_size; ++i)
            members.push_back(train(train_split, opt.epochs, opt.lr,
                                    derive_seed(opt.seed, 2000 + i)));
    }

    std::vector<MetricsRow> rows;
    for (int severity : opt.severities) {
        Matrix corrupted = corrupt(test_split.features, {kind, severity});
        PredictionSet test_preds = predict_raw(model, corrupted, test_split.labels);
        std::vector<int> errors = test_preds.errors();

        for (const std::string& method : opt.methods) {
            std::vector<double> scores;
            if (method == "qipf") {
                ModeSpectrum spec =
                    decompose(test_preds.logits, fit->field, fit->energies);
                scores = spec.score;
            } else if (method == "mc-dropout") {
                scores.resize(test_preds.size());
                for (std::size_t i = 0; i < scores.size(); ++i)
                    scores[i] = mc_dropout_score(
                        model, corrupted.row(i), opt.rate, opt.runs,
                        derive_seed(opt.seed,
                                    static_cast<std::uint64_t>(severity) * 1000000 + i));
            } else {
                scores.resize(test_preds.size());
                for (std::size_t i = 0; i < scores.size(); ++i)
                    scores[i] = ensemble_score(members, corrupted.row(i));
            }

            MetricsRow row;
            row.method = method;
            row.severity = severity;
            double sum = 0.0;
            for (double s : scores) sum += s;
            row.mean_score = sum / static_cast<double>(scores.size());

            json rep = report_json(scores, errors, opt.bins, row);
            rep["metadata"] = {{"method", method},
                               {"corruption", opt.corruption},
                               {"severity", severity},
                               {"seed", opt.seed},
                               {"mean_score", row.mean_score}};
            const fs::path rep_path =
                dir / ("report_" + opt.corruption + "_s" + std::to_string(severity) +
                       "_" + method + ".json");
            std::ofstream rf(rep_path);
            if (!rf) throw IoError("cannot write " + rep_path.string());
            rf << rep.dump(2) << "\n";
            rows.push_back(row);

            std::cout << opt.corruption << " s" << severity << " " << method
                      << ": roc_auc=" << row.roc << " pr_auc=" << row.pr
                      << " pb=" << row.pb << " mean_score=" << row.mean_score
                      << "\n";
        }
    }

    // long-format per-severity metrics
    {
        std::ofstream mcsv(dir / "sweep_metrics.csv");
        if (!mcsv) throw IoError("cannot write sweep_metrics.csv");
        mcsv << "method,severity,roc_auc,pr_auc,point_biserial,mean_score\n";
        for (const auto& r : rows)
            mcsv << r.method << "," << r.severity << "," << fmt17(r.roc) << ","
                 << fmt17(r.pr) << "," << fmt17(r.pb) << "," << fmt17(r.mean_score)
                 << "\n";
    }

    // Table-1 style summary: per method, mean and population std of each
    // metric across severities; undefined entries skipped
    {
        std::ofstream tcsv(dir / "table.csv");
        if (!tcsv) throw IoError("cannot write table.csv");
        tcsv << "method,roc_auc_mean,roc_auc_std,pr_auc_mean,pr_auc_std,"
                "point_biserial_mean,point_biserial_std\n";
        for (const std::string& method : opt.methods) {
            auto stats = [&](auto getter) {
                double sum = 0.0, sum_sq = 0.0;
                std::size_t n = 0;
                for (const auto& r : rows) {
                    if (r.method != method) continue;
                    const double v = getter(r);
                    if (std::isnan(v)) continue;
                    sum += v;
                    sum_sq += v * v;
                    ++n;
                }
                if (n == 0)
                    return std::pair{std::numeric_limits<double>::quiet_NaN(),
                                     std::numeric_limits<double>::quiet_NaN()};
                const double mean = sum / static_cast<double>(n);
                return std::pair{
                    mean, std::sqrt(std::max(0.0, sum_sq / static_cast<double>(n) -
                                                      mean * mean))};
            };
            auto [roc_m, roc_s] = stats([](const MetricsRow& r) { return r.roc; });
            auto [pr_m, pr_s] = stats([](const MetricsRow& r) { return r.pr; });
            auto [pb_m, pb_s] = stats([](const MetricsRow& r) { return r.pb; });
            tcsv << method << "," << fmt17(roc_m) << "," << fmt17(roc_s) << ","
                 << fmt17(pr_m) << "," << fmt17(pr_s) << "," << fmt17(pb_m) << ","
                 << fmt17(pb_s) << "\n";
        }
    }

    // metric-vs-severity plots, one line per method
    for (const char* metric : {"roc_auc", "pr_auc", "point_biserial"}) {
        std::vector<plotting::Series> series;
        for (const std::string& method : opt.methods) {
            plotting::Series s;
            s.label = method;
            for (const auto& r : rows) {
                if (r.method != method) continue;
                const double v = std::string(metric) == "roc_auc"  ? r.roc
                                 : std::string(metric) == "pr_auc" ? r.pr
                                                                   : r.pb;
                if (std::isnan(v)) continue;
                s.x.push_back(r.severity);
                s.y.push_back(v);
            }
            if (!s.x.empty()) series.push_back(std::move(s));
        }
        if (series.empty()) continue;
        plotting::PlotOptions popt;
        popt.title = std::string(metric) + " vs " + opt.corruption + " severity";
        popt.x_label = "severity";
        popt.y_label = metric;
        plotting::write_svg(dir / (std::string(metric) + "_vs_severity.svg"), series,
                            popt);
    }

    json echo{{"subcommand", "sweep"},
              {"dataset", opt.dataset_path},
              {"model", opt.model_path},
              {"corruption", opt.corruption},
              {"severities", opt.severities},
              {"methods", opt.methods},
              {"sigma_factor_option", opt.sigma_factor},
              {"val_frac", opt.val_frac},
              {"downsample_n", opt.downsample_n},
              {"mc_dropout", {{"rate", opt.rate}, {"runs", opt.runs}}},
              {"ensemble",
               {{"size", opt.ensemble_size}, {"epochs", opt.epochs}, {"lr", opt.lr}}},
              {"bins", opt.bins},
              {"seed", opt.seed},
              {"out_dir", opt.out_dir}};
    if (fit) echo["bandwidth"] = fit->echo;
    write_config_echo(echo, dir / "config_echo.json");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kernel-space uncertainty scores for classifier logits"};
    app.require_subcommand(1);

    DemoSineOptions demo;
    auto* sub_demo = app.add_subcommand(
        "demo-sine", "Mode decomposition of a sampled sine wave");
    sub_demo->add_option("--widths", demo.widths, "kernel widths")->delimiter(',');
    sub_demo->add_option("--modes", demo.modes, "number of modes");
    sub_demo->add_option("--first-mode", demo.first_mode, "lowest mode order");
    sub_demo->add_option("--grid", demo.grid, "query grid lo:hi:steps");
    sub_demo->add_option("--samples", demo.samples, "sine sample count");
    sub_demo->add_option("--calibration", demo.calibration,
                         "energy calibration set: grid|samples");
    sub_demo->add_option("--out-dir", demo.out_dir, "output directory");
    sub_demo->callback([&] { run_demo_sine(demo); });

    TrainCliOptions tr;
    auto* sub_train =
        app.add_subcommand("train", "Train the toy classifier on synthetic data");
    sub_train->add_option("--generator", tr.generator, "blobs|moons");
    sub_train->add_option("--n", tr.n, "sample count");
    sub_train->add_option("--classes", tr.classes, "class count (blobs)");
    sub_train->add_option("--spread", tr.spread, "blob spread");
    sub_train->add_option("--noise", tr.noise, "moons noise");
    sub_train->add_option("--test-frac", tr.test_frac, "test fraction");
    sub_train->add_option("--epochs", tr.epochs, "training epochs");
    sub_train->add_option("--lr", tr.lr, "learning rate");
    sub_train->add_option("--dropout-rate", tr.dropout_rate,
                          "stored rate for the MC-dropout baseline");
    sub_train->add_option("--seed", tr.seed, "seed");
    sub_train->add_option("--out-dir", tr.out_dir, "output directory");
    sub_train->callback([&] { run_train(tr); });

    CorruptOptions co;
    auto* sub_corrupt =
        app.add_subcommand("corrupt", "Apply a severity-graded corruption");
    sub_corrupt->add_option("--dataset", co.dataset_path, "dataset JSON")->required();
    sub_corrupt->add_option("--corruption", co.corruption,
                            "rotation|shear|zoom|brightness");
    sub_corrupt->add_option("--severity", co.severity, "severity 0..5");
    sub_corrupt->add_option("--split", co.split, "test|train|both");
    sub_corrupt->add_option("--out", co.out_path, "output dataset JSON");
    sub_corrupt->callback([&] { run_corrupt(co); });

    ScoreOptions sc;
    auto* sub_score =
        app.add_subcommand("score", "Kernel uncertainty scores for test logits");
    sub_score->add_option("--train-preds", sc.train_preds_path, "training CSV")
        ->required();
    sub_score->add_option("--test-preds", sc.test_preds_path, "test CSV")->required();
    sub_score->add_option("--modes", sc.modes, "number of modes");
    sub_score->add_option("--first-mode", sc.first_mode, "lowest mode order");
    sub_score->add_option("--sigma-factor", sc.sigma_factor, "auto or a number");
    sub_score->add_option("--factor-grid", sc.factor_grid, "cross-validation grid")
        ->delimiter(',');
    sub_score->add_option("--val-frac", sc.val_frac, "validation fraction");
    sub_score->add_option("--downsample-n", sc.downsample_n,
                          "inducing set cap (default 6000)");
    sub_score->add_option("--seed", sc.seed, "seed");
    sub_score->add_option("--out", sc.out_path, "output CSV");
    sub_score->callback([&] { run_score(sc); });

    EvaluateOptions ev;
    auto* sub_eval =
        app.add_subcommand("evaluate", "Error-detection metrics for a score file");
    sub_eval->add_option("--scores", ev.scores_path, "scores CSV")->required();
    sub_eval->add_option("--preds", ev.preds_path, "predictions CSV")->required();
    sub_eval->add_option("--score-column", ev.score_column, "column to evaluate");
    sub_eval->add_option("--bins", ev.bins, "histogram bins");
    sub_eval->add_option("--out", ev.out_path, "report JSON path");
    sub_eval->add_option("--curves-prefix", ev.curves_prefix,
                         "also write <prefix>_roc.csv and <prefix>_pr.csv");
    sub_eval->callback([&] { run_evaluate(ev); });

    BaselineOptions bl;
    auto* sub_base =
        app.add_subcommand("baseline", "MC-dropout or ensemble uncertainty scores");
    sub_base->add_option("--method", bl.method, "mc-dropout|ensemble");
    sub_base->add_option("--model", bl.model_path, "model JSON (mc-dropout)");
    sub_base->add_option("--dataset", bl.dataset_path, "dataset JSON")->required();
    sub_base->add_option("--models", bl.member_paths, "ensemble member files")
        ->delimiter(',');
    sub_base->add_option("--ensemble-size", bl.ensemble_size,
                         "members to train when --models absent");
    sub_base->add_option("--epochs", bl.epochs, "member training epochs");
    sub_base->add_option("--lr", bl.lr, "member learning rate");
    sub_base->add_option("--rate", bl.rate, "dropout rate");
    sub_base->add_option("--runs", bl.runs, "stochastic forward runs");
    sub_base->add_option("--seed", bl.seed, "seed");
    sub_base->add_option("--out", bl.out_path, "output CSV");
    sub_base->callback([&] { run_baseline(bl); });

    SweepOptions sw;
    auto* sub_sweep =
        app.add_subcommand("sweep", "Severity sweep comparing uncertainty methods");
    sub_sweep->add_option("--dataset", sw.dataset_path, "dataset JSON")->required();
    sub_sweep->add_option("--model", sw.model_path, "model JSON")->required();
    sub_sweep->add_option("--corruption", sw.corruption,
                          "rotation|shear|zoom|brightness");
    sub_sweep->add_option("--severities", sw.severities, "severity list")
        ->delimiter(',');
    sub_sweep->add_option("--methods", sw.methods, "qipf,mc-dropout,ensemble")
        ->delimiter(',');
    sub_sweep->add_option("--modes", sw.modes, "number of modes");
    sub_sweep->add_option("--first-mode", sw.first_mode, "lowest mode order");
    sub_sweep->add_option("--sigma-factor", sw.sigma_factor, "auto or a number");
    sub_sweep->add_option("--factor-grid", sw.factor_grid, "cross-validation grid")
        ->delimiter(',');
    sub_sweep->add_option("--val-frac", sw.val_frac, "validation fraction");
    sub_sweep->add_option("--downsample-n", sw.downsample_n, "inducing set cap");
    sub_sweep->add_option("--rate", sw.rate, "mc-dropout rate");
    sub_sweep->add_option("--runs", sw.runs, "mc-dropout runs");
    sub_sweep->add_option("--ensemble-size", sw.ensemble_size, "ensemble members");
    sub_sweep->add_option("--epochs", sw.epochs, "ensemble training epochs");
    sub_sweep->add_option("--lr", sw.lr, "ensemble learning rate");
    sub_sweep->add_option("--bins", sw.bins, "histogram bins");
    sub_sweep->add_option("--seed", sw.seed, "seed");
    sub_sweep->add_option("--out-dir", sw.out_dir, "output directory");
    sub_sweep->callback([&] { run_sweep(sw); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::cerr << "error: " << e.category() << ": " << e.what() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << std::endl;
        return 2;
    }
    return 0;
}
