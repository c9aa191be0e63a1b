#include "qipf/datasets.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "qipf/errors.hpp"
#include "qipf/rng.hpp"

namespace qipf {

Dataset make_blobs(std::size_t n, int k, double spread, std::uint64_t seed) {
    if (k < 2) throw InvalidParameterError("blobs need at least 2 classes");
    if (n < 2 * static_cast<std::size_t>(k))
        throw InvalidParameterError("blobs need n >= 2k");
    if (spread < 0.0) throw InvalidParameterError("spread must be >= 0");

    constexpr double kRadius = 2.0;
    Dataset data;
    data.classes = k;
    data.seed = seed;
    data.generator = "blobs";
    data.features = Matrix(n, 2);
    data.labels.resize(n);

    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        int label = static_cast<int>(i % static_cast<std::size_t>(k));
        double angle = 2.0 * std::numbers::pi * label / k;
        data.features(i, 0) = kRadius * std::cos(angle) + spread * rng.normal();
        data.features(i, 1) = kRadius * std::sin(angle) + spread * rng.normal();
        data.labels[i] = label;
    }
    return data;
}

Dataset make_moons(std::size_t n, double noise, std::uint64_t seed) {
    if (n < 4) throw InvalidParameterError("moons need n >= 4");
    if (noise < 0.0) throw InvalidParameterError("noise must be >= 0");

    Dataset data;
    data.classes = 2;
    data.seed = seed;
    data.generator = "moons";
    data.features = Matrix(n, 2);
    data.labels.resize(n);

    Rng rng(seed);
    const std::size_t n_outer = n / 2;
    for (std::size_t i = 0; i < n; ++i) {
        bool outer = i < n_outer;
        std::size_t idx = outer ? i : i - n_outer;
        std::size_t count = outer ? n_outer : n - n_outer;
        double t = std::numbers::pi * idx / (count > 1 ? count - 1 : 1);
        double x = outer ? std::cos(t) : 1.0 - std::cos(t);
        double y = outer ? std::sin(t) : 0.5 - std::sin(t);
        data.features(i, 0) = x + noise * rng.normal();
        data.features(i, 1) = y + noise * rng.normal();
        data.labels[i] = outer ? 0 : 1;
    }
    return data;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& data,
                                             double test_fraction,
                                             std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw InvalidParameterError("test fraction must be in (0, 1)");
    const std::size_t n = data.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    std::size_t n_test = static_cast<std::size_t>(std::round(test_fraction * n));
    if (n_test == 0) n_test = 1;
    if (n_test >= n) n_test = n - 1;

    std::vector<std::uint8_t> is_test(n, 0);
    for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = 1;

    Dataset train, test;
    for (Dataset* part : {&train, &test}) {
        part->classes = data.classes;
        part->seed = data.seed;
        part->generator = data.generator;
    }
    for (std::size_t i = 0; i < n; ++i) {
        Dataset& part = is_test[i] ? test : train;
        part.features.push_row(data.features.row(i));
        part.labels.push_back(data.labels[i]);
    }
    return {std::move(train), std::move(test)};
}

CorruptionKind corruption_kind_from_string(const std::string& name) {
    if (name == "rotation") return CorruptionKind::rotation;
    if (name == "shear") return CorruptionKind::shear;
    if (name == "zoom") return CorruptionKind::zoom;
    if (name == "brightness") return CorruptionKind::brightness;
    throw InvalidParameterError("unknown corruption kind '" + name + "'");
}

std::string to_string(CorruptionKind kind) {
    switch (kind) {
        case CorruptionKind::rotation: return "rotation";
        case CorruptionKind::shear: return "shear";
        case CorruptionKind::zoom: return "zoom";
        case CorruptionKind::brightness: return "brightness";
    }
    throw InvalidParameterError("unknown corruption kind");
}

double corruption_parameter(CorruptionKind kind, int severity) {
    if (severity < 0 || severity >= kCorruptionLevels)
        throw InvalidParameterError("severity must be in 0.." +
                                    std::to_string(kCorruptionLevels - 1));
    static constexpr double kRotationDeg[] = {0.0, 15.0, 30.0, 45.0, 60.0, 75.0};
    static constexpr double kShear[] = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    static constexpr double kZoom[] = {1.0, 1.2, 1.4, 1.6, 1.8, 2.0};
    static constexpr double kBrightness[] = {0.0, 0.25, 0.5, 0.75, 1.0, 1.25};
    switch (kind) {
        case CorruptionKind::rotation: return kRotationDeg[severity];
        case CorruptionKind::shear: return kShear[severity];
        case CorruptionKind::zoom: return kZoom[severity];
        case CorruptionKind::brightness: return kBrightness[severity];
    }
    throw InvalidParameterError("unknown corruption kind");
}

Matrix rotate2d(const Matrix& features, double degrees) {
    if (features.cols() < 2)
        throw InvalidParameterError("rotation needs at least 2 feature dimensions");
    if (degrees == 0.0) return features;
    const double rad = degrees * std::numbers::pi / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    Matrix out = features;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        double x = features(i, 0), y = features(i, 1);
        out(i, 0) = c * x - s * y;
        out(i, 1) = s * x + c * y;
    }
    return out;
}

Matrix shear2d(const Matrix& features, double coefficient) {
    if (features.cols() < 2)
        throw InvalidParameterError("shear needs at least 2 feature dimensions");
    if (coefficient == 0.0) return features;
    Matrix out = features;
    for (std::size_t i = 0; i < out.rows(); ++i)
        out(i, 0) = features(i, 0) + coefficient * features(i, 1);
    return out;
}

Matrix scale_features(const Matrix& features, double factor) {
    if (factor == 1.0) return features;
    Matrix out = features;
    for (double& v : out.storage()) v *= factor;
    return out;
}

Matrix offset_features(const Matrix& features, double offset) {
    if (offset == 0.0) return features;
    Matrix out = features;
    for (double& v : out.storage()) v += offset;
    return out;
}

Matrix corrupt(const Matrix& features, const CorruptionSpec& spec) {
    const double param = corruption_parameter(spec.kind, spec.severity);
    switch (spec.kind) {
        case CorruptionKind::rotation: return rotate2d(features, param);
        case CorruptionKind::shear: return shear2d(features, param);
        case CorruptionKind::zoom: return scale_features(features, param);
        case CorruptionKind::brightness: return offset_features(features, param);
    }
    throw InvalidParameterError("unknown corruption kind");
}

namespace {

void validate_split(const Dataset& part) {
    if (part.features.rows() != part.labels.size())
        throw DataError("dataset features and labels differ in length");
    for (int label : part.labels)
        if (label < 0 || label >= part.classes)
            throw DataError("label " + std::to_string(label) + " outside [0, " +
                            std::to_string(part.classes) + ")");
    for (double v : part.features.storage())
        if (!std::isfinite(v)) throw DataError("non-finite feature value");
}

nlohmann::json split_to_json(const Dataset& part) {
    validate_split(part);
    nlohmann::json j;
    j["labels"] = part.labels;
    auto& rows = j["features"] = nlohmann::json::array();
    for (std::size_t i = 0; i < part.size(); ++i) {
        auto row = part.features.row(i);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return j;
}

Dataset split_from_json(const nlohmann::json& j, const nlohmann::json& meta) {
    Dataset part;
    part.classes = meta.at("classes").get<int>();
    part.seed = meta.at("seed").get<std::uint64_t>();
    part.generator = meta.at("generator").get<std::string>();
    part.labels = j.at("labels").get<std::vector<int>>();
    for (const auto& row : j.at("features"))
        part.features.push_row(row.get<std::vector<double>>());
    validate_split(part);
    return part;
}

} // namespace

void save_dataset(const Dataset& train, const Dataset& test,
                  const std::filesystem::path& path) {
    nlohmann::json j;
    j["format"] = "qipf-dataset";
    j["version"] = 1;
    j["classes"] = train.classes;
    j["seed"] = train.seed;
    j["generator"] = train.generator;
    j["train"] = split_to_json(train);
    j["test"] = split_to_json(test);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed for " + path.string());
}

std::pair<Dataset, Dataset> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    try {
        if (j.at("format") != "qipf-dataset")
            throw ParseError(path.string() + ": not a qipf-dataset file");
        return {split_from_json(j.at("train"), j), split_from_json(j.at("test"), j)};
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

} // namespace qipf
