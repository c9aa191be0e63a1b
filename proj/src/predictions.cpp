#include "qipf/predictions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "qipf/errors.hpp"
#include "qipf/rng.hpp"

namespace qipf {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& token, std::size_t line_no) {
    const char* begin = token.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw ParseError("line " + std::to_string(line_no) +
                         ": not a decimal number: '" + token + "'");
    if (!std::isfinite(v))
        throw DataError("line " + std::to_string(line_no) +
                        ": non-finite logit value '" + token + "'");
    return v;
}

int parse_label(const std::string& token, std::size_t line_no) {
    const char* begin = token.c_str();
    char* end = nullptr;
    long v = std::strtol(begin, &end, 10);
    if (end == begin || *end != '\0')
        throw ParseError("line " + std::to_string(line_no) +
                         ": not an integer label: '" + token + "'");
    return static_cast<int>(v);
}

} // namespace

std::vector<int> PredictionSet::errors() const {
    std::vector<int> e(correct.size());
    for (std::size_t i = 0; i < correct.size(); ++i) e[i] = correct[i] ? 0 : 1;
    return e;
}

PredictionSet PredictionSet::from_logits(Matrix logits, std::vector<int> labels) {
    if (logits.rows() != labels.size())
        throw ShapeError("logit rows and label count differ");
    PredictionSet set;
    set.logits = std::move(logits);
    set.labels = std::move(labels);
    set.predicted.resize(set.logits.rows());
    set.correct.resize(set.logits.rows());
    for (std::size_t i = 0; i < set.logits.rows(); ++i) {
        auto row = set.logits.row(i);
        std::size_t best = 0;
        for (std::size_t j = 1; j < row.size(); ++j)
            if (row[j] > row[best]) best = j;
        set.predicted[i] = static_cast<int>(best);
        set.correct[i] = set.predicted[i] == set.labels[i] ? 1 : 0;
    }
    return set;
}

PredictionSet load_predictions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    std::string header;
    if (!std::getline(in, header))
        throw ParseError(path.string() + ": empty file");
    auto names = split_csv_line(header);
    if (names.size() < 2 || names.back() != "label")
        throw ParseError(path.string() + ": header must be y0,...,y{k-1},label");
    const std::size_t k = names.size() - 1;
    for (std::size_t j = 0; j < k; ++j)
        if (names[j] != "y" + std::to_string(j))
            throw ParseError(path.string() + ": unexpected header column '" +
                             names[j] + "'");

    Matrix logits;
    std::vector<int> labels;
    std::vector<double> row(k);
    std::string line;
    std::size_t line_no = 1; // data line numbers are 1-based, header excluded
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != k + 1)
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(k + 1) + " fields, got " +
                             std::to_string(fields.size()));
        for (std::size_t j = 0; j < k; ++j) row[j] = parse_double(fields[j], line_no);
        labels.push_back(parse_label(fields[k], line_no));
        logits.push_row(row);
        ++line_no;
    }
    if (logits.rows() == 0) throw ParseError(path.string() + ": no data rows");
    return PredictionSet::from_logits(std::move(logits), std::move(labels));
}

void save_predictions(const PredictionSet& set, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (std::size_t j = 0; j < set.classes(); ++j) out << "y" << j << ",";
    out << "label\n";
    char buf[40];
    for (std::size_t i = 0; i < set.size(); ++i) {
        auto row = set.logits.row(i);
        for (double v : row) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << buf << ",";
        }
        out << set.labels[i] << "\n";
    }
    if (!out) throw IoError("write failed for " + path.string());
}

PredictionSet downsample(const PredictionSet& set, std::size_t target_n,
                         std::uint64_t seed) {
    const std::size_t n = set.size();
    if (target_n > n)
        throw InvalidParameterError("downsample target " + std::to_string(target_n) +
                                    " exceeds set size " + std::to_string(n));
    // Selection sampling: walk rows once, keep row i with probability
    // (still needed)/(still available). Uniform without replacement and
    // order-preserving by construction.
    Rng rng(seed);
    Matrix logits;
    std::vector<int> labels;
    std::size_t needed = target_n;
    for (std::size_t i = 0; i < n && needed > 0; ++i) {
        std::size_t available = n - i;
        if (rng.uniform() * static_cast<double>(available) <
            static_cast<double>(needed)) {
            logits.push_row(set.logits.row(i));
            labels.push_back(set.labels[i]);
            --needed;
        }
    }
    return PredictionSet::from_logits(std::move(logits), std::move(labels));
}

} // namespace qipf
