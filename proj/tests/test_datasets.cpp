#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qipf/datasets.hpp"
#include "qipf/errors.hpp"
#include "qipf/predictions.hpp"
#include "qipf/rng.hpp"

using namespace qipf;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "qipf_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("make_blobs is deterministic and centered") {
    Dataset a = make_blobs(400, 2, 0.3, 7);
    Dataset b = make_blobs(400, 2, 0.3, 7);
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);

    // class means near the configured circle-of-radius-2 centers
    double mean0[2] = {0.0, 0.0}, mean1[2] = {0.0, 0.0};
    std::size_t n0 = 0, n1 = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto row = a.features.row(i);
        if (a.labels[i] == 0) {
            mean0[0] += row[0];
            mean0[1] += row[1];
            ++n0;
        } else {
            mean1[0] += row[0];
            mean1[1] += row[1];
            ++n1;
        }
    }
    CHECK(std::abs(mean0[0] / n0 - 2.0) < 0.05);
    CHECK(std::abs(mean0[1] / n0 - 0.0) < 0.05);
    CHECK(std::abs(mean1[0] / n1 + 2.0) < 0.05);
    CHECK(std::abs(mean1[1] / n1 - 0.0) < 0.05);
}

TEST_CASE("make_blobs degenerate spread and bad sizes") {
    Dataset tight = make_blobs(40, 4, 0.0, 3);
    for (std::size_t i = 0; i < tight.size(); ++i) {
        auto row = tight.features.row(i);
        auto other = tight.features.row(i % 4); // same-class exemplar
        CHECK(row[0] == other[0]);
        CHECK(row[1] == other[1]);
    }
    CHECK_THROWS_AS(make_blobs(3, 2, 0.1, 1), InvalidParameterError);
    CHECK_THROWS_AS(make_blobs(40, 1, 0.1, 1), InvalidParameterError);
}

TEST_CASE("make_moons shape") {
    Dataset m = make_moons(200, 0.05, 11);
    CHECK(m.size() == 200);
    CHECK(m.classes == 2);
    Dataset m2 = make_moons(200, 0.05, 11);
    CHECK(m.features == m2.features);
}

TEST_CASE("split_train_test is disjoint and exhaustive") {
    Dataset d = make_blobs(100, 2, 0.4, 5);
    auto [train, test] = split_train_test(d, 0.3, 17);
    CHECK(train.size() + test.size() == 100);
    CHECK(test.size() == 30);
}

TEST_CASE("corrupt severity zero is the identity bit for bit") {
    Dataset d = make_blobs(60, 2, 0.5, 9);
    for (auto kind : {CorruptionKind::rotation, CorruptionKind::shear,
                      CorruptionKind::zoom, CorruptionKind::brightness}) {
        Matrix out = corrupt(d.features, {kind, 0});
        CHECK(out == d.features);
    }
}

TEST_CASE("affine transform closed forms") {
    Matrix unit(1, 2);
    unit(0, 0) = 1.0;
    unit(0, 1) = 0.0;
    Matrix rotated = rotate2d(unit, 90.0);
    CHECK(rotated(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(rotated(0, 1) == doctest::Approx(1.0).epsilon(1e-15));

    Matrix ones(1, 2);
    ones(0, 0) = 1.0;
    ones(0, 1) = 1.0;
    Matrix sheared = shear2d(ones, 0.5);
    CHECK(sheared(0, 0) == 1.5);
    CHECK(sheared(0, 1) == 1.0);

    Matrix zoomed = scale_features(ones, 2.0);
    CHECK(zoomed(0, 0) == 2.0);
    Matrix bright = offset_features(ones, 0.25);
    CHECK(bright(0, 1) == 1.25);
}

TEST_CASE("corruption magnitude is non-decreasing in severity") {
    Dataset d = make_blobs(30, 2, 0.4, 21);
    for (auto kind : {CorruptionKind::rotation, CorruptionKind::shear,
                      CorruptionKind::zoom, CorruptionKind::brightness}) {
        double prev_param = -1.0;
        for (int s = 0; s < kCorruptionLevels; ++s) {
            double magnitude;
            const double param = corruption_parameter(kind, s);
            if (kind == CorruptionKind::zoom)
                magnitude = std::abs(param - 1.0);
            else
                magnitude = std::abs(param);
            CHECK(magnitude >= prev_param);
            prev_param = magnitude;
        }
        // and the induced displacement grows too
        double prev_disp = -1.0;
        for (int s = 0; s < kCorruptionLevels; ++s) {
            Matrix out = corrupt(d.features, {kind, s});
            double disp = 0.0;
            for (std::size_t t = 0; t < out.storage().size(); ++t) {
                const double delta = out.storage()[t] - d.features.storage()[t];
                disp += delta * delta;
            }
            CHECK(disp >= prev_disp);
            prev_disp = disp;
        }
    }
}

TEST_CASE("corrupt rejects unknown kinds and bad severities") {
    CHECK_THROWS_AS(corruption_kind_from_string("blur"), InvalidParameterError);
    Dataset d = make_blobs(10, 2, 0.1, 1);
    CHECK_THROWS_AS(corrupt(d.features, {CorruptionKind::rotation, 6}),
                    InvalidParameterError);
    Matrix one_dim(2, 1);
    CHECK_THROWS_AS(corrupt(one_dim, {CorruptionKind::rotation, 1}),
                    InvalidParameterError);
}

TEST_CASE("prediction CSV single row and error cases") {
    auto path = temp_file("tiny.csv");
    {
        std::ofstream out(path);
        out << "y0,y1,label\n0.1,0.9,1\n";
    }
    PredictionSet set = load_predictions(path);
    CHECK(set.size() == 1);
    CHECK(set.predicted[0] == 1);
    CHECK(set.correct[0] == 1);

    {
        std::ofstream out(path);
        out << "y0,y1,label\nnan,0.9,1\n";
    }
    CHECK_THROWS_WITH_AS(load_predictions(path),
                         doctest::Contains("line 1"), DataError);

    {
        std::ofstream out(path);
        out << "y0,y1,label\n0.1,0.9,1\n0.3,oops,0\n";
    }
    CHECK_THROWS_WITH_AS(load_predictions(path),
                         doctest::Contains("line 2"), ParseError);

    {
        std::ofstream out(path);
        out << "a,b,label\n0.1,0.9,1\n";
    }
    CHECK_THROWS_AS(load_predictions(path), ParseError);
}

TEST_CASE("prediction CSV round trip is bit exact") {
    Rng rng(303);
    Matrix logits(1000, 3);
    std::vector<int> labels(1000);
    for (double& v : logits.storage()) v = rng.normal(0.0, 3.0);
    for (auto& l : labels) l = static_cast<int>(rng.below(3));
    PredictionSet original = PredictionSet::from_logits(std::move(logits), labels);

    auto path = temp_file("roundtrip.csv");
    save_predictions(original, path);
    PredictionSet reloaded = load_predictions(path);
    CHECK(reloaded.logits == original.logits);
    CHECK(reloaded.labels == original.labels);
    CHECK(reloaded.correct == original.correct);
}

TEST_CASE("downsample identity, single row and bounds") {
    Rng rng(305);
    Matrix logits(10, 2);
    std::vector<int> labels(10, 0);
    for (double& v : logits.storage()) v = rng.uniform(-1.0, 1.0);
    PredictionSet set = PredictionSet::from_logits(std::move(logits), labels);

    PredictionSet all = downsample(set, 10, 42);
    CHECK(all.logits == set.logits);

    PredictionSet one_a = downsample(set, 1, 42);
    PredictionSet one_b = downsample(set, 1, 42);
    CHECK(one_a.logits == one_b.logits);
    CHECK(one_a.size() == 1);

    CHECK_THROWS_AS(downsample(set, 11, 1), InvalidParameterError);
}

TEST_CASE("downsample keeps row order and samples uniformly") {
    Rng rng(307);
    Matrix logits(10, 1);
    for (std::size_t i = 0; i < 10; ++i) logits(i, 0) = static_cast<double>(i);
    PredictionSet set =
        PredictionSet::from_logits(std::move(logits), std::vector<int>(10, 0));

    std::vector<int> hits(10, 0);
    const int trials = 2000;
    for (int seed = 0; seed < trials; ++seed) {
        PredictionSet sub = downsample(set, 5, static_cast<std::uint64_t>(seed));
        REQUIRE(sub.size() == 5);
        double prev = -1.0;
        for (std::size_t i = 0; i < 5; ++i) {
            const double v = sub.logits(i, 0);
            CHECK(v > prev); // order preserved
            prev = v;
            hits[static_cast<std::size_t>(v)]++;
        }
    }
    for (int h : hits) {
        const double freq = static_cast<double>(h) / trials;
        CHECK(freq > 0.45);
        CHECK(freq < 0.55);
    }
}

TEST_CASE("dataset JSON load rejects out-of-range labels and bad values") {
    Dataset d = make_blobs(20, 2, 0.3, 3);
    auto [train, test] = split_train_test(d, 0.2, 3);
    auto path = temp_file("bad_labels.json");
    train.labels[0] = 5; // outside [0, classes)
    CHECK_THROWS_AS(save_dataset(train, test, path), DataError);
}

TEST_CASE("dataset JSON round trip") {
    Dataset d = make_blobs(50, 2, 0.3, 13);
    auto [train, test] = split_train_test(d, 0.2, 13);
    auto path = temp_file("dataset.json");
    save_dataset(train, test, path);
    auto [train2, test2] = load_dataset(path);
    CHECK(train2.features == train.features);
    CHECK(test2.features == test.features);
    CHECK(train2.labels == train.labels);
    CHECK(train2.classes == 2);
    CHECK(train2.generator == "blobs");
}
