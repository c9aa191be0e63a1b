#include "qipf/hermite.hpp"

#include <cmath>
#include <numbers>

#include "qipf/errors.hpp"

namespace qipf {

namespace {

void check_order(int p) {
    if (p < 0) throw InvalidParameterError("Hermite order must be non-negative");
}

} // namespace

double hermite(int p, double x) {
    check_order(p);
    if (p == 0) return 1.0;
    double prev = 1.0;       // H_0
    double cur = 2.0 * x;    // H_1
    for (int k = 1; k < p; ++k) {
        double next = 2.0 * x * cur - 2.0 * k * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double hermite_derivative(int p, double x) {
    check_order(p);
    if (p == 0) return 0.0;
    return 2.0 * p * hermite(p - 1, x);
}

double hermite_second_derivative(int p, double x) {
    check_order(p);
    if (p < 2) return 0.0;
    return 4.0 * p * (p - 1) * hermite(p - 2, x);
}

double hermite_norm_constant(int p) {
    check_order(p);
    double factorial = 1.0;
    for (int k = 2; k <= p; ++k) factorial *= k;
    return std::sqrt(std::exp2(p) * factorial * std::sqrt(std::numbers::pi));
}

double hermite_normalized(int p, double x) {
    return hermite(p, x) / hermite_norm_constant(p);
}

double hermite_normalized_derivative(int p, double x) {
    return hermite_derivative(p, x) / hermite_norm_constant(p);
}

double hermite_normalized_second_derivative(int p, double x) {
    return hermite_second_derivative(p, x) / hermite_norm_constant(p);
}

} // namespace qipf
