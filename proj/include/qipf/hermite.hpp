#pragma once

namespace qipf {

// Physicists' Hermite polynomial H_p via the recurrence
// H_{p+1}(x) = 2 x H_p(x) - 2 p H_{p-1}(x).
double hermite(int p, double x);

// d/dx H_p(x) = 2 p H_{p-1}(x).
double hermite_derivative(int p, double x);

// d^2/dx^2 H_p(x) = 4 p (p-1) H_{p-2}(x).
double hermite_second_derivative(int p, double x);

// Oscillator normalization constant sqrt(2^p p! sqrt(pi)).
double hermite_norm_constant(int p);

// H*_p(x) = H_p(x) / sqrt(2^p p! sqrt(pi)); orthonormal under the exp(-x^2)
// weight.
double hermite_normalized(int p, double x);

double hermite_normalized_derivative(int p, double x);
double hermite_normalized_second_derivative(int p, double x);

} // namespace qipf
