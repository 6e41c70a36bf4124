#pragma once

// Digamma and trigamma on the positive real axis.
//
// Both shift the argument upward with the unit recurrence until it clears a
// threshold and then sum the Bernoulli-number asymptotic series. Evaluation is
// carried out in long double; the double overloads round once at the end.
// Non-positive or non-finite arguments throw std::domain_error.

namespace austen::specfun {

double digamma(double x);
double trigamma(double x);

long double digamma(long double x);
long double trigamma(long double x);

}  // namespace austen::specfun
