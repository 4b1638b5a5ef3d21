#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <string>

namespace mmdf {

/// Exact rational used for throughputs, intervals and delays.
using Rational = boost::rational<std::int64_t>;

/// Integral time in time-units (WCETs, migration costs, schedule instants).
using Time = std::int64_t;

std::int64_t floor_div(std::int64_t a, std::int64_t b);
std::int64_t positive_mod(std::int64_t a, std::int64_t b);

std::int64_t floor(const Rational& r);
std::int64_t ceil(const Rational& r);

/// "p/q", or "p" when the denominator is one.
std::string to_string(const Rational& r);

/// Accepts "p", "p/q" or "-p/q".
Rational parse_rational(const std::string& text);

double to_double(const Rational& r);

} // namespace mmdf
