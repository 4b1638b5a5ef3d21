#include "mmdf/rational.hpp"

#include "mmdf/errors.hpp"

#include <charconv>

namespace mmdf {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) {
        --q;
    }
    return q;
}

std::int64_t positive_mod(std::int64_t a, std::int64_t b) {
    return a - floor_div(a, b) * b;
}

std::int64_t floor(const Rational& r) {
    return floor_div(r.numerator(), r.denominator());
}

std::int64_t ceil(const Rational& r) {
    return -floor_div(-r.numerator(), r.denominator());
}

std::string to_string(const Rational& r) {
    if (r.denominator() == 1) {
        return std::to_string(r.numerator());
    }
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

namespace {
std::int64_t parse_int(std::string_view s, const std::string& whole) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        throw ParseError("invalid rational '" + whole + "'");
    }
    return v;
}
} // namespace

Rational parse_rational(const std::string& text) {
    auto slash = text.find('/');
    std::string_view view(text);
    if (slash == std::string::npos) {
        return Rational(parse_int(view, text));
    }
    std::int64_t num = parse_int(view.substr(0, slash), text);
    std::int64_t den = parse_int(view.substr(slash + 1), text);
    if (den == 0) {
        throw ParseError("zero denominator in '" + text + "'");
    }
    return Rational(num, den);
}

double to_double(const Rational& r) {
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

} // namespace mmdf
