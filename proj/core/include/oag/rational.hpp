#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace oag {

// Thrown when a computation leaves the supported numeric range.
struct overflow_error : std::runtime_error {
    explicit overflow_error(const std::string& what) : std::runtime_error(what) {}
};

// Exact rational with 64-bit numerator/denominator, always normalized
// (den > 0, gcd(num, den) == 1). Intermediate products go through 128-bit
// arithmetic and are range-checked; this library works at "desk scale"
// and refuses rather than silently truncates.
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(long long n) : num_(n), den_(1) {}
    Rational(long long n, long long d) : num_(n), den_(d) { normalize(); }

    long long num() const { return num_; }
    long long den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_integer() const { return den_ == 1; }
    int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return make(i128(a.num_) * b.den_ + i128(b.num_) * a.den_,
                    i128(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return make(i128(a.num_) * b.den_ - i128(b.num_) * a.den_,
                    i128(a.den_) * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return make(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("rational division by zero");
        return make(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
    }
    Rational operator-() const {
        Rational r;
        r.num_ = -num_;
        r.den_ = den_;
        return r;
    }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
    }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

    // Largest integer <= *this.
    long long floor() const {
        long long q = num_ / den_;
        if (num_ % den_ != 0 && num_ < 0) --q;
        return q;
    }

    std::string str() const {
        std::string s = std::to_string(num_);
        if (den_ != 1) s += "/" + std::to_string(den_);
        return s;
    }

private:
    using i128 = __int128;

    static Rational make(i128 n, i128 d) {
        Rational r;
        if (d == 0) throw std::domain_error("rational with zero denominator");
        if (d < 0) { n = -n; d = -d; }
        i128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
            throw overflow_error("rational out of 64-bit range");
        r.num_ = (long long)n;
        r.den_ = (long long)d;
        return r;
    }

    static i128 gcd128(i128 a, i128 b) {
        while (b != 0) { i128 t = a % b; a = b; b = t; }
        return a == 0 ? 1 : a;
    }

    void normalize() { *this = make(num_, den_); }

    long long num_;
    long long den_;
};

}  // namespace oag
