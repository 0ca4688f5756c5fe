#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace oag {

// Natural number extended with infinity. Addition and multiplication
// saturate at infinity; used for dimensions and group indices.
class ExtNat {
public:
    ExtNat() : finite_(true), value_(0) {}
    ExtNat(unsigned long long v) : finite_(true), value_(v) {}

    static ExtNat infinity() {
        ExtNat e;
        e.finite_ = false;
        e.value_ = 0;
        return e;
    }

    bool is_finite() const { return finite_; }
    bool is_infinite() const { return !finite_; }

    unsigned long long value() const {
        if (!finite_) throw std::domain_error("value() on infinite ExtNat");
        return value_;
    }

    friend ExtNat operator+(const ExtNat& a, const ExtNat& b) {
        if (a.finite_ && b.finite_) {
            unsigned long long s = a.value_ + b.value_;
            if (s < a.value_) throw std::overflow_error("ExtNat overflow");
            return ExtNat(s);
        }
        return infinity();
    }
    friend ExtNat operator*(const ExtNat& a, const ExtNat& b) {
        // 0 * inf = 0: a zero exponent/dimension annihilates.
        if ((a.finite_ && a.value_ == 0) || (b.finite_ && b.value_ == 0)) return ExtNat(0);
        if (a.finite_ && b.finite_) {
            unsigned long long p = a.value_ * b.value_;
            if (a.value_ != 0 && p / a.value_ != b.value_)
                throw std::overflow_error("ExtNat overflow");
            return ExtNat(p);
        }
        return infinity();
    }
    ExtNat& operator+=(const ExtNat& o) { return *this = *this + o; }
    ExtNat& operator*=(const ExtNat& o) { return *this = *this * o; }

    friend bool operator==(const ExtNat& a, const ExtNat& b) {
        return a.finite_ == b.finite_ && a.value_ == b.value_;
    }
    friend bool operator!=(const ExtNat& a, const ExtNat& b) { return !(a == b); }
    friend bool operator<(const ExtNat& a, const ExtNat& b) {
        if (!a.finite_) return false;
        if (!b.finite_) return true;
        return a.value_ < b.value_;
    }
    friend bool operator<=(const ExtNat& a, const ExtNat& b) { return !(b < a); }
    friend bool operator>(const ExtNat& a, const ExtNat& b) { return b < a; }
    friend bool operator>=(const ExtNat& a, const ExtNat& b) { return !(a < b); }

    std::string str() const { return finite_ ? std::to_string(value_) : "inf"; }

private:
    bool finite_;
    unsigned long long value_;
};

}  // namespace oag
