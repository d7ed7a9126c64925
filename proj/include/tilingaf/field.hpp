#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "tilingaf/errors.hpp"

namespace tilingaf {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

// Returns true if d is square-free (no repeated prime factor). d must be >= 1.
bool is_square_free(long d);

// An element a + b*sqrt(d) of the rationals (d == 0, b == 0) or of a real
// quadratic field Q(sqrt(d)) with square-free d >= 2.  Elements with b == 0 are
// normalized to d == 0, so purely rational values compare and combine freely
// with values from any quadratic field; combining nonzero surd parts from
// different fields throws FieldMismatch.
class FieldElem {
  public:
    FieldElem() : a_(0), b_(0), d_(0) {}
    FieldElem(long v) : a_(v), b_(0), d_(0) {}          // NOLINT(google-explicit-constructor)
    FieldElem(const Rat& a) : a_(a), b_(0), d_(0) {}    // NOLINT(google-explicit-constructor)
    FieldElem(Rat a, Rat b, long d);
    static FieldElem sqrt_of(long d) { return FieldElem(Rat(0), Rat(1), d); }
    static FieldElem ratio(long num, long den) { return FieldElem(Rat(num, den)); }

    const Rat& a() const { return a_; }
    const Rat& b() const { return b_; }
    long d() const { return d_; }
    bool is_rational() const { return d_ == 0; }
    bool is_zero() const { return a_.is_zero() && b_.is_zero(); }

    // Exact sign: -1, 0, +1.
    int sign() const;

    FieldElem operator-() const { return FieldElem(-a_, -b_, d_); }
    FieldElem& operator+=(const FieldElem& o);
    FieldElem& operator-=(const FieldElem& o);
    FieldElem& operator*=(const FieldElem& o);
    FieldElem& operator/=(const FieldElem& o);

    friend FieldElem operator+(FieldElem l, const FieldElem& r) { return l += r; }
    friend FieldElem operator-(FieldElem l, const FieldElem& r) { return l -= r; }
    friend FieldElem operator*(FieldElem l, const FieldElem& r) { return l *= r; }
    friend FieldElem operator/(FieldElem l, const FieldElem& r) { return l /= r; }

    friend bool operator==(const FieldElem& l, const FieldElem& r) {
        return l.d_ == r.d_ && l.a_ == r.a_ && l.b_ == r.b_;
    }
    friend bool operator!=(const FieldElem& l, const FieldElem& r) { return !(l == r); }
    friend bool operator<(const FieldElem& l, const FieldElem& r) { return (l - r).sign() < 0; }
    friend bool operator>(const FieldElem& l, const FieldElem& r) { return (l - r).sign() > 0; }
    friend bool operator<=(const FieldElem& l, const FieldElem& r) { return (l - r).sign() <= 0; }
    friend bool operator>=(const FieldElem& l, const FieldElem& r) { return (l - r).sign() >= 0; }

    FieldElem abs() const { return sign() < 0 ? -*this : *this; }
    FieldElem inverse() const;
    // Exact integer power (n >= 0).
    FieldElem pow(unsigned n) const;

    double to_double() const;

    // Canonical serialization: "p" / "p/q" for rationals, otherwise
    // "p/q+r/s*sqrt(d)" with zero parts omitted and "-" folded into the surd
    // coefficient.  parse() accepts exactly these shapes (plus optional spaces).
    std::string str() const;
    static FieldElem parse(const std::string& s);

    // Total order usable as a map key (compares (d, a, b) lexicographically;
    // NOT the numeric order when fields differ).
    static bool key_less(const FieldElem& l, const FieldElem& r);

  private:
    Rat a_, b_;
    long d_;
    static long combine_d(const FieldElem& l, const FieldElem& r);
};

}  // namespace tilingaf
