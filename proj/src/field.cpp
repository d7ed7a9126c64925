#include "tilingaf/field.hpp"

#include <cctype>
#include <cstdlib>
#include <cmath>
#include <vector>

namespace tilingaf {

bool is_square_free(long d) {
    if (d < 1) return false;
    for (long p = 2; p * p <= d; ++p) {
        if (d % (p * p) == 0) return false;
    }
    return true;
}

FieldElem::FieldElem(Rat a, Rat b, long d) : a_(std::move(a)), b_(std::move(b)), d_(d) {
    if (b_.is_zero()) {
        d_ = 0;
        return;
    }
    if (d_ == 1) {  // sqrt(1) == 1: fold into the rational part
        a_ += b_;
        b_ = 0;
        d_ = 0;
        return;
    }
    if (d_ < 2 || !is_square_free(d_)) {
        throw ParseError("quadratic field index must be square-free and >= 2, got " +
                         std::to_string(d_));
    }
}

long FieldElem::combine_d(const FieldElem& l, const FieldElem& r) {
    if (l.d_ == 0) return r.d_;
    if (r.d_ == 0 || l.d_ == r.d_) return l.d_;
    throw FieldMismatch("cannot combine sqrt(" + std::to_string(l.d_) + ") with sqrt(" +
                        std::to_string(r.d_) + ")");
}

int FieldElem::sign() const {
    int sa = a_.sign();
    int sb = b_.sign();
    if (sb == 0) return sa;
    if (sa == 0) return sb;
    if (sa == sb) return sa;
    // Opposite signs: compare a^2 with d*b^2.
    Rat lhs = a_ * a_;
    Rat rhs = Rat(d_) * b_ * b_;
    int cmp = lhs.compare(rhs);  // sign of |a|^2 - d|b|^2
    if (cmp == 0) return 0;      // impossible for square-free d>=2, kept for safety
    // |a| dominates -> sign of a; otherwise sign of b.
    return cmp > 0 ? sa : sb;
}

FieldElem& FieldElem::operator+=(const FieldElem& o) {
    if (o.b_.is_zero()) {  // rational addend: surd part untouched
        a_ += o.a_;
        return *this;
    }
    long d = combine_d(*this, o);
    a_ += o.a_;
    b_ += o.b_;
    d_ = b_.is_zero() ? 0 : d;
    return *this;
}

FieldElem& FieldElem::operator-=(const FieldElem& o) {
    if (o.b_.is_zero()) {  // rational subtrahend: surd part untouched
        a_ -= o.a_;
        return *this;
    }
    long d = combine_d(*this, o);
    a_ -= o.a_;
    b_ -= o.b_;
    d_ = b_.is_zero() ? 0 : d;
    return *this;
}

FieldElem& FieldElem::operator*=(const FieldElem& o) {
    if (o.b_.is_zero()) {  // rational multiplier (covers the all-rational case)
        a_ *= o.a_;
        if (!b_.is_zero()) {
            b_ *= o.a_;
            if (b_.is_zero()) d_ = 0;
        }
        return *this;
    }
    if (b_.is_zero()) {  // rational times surd-bearing
        b_ = a_ * o.b_;
        a_ *= o.a_;
        d_ = b_.is_zero() ? 0 : o.d_;
        return *this;
    }
    long d = combine_d(*this, o);
    Rat a = a_ * o.a_ + Rat(d) * b_ * o.b_;
    Rat b = a_ * o.b_ + b_ * o.a_;
    a_ = std::move(a);
    b_ = std::move(b);
    d_ = b_.is_zero() ? 0 : d;
    return *this;
}

FieldElem FieldElem::inverse() const {
    if (is_zero()) throw std::domain_error("division by zero field element");
    if (d_ == 0) return FieldElem(Rat(1) / a_);
    // 1/(a+b sqrt d) = (a - b sqrt d)/(a^2 - d b^2)
    Rat norm = a_ * a_ - Rat(d_) * b_ * b_;
    return FieldElem(a_ / norm, -b_ / norm, d_);
}

FieldElem& FieldElem::operator/=(const FieldElem& o) { return *this *= o.inverse(); }

FieldElem FieldElem::pow(unsigned n) const {
    FieldElem r(1);
    FieldElem base = *this;
    while (n > 0) {
        if (n & 1u) r *= base;
        base *= base;
        n >>= 1u;
    }
    return r;
}

double FieldElem::to_double() const {
    double v = a_.convert_to<double>();
    if (!b_.is_zero()) v += b_.convert_to<double>() * std::sqrt(static_cast<double>(d_));
    return v;
}

namespace {

std::string rat_str(const Rat& r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1) s += "/" + denominator(r).str();
    return s;
}

// Strips all spaces (the canonical form has none; parsing is lenient).
std::string strip_spaces(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) out += c;
    return out;
}

Rat parse_rat(const std::string& s) {
    if (s.empty()) throw ParseError("empty rational");
    std::size_t i = 0;
    bool neg = false;
    if (s[i] == '+' || s[i] == '-') {
        neg = (s[i] == '-');
        ++i;
    }
    std::size_t num_start = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == num_start) throw ParseError("bad rational '" + s + "'");
    Int num(s.substr(num_start, i - num_start));
    Int den(1);
    if (i < s.size()) {
        if (s[i] != '/') throw ParseError("bad rational '" + s + "'");
        ++i;
        std::size_t den_start = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (i == den_start || i != s.size()) throw ParseError("bad rational '" + s + "'");
        den = Int(s.substr(den_start));
        if (den.is_zero()) throw ParseError("zero denominator in '" + s + "'");
    }
    Rat r(num, den);
    return neg ? Rat(-r) : r;
}

// Parses "coef*sqrt(d)" or "sqrt(d)"; returns (coef, d).  `term` has no sign.
bool parse_surd(const std::string& term, Rat* coef, long* d) {
    std::size_t pos = term.find("sqrt(");
    if (pos == std::string::npos) return false;
    if (term.back() != ')') throw ParseError("bad surd '" + term + "'");
    std::string inner = term.substr(pos + 5, term.size() - pos - 6);
    if (inner.empty()) throw ParseError("bad surd '" + term + "'");
    for (char c : inner)
        if (!std::isdigit(static_cast<unsigned char>(c))) throw ParseError("bad surd '" + term + "'");
    *d = std::strtol(inner.c_str(), nullptr, 10);
    if (pos == 0) {
        *coef = 1;
    } else {
        if (term[pos - 1] != '*') throw ParseError("bad surd '" + term + "'");
        *coef = parse_rat(term.substr(0, pos - 1));
    }
    return true;
}

}  // namespace

std::string FieldElem::str() const {
    if (d_ == 0) return rat_str(a_);
    std::string out;
    if (!a_.is_zero()) out += rat_str(a_);
    if (b_.sign() < 0) {
        out += "-";
    } else if (!a_.is_zero()) {
        out += "+";
    }
    out += rat_str(Rat(boost::multiprecision::abs(numerator(b_)), denominator(b_)));
    out += "*sqrt(" + std::to_string(d_) + ")";
    return out;
}

FieldElem FieldElem::parse(const std::string& raw) {
    std::string s = strip_spaces(raw);
    if (s.empty()) throw ParseError("empty field element");
    // Split into at most two signed terms (the leading sign belongs to term 1).
    std::vector<std::string> terms;
    std::vector<int> signs;
    std::size_t i = 0;
    while (i < s.size()) {
        int sign = 1;
        if (s[i] == '+' || s[i] == '-') {
            sign = (s[i] == '-') ? -1 : 1;
            ++i;
        }
        std::size_t start = i;
        while (i < s.size() && s[i] != '+' && s[i] != '-') ++i;
        if (start == i) throw ParseError("bad field element '" + raw + "'");
        terms.push_back(s.substr(start, i - start));
        signs.push_back(sign);
    }
    if (terms.empty() || terms.size() > 2) throw ParseError("bad field element '" + raw + "'");
    Rat a(0), b(0);
    long d = 0;
    bool saw_rat = false, saw_surd = false;
    for (std::size_t t = 0; t < terms.size(); ++t) {
        Rat coef;
        long td = 0;
        if (parse_surd(terms[t], &coef, &td)) {
            if (saw_surd) throw ParseError("two surd terms in '" + raw + "'");
            saw_surd = true;
            b = signs[t] < 0 ? Rat(-coef) : coef;
            d = td;
        } else {
            if (saw_rat) throw ParseError("two rational terms in '" + raw + "'");
            saw_rat = true;
            Rat r = parse_rat(terms[t]);
            a = signs[t] < 0 ? Rat(-r) : r;
        }
    }
    if (b.is_zero()) return FieldElem(a);
    return FieldElem(a, b, d);
}

bool FieldElem::key_less(const FieldElem& l, const FieldElem& r) {
    if (l.d_ != r.d_) return l.d_ < r.d_;
    int c = l.a_.compare(r.a_);
    if (c != 0) return c < 0;
    return l.b_.compare(r.b_) < 0;
}

}  // namespace tilingaf
