#ifndef CACHEMISS_EXTFLOAT_HPP
#define CACHEMISS_EXTFLOAT_HPP

#include <cmath>
#include <cstdint>
#include <limits>

namespace cachemiss {

/* Double-precision value with a wide explicit binary exponent:
 * value = mantissa * 2^exponent, mantissa in [0.5, 1) up to sign.
 * Same relative rounding as double arithmetic, but immune to the
 * under/overflow that plain doubles hit once coefficient sequences
 * decay past ~1e-308. */
class ExtFloat {
public:
    ExtFloat() = default;
    ExtFloat(double v) { *this = from_double(v); }

    static ExtFloat from_double(double v)
    {
        ExtFloat r;
        if (v == 0.0) {
            r.m_ = 0.0;
            r.e_ = 0;
            return r;
        }
        int e;
        r.m_ = std::frexp(v, &e);
        r.e_ = e;
        return r;
    }

    /* value = mantissa * 2^e with any finite mantissa; renormalized. */
    static ExtFloat from_parts(double mantissa, std::int64_t e)
    {
        ExtFloat r = from_double(mantissa);
        if (!r.zero())
            r.e_ += e;
        return r;
    }

    bool zero() const { return m_ == 0.0; }
    double mantissa() const { return m_; }
    std::int64_t exponent() const { return e_; }

    /* May overflow to +-inf or underflow to 0; callers wanting the
     * magnitude of extreme values should use log_value(). */
    double to_double() const
    {
        if (m_ == 0.0)
            return 0.0;
        if (e_ > 1024)
            return m_ > 0 ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
        if (e_ < -1073)
            return 0.0;
        return std::ldexp(m_, static_cast<int>(e_));
    }

    /* Natural log of |value|; -inf for zero. */
    double log_value() const
    {
        if (m_ == 0.0)
            return -std::numeric_limits<double>::infinity();
        return std::log(std::abs(m_)) + double(e_) * kLn2;
    }

    double log2_value() const
    {
        if (m_ == 0.0)
            return -std::numeric_limits<double>::infinity();
        return std::log2(std::abs(m_)) + double(e_);
    }

    int sign() const { return m_ > 0 ? 1 : (m_ < 0 ? -1 : 0); }

    friend ExtFloat operator*(ExtFloat a, ExtFloat b)
    {
        if (a.zero() || b.zero())
            return ExtFloat{};
        ExtFloat r;
        int e;
        r.m_ = std::frexp(a.m_ * b.m_, &e);
        r.e_ = a.e_ + b.e_ + e;
        return r;
    }

    friend ExtFloat operator+(ExtFloat a, ExtFloat b)
    {
        if (a.zero())
            return b;
        if (b.zero())
            return a;
        if (a.e_ < b.e_)
            std::swap(a, b);
        std::int64_t d = a.e_ - b.e_;
        if (d > 1100)
            return a; // b is below one ulp of a
        int e;
        ExtFloat r;
        r.m_ = std::frexp(a.m_ + std::ldexp(b.m_, -static_cast<int>(d)), &e);
        if (r.m_ == 0.0) {
            r.e_ = 0;
            return r;
        }
        r.e_ = a.e_ + e;
        return r;
    }

    friend ExtFloat operator-(ExtFloat a, ExtFloat b) { return a + b.negated(); }

    ExtFloat negated() const
    {
        ExtFloat r = *this;
        r.m_ = -r.m_;
        return r;
    }

    ExtFloat& operator+=(ExtFloat o) { return *this = *this + o; }
    ExtFloat& operator*=(ExtFloat o) { return *this = *this * o; }

    /* this / other as a plain double (ratios of neighbouring coefficients
     * are always representable). */
    double ratio_to(ExtFloat denom) const
    {
        if (zero())
            return 0.0;
        return std::ldexp(m_ / denom.m_, static_cast<int>(e_ - denom.e_));
    }

    /* Compare magnitudes. */
    bool abs_less(ExtFloat o) const
    {
        if (zero())
            return !o.zero();
        if (o.zero())
            return false;
        if (e_ != o.e_)
            return e_ < o.e_;
        return std::abs(m_) < std::abs(o.m_);
    }

private:
    static constexpr double kLn2 = 0.6931471805599453094172321214581766;
    double m_ = 0.0;
    std::int64_t e_ = 0;
};

} // namespace cachemiss

#endif
