#ifndef NICSIM_SIM_TIME_HPP
#define NICSIM_SIM_TIME_HPP

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace nicsim {

// Virtual time in integer nanoseconds. Values are formatted as microseconds
// with two decimals only at reporting boundaries.
class SimTime {
public:
    constexpr SimTime() : ns_(0) {}

    static SimTime ns(std::int64_t v) {
        if (v < 0) throw std::invalid_argument("SimTime: negative duration");
        return SimTime(v);
    }

    static SimTime us(double v) {
        if (v < 0.0 || !std::isfinite(v))
            throw std::invalid_argument("SimTime: bad microsecond value");
        return SimTime(static_cast<std::int64_t>(std::llround(v * 1000.0)));
    }

    std::int64_t as_ns() const { return ns_; }
    double as_us() const { return static_cast<double>(ns_) / 1000.0; }

    SimTime operator+(SimTime o) const {
        std::int64_t r;
        if (__builtin_add_overflow(ns_, o.ns_, &r))
            throw std::overflow_error("SimTime: addition overflow");
        return SimTime(r);
    }
    SimTime operator-(SimTime o) const {
        if (o.ns_ > ns_) throw std::underflow_error("SimTime: negative result");
        return SimTime(ns_ - o.ns_);
    }
    SimTime operator*(std::int64_t k) const {
        std::int64_t r;
        if (k < 0) throw std::invalid_argument("SimTime: negative scale");
        if (__builtin_mul_overflow(ns_, k, &r))
            throw std::overflow_error("SimTime: multiplication overflow");
        return SimTime(r);
    }
    SimTime& operator+=(SimTime o) { return *this = *this + o; }

    auto operator<=>(const SimTime&) const = default;

private:
    constexpr explicit SimTime(std::int64_t v) : ns_(v) {}
    std::int64_t ns_;
};

// Half-up rounding to two decimals, the format used in all reports.
inline std::string format_us(double us) {
    double r = std::floor(us * 100.0 + 0.5) / 100.0;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", r);
    return buf;
}

} // namespace nicsim

#endif
