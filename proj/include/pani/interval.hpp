#pragma once

#include <algorithm>
#include <vector>

#include "pani/errors.hpp"

namespace pani {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool lo_open = false;
    bool hi_open = false;

    bool contains(double x) const {
        if (x < lo || x > hi) return false;
        if (x == lo && lo_open) return false;
        if (x == hi && hi_open) return false;
        return true;
    }

    bool empty() const { return hi < lo || (hi == lo && (lo_open || hi_open)); }
    double width() const { return empty() ? 0.0 : hi - lo; }
};

// Finite union of pairwise disjoint intervals on the weight axis.
class WeightSet {
public:
    WeightSet() = default;

    static WeightSet interval(double lo, double hi, bool lo_open = false, bool hi_open = false) {
        WeightSet s;
        s.add({lo, hi, lo_open, hi_open});
        return s;
    }

    static WeightSet full(double w_star) { return interval(0.0, w_star); }

    // degenerate interval; used for atom subsets
    static WeightSet point(double x) { return interval(x, x); }

    WeightSet& add(const Interval& iv) {
        if (iv.empty()) return *this;
        for (const auto& p : parts_) {
            bool disjoint = iv.hi < p.lo || p.hi < iv.lo ||
                            (iv.hi == p.lo && (iv.hi_open || p.lo_open)) ||
                            (p.hi == iv.lo && (p.hi_open || iv.lo_open));
            if (!disjoint) throw DomainError("WeightSet: overlapping intervals");
        }
        parts_.push_back(iv);
        std::sort(parts_.begin(), parts_.end(),
                  [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        return *this;
    }

    bool contains(double x) const {
        for (const auto& p : parts_)
            if (p.contains(x)) return true;
        return false;
    }

    bool empty_set() const { return parts_.empty(); }
    const std::vector<Interval>& parts() const { return parts_; }

    double envelope_lo() const { return parts_.empty() ? 0.0 : parts_.front().lo; }
    double envelope_hi() const {
        double h = 0.0;
        for (const auto& p : parts_) h = std::max(h, p.hi);
        return h;
    }

private:
    std::vector<Interval> parts_;
};

}  // namespace pani
