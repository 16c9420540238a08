#pragma once

// Tick-data model and empirical time-transform estimation.
//
// Observation times of asset k are 0 = t_0 < ... < t_{n_k} = 1; n_k counts
// intervals, not points. The time transform f_k is the piecewise-linear
// interpolant through (t_i, i/n_k); its derivative estimate is a windowed
// divided difference (window of ceil(sqrt(n_k)) intervals, shifted inside
// the domain at the edges) rescaled so that int_0^1 f'_k = 1 exactly.
// Pair objects (joint grid, f_{kl}, m_{kl}) use the common observation
// times of the two assets; n_{kl} counts joint points with t > 0.

#include <cstddef>
#include <string>
#include <vector>

#include "covest/matrix.hpp"

namespace covest {

struct TickSeries {
    std::string asset;
    std::vector<double> times;
    std::vector<double> values;

    std::size_t points() const { return times.size(); }
    std::size_t n() const { return times.empty() ? 0 : times.size() - 1; }
};

struct Panel {
    std::vector<TickSeries> series;
    std::size_t n_total = 0;                // sum of interval counts
    std::vector<std::string> warnings;      // boundary-conformity notes

    std::size_t d() const { return series.size(); }
};

// Validates and assembles a panel. Hard errors (ValidationError) for empty
// or single-point series, non-finite entries, times outside [0,1] and
// non-increasing times; series not starting at 0 or ending at 1 only earn a
// warning since several sampling schemes legitimately stay clear of the
// boundary.
Panel build_panel(std::vector<TickSeries> series);

struct JointGrid {
    std::vector<double> times;       // common observation times, ascending
    std::vector<std::size_t> idx_k;  // position of times[p] in grid k
    std::vector<std::size_t> idx_l;  // position of times[p] in grid l
    std::size_t n_kl = 0;            // # common times with t > 0
};

class TimeTransform {
public:
    std::size_t d() const { return assets_.size(); }
    std::size_t n_total() const { return n_total_; }

    double m(std::size_t k) const;                    // n_k / n
    double f(std::size_t k, double x) const;          // interpolant (linear ends)
    double fprime(std::size_t k, double x) const;     // smoothed slope, unit mass

    const JointGrid& joint(std::size_t k, std::size_t l) const;
    double m_pair(std::size_t k, std::size_t l) const;          // n_{kl} / n
    double fprime_pair(std::size_t k, std::size_t l, double x) const;

    // h_{kl}(x) = m_k f'_k(x) / (m_l f'_l(x))
    double h(std::size_t k, std::size_t l, double x) const;

    // smallest M with all f'_k values in [1/M, M]
    double comparability_bound() const;

private:
    friend TimeTransform empirical_time_transform(const Panel& panel, double joint_tolerance);

    struct AssetMap {
        std::vector<double> times;
        std::vector<double> slopes; // smoothed, per interval, unit total mass
        double m = 0.0;
    };
    struct PairMap {
        JointGrid grid;
        std::vector<double> slopes; // per joint interval; empty if < 2 joint points
        double m = 0.0;
    };

    void check_asset(std::size_t k) const;

    std::vector<AssetMap> assets_;
    std::vector<PairMap> pairs_; // ordered pairs, index k * d + l
    std::size_t n_total_ = 0;
};

// Builds the empirical time transform. Times of different assets closer
// than joint_tolerance are treated as one common point; a tolerance that
// collapses consecutive joint points into a zero-length interval is an
// error.
TimeTransform empirical_time_transform(const Panel& panel, double joint_tolerance = 0.0);

struct JointPoint {
    std::size_t p;
    double t;
    std::size_t i_kl; // index in grid k
    std::size_t i_lk; // index in grid l
};
std::vector<JointPoint> joint_points(const TimeTransform& tt, std::size_t k, std::size_t l);

struct GridDiagnostics {
    double comparability = 0.0; // bound M on the slope range
    Matrix interleaving;        // per pair: max # of l-points in one k-interval
    Matrix m_pair;              // joint-point fractions
};
GridDiagnostics grid_diagnostics(const Panel& panel, const TimeTransform& tt);

} // namespace covest
