#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <vector>

#include "hiernav/errors.hpp"

namespace hiernav {

inline double wrap_angle(double a) {
    a = std::fmod(a + M_PI, 2.0 * M_PI);
    if (a <= 0.0) a += 2.0 * M_PI;
    return a - M_PI;  // result in (-pi, pi]
}

// Index map splitting a flat observation into proprioceptive inputs (s^l),
// external state (s^m) and the dimensions of interest (s^h).
struct ObservationPartition {
    std::vector<int> proprio_idx;
    std::vector<int> external_idx;
    std::vector<int> interest_idx;

    void validate(int obs_dim) const {
        std::vector<int> seen(obs_dim, 0);
        for (int i : proprio_idx) {
            if (i < 0 || i >= obs_dim) throw ShapeError("partition: proprio index out of range");
            ++seen[i];
        }
        for (int i : external_idx) {
            if (i < 0 || i >= obs_dim) throw ShapeError("partition: external index out of range");
            ++seen[i];
        }
        for (int i : seen)
            if (i != 1) throw ShapeError("partition: proprio/external must disjointly cover the observation");
        for (int i : interest_idx) {
            if (std::find(external_idx.begin(), external_idx.end(), i) == external_idx.end())
                throw ShapeError("partition: interest indices must be a subset of external indices");
        }
    }
};

inline Eigen::VectorXd project(const Eigen::VectorXd& obs, const std::vector<int>& idx) {
    Eigen::VectorXd out(static_cast<int>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] < 0 || idx[k] >= obs.size()) throw ShapeError("project: index out of range");
        out(static_cast<int>(k)) = obs(idx[k]);
    }
    return out;
}

// Geometry of the mid-level state s^m: which of its components the planner
// cares about, which are angles, and how dynamics networks should see it.
// Positions are dropped from the network input (free-space behavior dynamics
// are translation invariant) and angles are fed as cos/sin.
struct MidLevelSpace {
    int dim = 0;
    std::vector<int> interest_dims;  // indices within s^m, the s^h components
    std::vector<int> angular_dims;   // indices to wrap into (-pi, pi]
    std::vector<int> raw_feature_dims;     // fed to dynamics nets unchanged
    std::vector<int> sincos_feature_dims;  // fed as (cos, sin) pairs

    int feature_dim() const {
        return static_cast<int>(raw_feature_dims.size() + 2 * sincos_feature_dims.size());
    }

    Eigen::VectorXd features(const Eigen::VectorXd& s_m) const {
        if (s_m.size() != dim) throw ShapeError("mid-level features: dimension mismatch");
        Eigen::VectorXd f(feature_dim());
        int k = 0;
        for (int i : raw_feature_dims) f(k++) = s_m(i);
        for (int i : sincos_feature_dims) {
            f(k++) = std::cos(s_m(i));
            f(k++) = std::sin(s_m(i));
        }
        return f;
    }

    Eigen::VectorXd wrap(Eigen::VectorXd s_m) const {
        for (int i : angular_dims) s_m(i) = wrap_angle(s_m(i));
        return s_m;
    }

    Eigen::VectorXd interest(const Eigen::VectorXd& s_m) const {
        Eigen::VectorXd out(static_cast<int>(interest_dims.size()));
        for (std::size_t k = 0; k < interest_dims.size(); ++k)
            out(static_cast<int>(k)) = s_m(interest_dims[k]);
        return out;
    }

    // Delta between two mid-level states with angular components wrapped, so a
    // heading crossing +-pi never produces a 2*pi outlier.
    Eigen::VectorXd delta(const Eigen::VectorXd& from, const Eigen::VectorXd& to) const {
        Eigen::VectorXd d = to - from;
        for (int i : angular_dims) d(i) = wrap_angle(d(i));
        return d;
    }
};

}  // namespace hiernav
