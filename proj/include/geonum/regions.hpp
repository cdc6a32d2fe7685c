#pragma once

// Counting regions A in R^n: indicator, bounding radius and Lebesgue volume.
// Balls are parameterised by their volume t (B_t); composite regions carry a
// Monte Carlo volume with an error bar.

#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "geonum/error.hpp"
#include "geonum/linalg.hpp"
#include "geonum/random.hpp"

namespace geonum {

/// Relative slack applied to every closed-boundary comparison.
inline constexpr double kBoundarySlack = 1e-12;

/// Gamma(n/2 + 1) by the recurrence Gamma(x + 1) = x Gamma(x) from Gamma(1) = 1 or Gamma(1/2) = sqrt(pi).
inline double gamma_half_plus_one(int n) {
    double value = (n % 2 == 0) ? 1.0 : std::sqrt(std::numbers::pi);
    for (int twice_x = (n % 2 == 0) ? 2 : 1; twice_x <= n; twice_x += 2) value *= 0.5 * twice_x;
    return value;
}

/// Volume v_n of the unit ball in R^n.
inline double unit_ball_volume(int n) {
    if (n < 1) throw Error(ErrorCode::DomainError, "dimension must be positive");
    return std::pow(std::numbers::pi, 0.5 * n) / gamma_half_plus_one(n);
}

/// Radius of the origin-centred ball of volume t in R^n.
inline double radius_for_volume(int n, double t) { return std::pow(t / unit_ball_volume(n), 1.0 / n); }

enum class RegionKind { BallByVolume, Box, Annulus, ShiftedBall, Union, Difference };

inline const char* to_string(RegionKind kind) {
    switch (kind) {
    case RegionKind::BallByVolume: return "ball_by_volume";
    case RegionKind::Box: return "box";
    case RegionKind::Annulus: return "annulus";
    case RegionKind::ShiftedBall: return "shifted_ball";
    case RegionKind::Union: return "union";
    case RegionKind::Difference: return "difference";
    }
    return "unknown";
}

struct VolumeEstimate {
    double volume = 0;
    double error = 0;  // three standard errors
};

class Region;
VolumeEstimate composite_volume(const Region& a, std::size_t mc_samples, std::uint64_t seed);

inline constexpr std::size_t kDefaultCompositeSamples = 200000;

/// Immutable Borel set used as a counting region. Copies share children.
class Region {
public:
    static Region ball_of_volume(int n, double t) {
        if (n < 1) throw Error(ErrorCode::DimensionMismatch, "dimension must be positive");
        if (!(t > 0) || !std::isfinite(t)) throw Error(ErrorCode::InvalidVolume, "ball volume must be positive");
        Region r(RegionKind::BallByVolume, n);
        r.t_ = t;
        r.outer_radius_ = radius_for_volume(n, t);
        r.bounding_radius_ = r.outer_radius_;
        r.volume_ = t;
        return r;
    }

    static Region box(const RealVector& low, const RealVector& high) {
        if (low.size() != high.size() || low.size() == 0) {
            throw Error(ErrorCode::DimensionMismatch, "box corners must have equal positive dimension");
        }
        double volume = 1;
        RealVector far(low.size());
        for (Eigen::Index i = 0; i < low.size(); ++i) {
            if (!(low(i) < high(i))) throw Error(ErrorCode::EmptyRegion, "degenerate box interval");
            volume *= high(i) - low(i);
            far(i) = std::max(std::abs(low(i)), std::abs(high(i)));
        }
        Region r(RegionKind::Box, static_cast<int>(low.size()));
        r.low_ = low;
        r.high_ = high;
        r.volume_ = volume;
        r.bounding_radius_ = far.norm();
        return r;
    }

    /// Closed shell B_{t_outer} minus the open interior of B_{t_inner}.
    static Region annulus(int n, double t_inner, double t_outer) {
        if (!(t_inner > 0) || !(t_outer > t_inner)) {
            throw Error(ErrorCode::InvalidVolume, "annulus needs 0 < t_inner < t_outer");
        }
        Region r(RegionKind::Annulus, n);
        r.t_inner_ = t_inner;
        r.t_ = t_outer;
        r.inner_radius_ = radius_for_volume(n, t_inner);
        r.outer_radius_ = radius_for_volume(n, t_outer);
        r.bounding_radius_ = r.outer_radius_;
        r.volume_ = t_outer - t_inner;
        return r;
    }

    static Region shifted_ball(const RealVector& center, double t) {
        if (center.size() == 0) throw Error(ErrorCode::DimensionMismatch, "empty centre");
        if (!(t > 0)) throw Error(ErrorCode::InvalidVolume, "ball volume must be positive");
        const int n = static_cast<int>(center.size());
        Region r(RegionKind::ShiftedBall, n);
        r.t_ = t;
        r.center_ = center;
        r.outer_radius_ = radius_for_volume(n, t);
        r.bounding_radius_ = center.norm() + r.outer_radius_;
        r.volume_ = t;
        return r;
    }

    static Region union_of(const std::vector<Region>& parts, std::size_t mc_samples = kDefaultCompositeSamples,
                           std::uint64_t seed = 0) {
        if (parts.empty()) throw Error(ErrorCode::EmptyRegion, "union of no regions");
        Region r(RegionKind::Union, parts.front().dim());
        for (const Region& p : parts) {
            if (p.dim() != r.dim_) throw Error(ErrorCode::DimensionMismatch, "union parts of mixed dimension");
            r.bounding_radius_ = std::max(r.bounding_radius_, p.bounding_radius());
            r.children_.push_back(std::make_shared<const Region>(p));
        }
        r.finish_composite(mc_samples, seed);
        return r;
    }

    static Region difference(const Region& base, const Region& removed,
                             std::size_t mc_samples = kDefaultCompositeSamples, std::uint64_t seed = 0) {
        if (base.dim() != removed.dim()) throw Error(ErrorCode::DimensionMismatch, "difference of mixed dimension");
        Region r(RegionKind::Difference, base.dim());
        r.bounding_radius_ = base.bounding_radius();
        r.children_ = {std::make_shared<const Region>(base), std::make_shared<const Region>(removed)};
        r.finish_composite(mc_samples, seed);
        return r;
    }

    int dim() const noexcept { return dim_; }
    RegionKind kind() const noexcept { return kind_; }
    double bounding_radius() const noexcept { return bounding_radius_; }
    double volume() const noexcept { return volume_; }
    double volume_error() const noexcept { return volume_error_; }

    // kind-specific parameters
    double t() const noexcept { return t_; }
    double t_inner() const noexcept { return t_inner_; }
    double radius() const noexcept { return outer_radius_; }
    double inner_radius() const noexcept { return inner_radius_; }
    const RealVector& low() const noexcept { return low_; }
    const RealVector& high() const noexcept { return high_; }
    const RealVector& center() const noexcept { return center_; }
    std::size_t child_count() const noexcept { return children_.size(); }
    const Region& child(std::size_t i) const { return *children_.at(i); }
    std::size_t mc_samples() const noexcept { return mc_samples_; }
    std::uint64_t mc_seed() const noexcept { return mc_seed_; }

    /// Membership without the dimension check; callers guarantee x.size() == dim().
    bool contains(const RealVector& x) const {
        switch (kind_) {
        case RegionKind::BallByVolume:
            return within(x.squaredNorm(), outer_radius_);
        case RegionKind::Annulus: {
            const double r2 = x.squaredNorm();
            return within(r2, outer_radius_) &&
                   r2 >= inner_radius_ * inner_radius_ * (1 - 2 * kBoundarySlack);
        }
        case RegionKind::ShiftedBall:
            return within((x - center_).squaredNorm(), outer_radius_);
        case RegionKind::Box:
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                const double lo_slack = kBoundarySlack * std::max(1.0, std::abs(low_(i)));
                const double hi_slack = kBoundarySlack * std::max(1.0, std::abs(high_(i)));
                if (x(i) < low_(i) - lo_slack || x(i) > high_(i) + hi_slack) return false;
            }
            return true;
        case RegionKind::Union:
            for (const auto& c : children_)
                if (c->contains(x)) return true;
            return false;
        case RegionKind::Difference:
            return children_[0]->contains(x) && !children_[1]->contains(x);
        }
        return false;
    }

private:
    Region(RegionKind kind, int dim) : kind_(kind), dim_(dim) {}

    static bool within(double norm2, double radius) {
        return norm2 <= radius * radius * (1 + 2 * kBoundarySlack);
    }

    void finish_composite(std::size_t mc_samples, std::uint64_t seed) {
        mc_samples_ = mc_samples;
        mc_seed_ = seed;
        const VolumeEstimate v = composite_volume(*this, mc_samples, seed);
        volume_ = v.volume;
        volume_error_ = v.error;
    }

    RegionKind kind_;
    int dim_;
    double bounding_radius_ = 0;
    double volume_ = 0;
    double volume_error_ = 0;
    double t_ = 0;
    double t_inner_ = 0;
    double outer_radius_ = 0;
    double inner_radius_ = 0;
    RealVector low_, high_, center_;
    std::vector<std::shared_ptr<const Region>> children_;
    std::size_t mc_samples_ = 0;
    std::uint64_t mc_seed_ = 0;
};

/// 1 if x lies in A, else 0.
inline int indicator(const Region& a, const RealVector& x) {
    if (x.size() != a.dim()) throw Error(ErrorCode::DimensionMismatch, "point dimension differs from region");
    return a.contains(x) ? 1 : 0;
}

/// Monte Carlo volume by uniform sampling in the bounding ball; error is three standard errors.
inline VolumeEstimate composite_volume(const Region& a, std::size_t mc_samples, std::uint64_t seed) {
    if (mc_samples == 0) throw Error(ErrorCode::InsufficientData, "composite_volume needs samples");
    Rng rng = make_rng(seed, 0x766f6c);
    const int n = a.dim();
    const double radius = a.bounding_radius();
    std::size_t hits = 0;
    for (std::size_t i = 0; i < mc_samples; ++i)
        if (a.contains(uniform_in_ball(n, radius, rng))) ++hits;
    const double enclosing = unit_ball_volume(n) * std::pow(radius, n);
    const double p = static_cast<double>(hits) / static_cast<double>(mc_samples);
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(mc_samples));
    return VolumeEstimate{enclosing * p, 3.0 * enclosing * se};
}

}  // namespace geonum
