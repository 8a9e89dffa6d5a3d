#pragma once

#include <cmath>
#include <numbers>

namespace xg::pitch {

// Canonical frame: 105 x 68 m, attacking left to right, goal at x = 105.
inline constexpr double kLength = 105.0;
inline constexpr double kWidth = 68.0;
inline constexpr double kGoalX = kLength;
inline constexpr double kGoalY = kWidth / 2.0;
inline constexpr double kGoalMouth = 7.32;
inline constexpr double kPenaltyAreaDepth = 16.5;
inline constexpr double kPenaltyAreaWidth = 40.32;
inline constexpr double kPenaltySpotX = kLength - 11.0;
inline constexpr double kPenaltySpotY = kGoalY;

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

inline double squared_distance(Point a, Point b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

inline double distance_to_goal(Point p) {
    return std::hypot(kGoalX - p.x, kGoalY - p.y);
}

/// Angle subtended by the two posts at `p`, in [0, pi]. Between the posts on
/// the goal line it is pi; on the goal line outside the posts it is 0.
inline double goal_angle(Point p) {
    const double ax = kGoalX - p.x;
    const double ay = (kGoalY - kGoalMouth / 2.0) - p.y;
    const double bx = kGoalX - p.x;
    const double by = (kGoalY + kGoalMouth / 2.0) - p.y;
    const double cross = ax * by - ay * bx;
    const double dot = ax * bx + ay * by;
    return std::atan2(std::abs(cross), dot);
}

inline bool in_penalty_area(Point p) {
    const double half = kPenaltyAreaWidth / 2.0;
    return p.x >= kLength - kPenaltyAreaDepth && p.x <= kLength &&
           p.y >= kGoalY - half && p.y <= kGoalY + half;
}

inline bool on_pitch(Point p) {
    return p.x >= 0.0 && p.x <= kLength && p.y >= 0.0 && p.y <= kWidth;
}

} // namespace xg::pitch
