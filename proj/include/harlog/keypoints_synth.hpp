#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <vector>

#include "harlog/common.hpp"
#include "harlog/pose.hpp"
#include "harlog/tree.hpp"

namespace harlog {

// Kinematic archetypes: per activity, a sinusoidal angle trajectory per limb.
// Amplitudes (radians) are fixed so the concept pattern of each activity
// holds: legs drive walk/run/squat/jump, arms drive wave/clap/wipe. The
// table is documented in the README.
struct Archetype {
    std::array<double, kNumLimbs> amplitude;  // limb order: rua rla lua lla rul rll lul lll
    double frequency_hz;
};

inline constexpr std::array<Archetype, kNumActivities> kArchetypes = {{
    // walk: broad legs, quiet arms
    {{0.10, 0.15, 0.10, 0.15, 0.60, 1.00, 0.60, 1.00}, 1.0},
    // run: broad legs and broad arms
    {{0.50, 0.60, 0.50, 0.60, 0.70, 1.20, 0.70, 1.20}, 2.0},
    // squat: modest lower legs, thighs swing, arms quiet
    {{0.05, 0.06, 0.05, 0.06, 0.50, 0.45, 0.50, 0.45}, 0.5},
    // jump: modest lower legs, thighs nearly straight
    {{0.08, 0.08, 0.08, 0.08, 0.10, 0.40, 0.10, 0.40}, 1.0},
    // wave: both arms swing, legs static
    {{0.60, 0.70, 0.60, 0.70, 0.02, 0.02, 0.02, 0.02}, 1.5},
    // clap: forearms oscillate, upper arms quiet
    {{0.08, 0.60, 0.08, 0.60, 0.02, 0.02, 0.02, 0.02}, 2.0},
    // wipe: one forearm sweeps, left side quiet
    {{0.10, 0.50, 0.03, 0.05, 0.02, 0.02, 0.02, 0.02}, 1.0},
}};

namespace detail {

// Fixed skeleton in viewport pixels (y grows downwards).
struct Skeleton {
    Point2 nose{300, 150}, left_eye{305, 145}, right_eye{295, 145};
    Point2 left_ear{308, 148}, right_ear{292, 148};
    Point2 left_shoulder{312, 180}, right_shoulder{288, 180};
    Point2 left_hip{310, 300}, right_hip{290, 300};
    double upper_arm = 55, lower_arm = 55, upper_leg = 70, lower_leg = 70;
};

inline Point2 advance(Point2 from, double angle, double len) {
    return {from.x + len * std::cos(angle), from.y + len * std::sin(angle)};
}

}  // namespace detail

// Deterministic keypoint trace for one activity: limb angles follow the
// archetype sinusoids around a hanging rest pose, joints are placed by
// forward kinematics, and every coordinate gets Gaussian pixel jitter.
inline std::vector<KeypointFrame> synth_keypoints(std::size_t activity, double seconds, double fps,
                                                  std::uint64_t seed, double jitter_sigma = 1.0) {
    if (activity >= kNumActivities) throw DomainError("unknown activity index");
    const auto& arch = kArchetypes[activity];
    const detail::Skeleton sk;
    constexpr double down = std::numbers::pi / 2.0;  // limbs hang towards +y
    const double omega = 2.0 * std::numbers::pi * arch.frequency_hz;

    Rng rng(seed);
    std::normal_distribution<double> jitter(0.0, 1.0);
    auto n_frames = static_cast<std::size_t>(std::llround(seconds * fps));
    std::vector<KeypointFrame> frames;
    frames.reserve(n_frames);

    auto amp = [&](Limb l) { return arch.amplitude[static_cast<std::size_t>(l)]; };

    for (std::size_t i = 0; i < n_frames; ++i) {
        double t = static_cast<double>(i) / fps;
        // left limbs run in anti-phase with right limbs (alternation)
        auto angle = [&](Limb l, double phase) { return down + amp(l) * std::sin(omega * t + phase); };

        KeypointFrame f;
        f.frame_index = static_cast<std::int64_t>(i);
        f.timestamp_s = t;

        auto& p = f.points;
        p[0] = sk.nose;
        p[1] = sk.left_eye;
        p[2] = sk.right_eye;
        p[3] = sk.left_ear;
        p[4] = sk.right_ear;
        p[5] = sk.left_shoulder;
        p[6] = sk.right_shoulder;
        p[11] = sk.left_hip;
        p[12] = sk.right_hip;

        double a_rua = angle(Limb::RightUpperArm, 0.0);
        double a_lua = angle(Limb::LeftUpperArm, std::numbers::pi);
        p[8] = detail::advance(p[6], a_rua, sk.upper_arm);   // right elbow
        p[7] = detail::advance(p[5], a_lua, sk.upper_arm);   // left elbow
        p[10] = detail::advance(p[8], angle(Limb::RightLowerArm, 0.7), sk.lower_arm);  // right wrist
        p[9] = detail::advance(p[7], angle(Limb::LeftLowerArm, std::numbers::pi + 0.7), sk.lower_arm);

        double a_rul = angle(Limb::RightUpperLeg, 0.0);
        double a_lul = angle(Limb::LeftUpperLeg, std::numbers::pi);
        p[14] = detail::advance(p[12], a_rul, sk.upper_leg);  // right knee
        p[13] = detail::advance(p[11], a_lul, sk.upper_leg);  // left knee
        p[16] = detail::advance(p[14], angle(Limb::RightLowerLeg, 0.5), sk.lower_leg);  // right ankle
        p[15] = detail::advance(p[13], angle(Limb::LeftLowerLeg, std::numbers::pi + 0.5), sk.lower_leg);

        if (jitter_sigma > 0.0) {
            for (auto& pt : p) {
                pt.x += jitter_sigma * jitter(rng);
                pt.y += jitter_sigma * jitter(rng);
            }
        }
        frames.push_back(f);
    }
    return frames;
}

}  // namespace harlog
