#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "harlog/common.hpp"

namespace harlog {

// Two joints at the same location carry no orientation.
class DegenerateLimb : public DomainError {
public:
    DegenerateLimb() : DomainError("degenerate limb: parent and child joints coincide") {}
};

class WindowTooShort : public DomainError {
public:
    WindowTooShort(std::size_t got, std::size_t want)
        : DomainError("window has " + std::to_string(got) + " samples, expected " + std::to_string(want)) {}
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline constexpr std::size_t kNumKeypoints = 17;
inline constexpr std::size_t kNumLimbs = 8;

enum class Limb : std::size_t {
    RightUpperArm = 0,
    RightLowerArm = 1,
    LeftUpperArm = 2,
    LeftLowerArm = 3,
    RightUpperLeg = 4,
    RightLowerLeg = 5,
    LeftUpperLeg = 6,
    LeftLowerLeg = 7,
};

inline constexpr std::array<const char*, kNumLimbs> kLimbNames = {
    "right_upper_arm", "right_lower_arm", "left_upper_arm", "left_lower_arm",
    "right_upper_leg", "right_lower_leg", "left_upper_leg", "left_lower_leg",
};

inline std::optional<Limb> limb_from_name(const std::string& name) {
    for (std::size_t i = 0; i < kNumLimbs; ++i)
        if (name == kLimbNames[i]) return static_cast<Limb>(i);
    return std::nullopt;
}

struct KeypointFrame {
    std::int64_t frame_index = 0;
    double timestamp_s = 0.0;
    std::array<Point2, kNumKeypoints> points{};
};

// One limb segment, oriented from parent joint to child joint.
struct LimbSegment {
    Limb limb{};
    std::size_t parent_joint = 0;
    std::size_t child_joint = 0;
};

using LimbMap = std::array<LimbSegment, kNumLimbs>;

// Default joint-index map for the 17-keypoint layout
// (0 nose, 1-4 eyes/ears, 5/6 L/R shoulder, 7/8 L/R elbow, 9/10 L/R wrist,
//  11/12 L/R hip, 13/14 L/R knee, 15/16 L/R ankle).
inline LimbMap default_limb_map() {
    return LimbMap{{
        {Limb::RightUpperArm, 6, 8},
        {Limb::RightLowerArm, 8, 10},
        {Limb::LeftUpperArm, 5, 7},
        {Limb::LeftLowerArm, 7, 9},
        {Limb::RightUpperLeg, 12, 14},
        {Limb::RightLowerLeg, 14, 16},
        {Limb::LeftUpperLeg, 11, 13},
        {Limb::LeftLowerLeg, 13, 15},
    }};
}

// Limb map file: {"right_upper_arm": [6, 8], ...}, all 8 limbs required.
inline LimbMap load_limb_map(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("limb map " + path.string() + ": " + e.what());
    }
    LimbMap map = default_limb_map();
    std::array<bool, kNumLimbs> seen{};
    for (const auto& [key, val] : j.items()) {
        auto limb = limb_from_name(key);
        if (!limb) throw ValidationError("limb map: unknown limb name '" + key + "'");
        if (!val.is_array() || val.size() != 2)
            throw ValidationError("limb map: '" + key + "' must be [parent, child]");
        std::size_t p = val[0].get<std::size_t>();
        std::size_t c = val[1].get<std::size_t>();
        if (p >= kNumKeypoints || c >= kNumKeypoints || p == c)
            throw ValidationError("limb map: '" + key + "' has invalid joint indices");
        map[static_cast<std::size_t>(*limb)] = {*limb, p, c};
        seen[static_cast<std::size_t>(*limb)] = true;
    }
    for (std::size_t i = 0; i < kNumLimbs; ++i)
        if (!seen[i]) throw ValidationError(std::string("limb map: missing limb '") + kLimbNames[i] + "'");
    return map;
}

struct WindowConfig {
    double window_s = 3.0;
    double fps = 30.0;
    std::size_t stride_frames = 1;

    std::size_t frames_per_window() const {
        double w = window_s * fps;
        auto n = static_cast<std::size_t>(std::llround(w));
        if (std::abs(w - static_cast<double>(n)) > 1e-9 || n < 2)
            throw DomainError("window_s * fps must be an integer >= 2");
        if (stride_frames < 1) throw DomainError("stride must be >= 1");
        return n;
    }
};

struct MotionFeatureVector {
    std::int64_t window_start_frame = 0;
    std::array<double, kNumLimbs> delta{};
    std::optional<std::string> label;
};

struct ExtractReport {
    std::size_t windows_emitted = 0;
    std::size_t windows_skipped = 0;  // windows dropped for missing/NaN keypoints
};

// Full-quadrant angle of the vector child - parent, in (-pi, pi].
inline double limb_angle(Point2 parent, Point2 child) {
    double dx = child.x - parent.x;
    double dy = child.y - parent.y;
    if (dx == 0.0 && dy == 0.0) throw DegenerateLimb();
    double a = std::atan2(dy, dx);
    if (a <= -std::numbers::pi) a = std::numbers::pi;  // normalize -pi to pi
    return a;
}

// Phase unwrap: every consecutive difference of the output lies in (-pi, pi],
// and each element is congruent to the input mod 2*pi.
inline std::vector<double> unwrap(std::span<const double> series) {
    if (series.empty()) throw DomainError("unwrap: empty series");
    std::vector<double> out(series.size());
    out[0] = series[0];
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t i = 1; i < series.size(); ++i) {
        double d = series[i] - series[i - 1];
        d -= two_pi * std::floor((d + std::numbers::pi) / two_pi);
        if (d <= -std::numbers::pi) d += two_pi;
        out[i] = out[i - 1] + d;
    }
    return out;
}

// Max minus min of the unwrapped window.
inline double dynamic_range(std::span<const double> window, std::size_t required_len) {
    if (window.size() < required_len) throw WindowTooShort(window.size(), required_len);
    auto unwrapped = unwrap(window);
    double lo = unwrapped[0], hi = unwrapped[0];
    for (double v : unwrapped) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi - lo;
}

inline bool frame_has_valid_joints(const KeypointFrame& f, const LimbMap& limbs) {
    for (const auto& seg : limbs) {
        const auto& p = f.points[seg.parent_joint];
        const auto& c = f.points[seg.child_joint];
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(c.x) || !std::isfinite(c.y))
            return false;
        if (p.x == c.x && p.y == c.y) return false;
    }
    return true;
}

// One feature vector per stride position; delta[l] is the dynamic range of
// limb l's unwrapped angle in that window. Windows touching a frame with
// missing or degenerate keypoints are skipped and counted.
inline std::vector<MotionFeatureVector> extract_features(std::span<const KeypointFrame> frames,
                                                         const LimbMap& limbs, const WindowConfig& cfg,
                                                         ExtractReport* report = nullptr,
                                                         const std::optional<std::string>& label = std::nullopt) {
    const std::size_t win = cfg.frames_per_window();
    if (frames.size() < win) throw DomainError("extract_features: fewer frames than one window");

    std::vector<bool> valid(frames.size());
    std::array<std::vector<double>, kNumLimbs> angles;
    for (auto& a : angles) a.assign(frames.size(), 0.0);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        valid[i] = frame_has_valid_joints(frames[i], limbs);
        if (!valid[i]) continue;
        for (std::size_t l = 0; l < kNumLimbs; ++l) {
            const auto& seg = limbs[l];
            angles[l][i] = limb_angle(frames[i].points[seg.parent_joint], frames[i].points[seg.child_joint]);
        }
    }

    // prefix sums of invalid frames for O(1) window validity checks
    std::vector<std::size_t> bad(frames.size() + 1, 0);
    for (std::size_t i = 0; i < frames.size(); ++i) bad[i + 1] = bad[i] + (valid[i] ? 0 : 1);

    std::vector<MotionFeatureVector> out;
    ExtractReport rep;
    for (std::size_t start = 0; start + win <= frames.size(); start += cfg.stride_frames) {
        if (bad[start + win] - bad[start] > 0) {
            ++rep.windows_skipped;
            continue;
        }
        MotionFeatureVector v;
        v.window_start_frame = frames[start].frame_index;
        for (std::size_t l = 0; l < kNumLimbs; ++l)
            v.delta[l] = dynamic_range(std::span<const double>(angles[l]).subspan(start, win), win);
        v.label = label;
        out.push_back(std::move(v));
        ++rep.windows_emitted;
    }
    if (report) *report = rep;
    return out;
}

// -- keypoint JSONL: {"frame": int, "t": float, "points": [[x,y] x 17]} --
// A null point marks a missing keypoint.

inline std::vector<KeypointFrame> load_keypoints_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open keypoints file: " + path.string());
    std::vector<KeypointFrame> frames;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.contains("frame") || !j.contains("t") || !j.contains("points"))
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": frame/t/points required");
        KeypointFrame f;
        f.frame_index = j["frame"].get<std::int64_t>();
        f.timestamp_s = j["t"].get<double>();
        const auto& pts = j["points"];
        if (!pts.is_array() || pts.size() != kNumKeypoints)
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected 17 points");
        for (std::size_t i = 0; i < kNumKeypoints; ++i) {
            if (pts[i].is_null()) {
                f.points[i] = {std::nan(""), std::nan("")};
            } else {
                f.points[i] = {pts[i][0].get<double>(), pts[i][1].get<double>()};
            }
        }
        frames.push_back(f);
    }
    return frames;
}

inline std::string keypoints_to_jsonl(std::span<const KeypointFrame> frames) {
    std::string out;
    for (const auto& f : frames) {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : f.points) {
            if (std::isfinite(p.x) && std::isfinite(p.y))
                pts.push_back({p.x, p.y});
            else
                pts.push_back(nullptr);
        }
        nlohmann::json j{{"frame", f.frame_index}, {"t", f.timestamp_s}, {"points", pts}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

// -- feature CSV: window_start,delta_1,...,delta_8,label --

inline std::string features_csv_header() {
    std::string h = "window_start";
    for (std::size_t l = 1; l <= kNumLimbs; ++l) h += ",delta_" + std::to_string(l);
    h += ",label";
    return h;
}

inline std::string features_to_csv(std::span<const MotionFeatureVector> features, bool with_header = true) {
    std::string out;
    if (with_header) {
        out += features_csv_header();
        out += '\n';
    }
    for (const auto& f : features) {
        out += std::to_string(f.window_start_frame);
        for (double d : f.delta) {
            out += ',';
            out += num_str(d);
        }
        out += ',';
        if (f.label) out += *f.label;
        out += '\n';
    }
    return out;
}

inline std::vector<MotionFeatureVector> load_features_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open features file: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != features_csv_header())
        throw ValidationError(path.string() + ": bad or missing header");
    std::vector<MotionFeatureVector> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != kNumLimbs + 2)
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                                  std::to_string(kNumLimbs + 2) + " fields");
        MotionFeatureVector v;
        try {
            v.window_start_frame = std::stoll(fields[0]);
            for (std::size_t l = 0; l < kNumLimbs; ++l) v.delta[l] = std::stod(fields[l + 1]);
        } catch (const std::exception&) {
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": malformed number");
        }
        if (!fields.back().empty()) v.label = fields.back();
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace harlog
