#include "slitspec/crack.hpp"
#include "slitspec/errors.hpp"

#include <algorithm>
#include <cmath>

namespace slitspec {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kTouchTol = 1e-12;

double wrap_angle(double a) {
    // to (-pi, pi]
    a = std::fmod(a, kTwoPi);
    if (a <= -M_PI) a += kTwoPi;
    if (a > M_PI) a -= kTwoPi;
    return a;
}

bool angular(Domain d) { return d == Domain::Sphere2 || d == Domain::Circle1; }

} // namespace

CrackSpec CrackSpec::sphere_empty() { return CrackSpec{Domain::Sphere2, {}}; }

CrackSpec CrackSpec::sphere_arc(double beta) {
    if (!(beta >= 0.0 && beta <= M_PI)) throw InvalidCrackError("sphere arc aperture outside [0, pi]");
    if (beta == 0.0) return sphere_empty();
    if (beta == M_PI) return sphere_full_circle();
    return CrackSpec{Domain::Sphere2, {{-beta, beta}}};
}

CrackSpec CrackSpec::sphere_arcs(std::vector<ArcInterval> arcs) {
    return CrackSpec{Domain::Sphere2, std::move(arcs)};
}

CrackSpec CrackSpec::sphere_full_circle() {
    return CrackSpec{Domain::Sphere2, {{-M_PI, M_PI}}};
}

CrackSpec CrackSpec::half_equator_minus_gaps(const std::vector<ArcInterval>& gaps) {
    std::vector<ArcInterval> sorted = gaps;
    std::sort(sorted.begin(), sorted.end(),
              [](const ArcInterval& a, const ArcInterval& b) { return a.start < b.start; });
    std::vector<ArcInterval> arcs;
    double cursor = -M_PI / 2;
    for (const ArcInterval& g : sorted) {
        if (g.start < -M_PI / 2 - kTouchTol || g.end > M_PI / 2 + kTouchTol)
            throw InvalidCrackError("gap outside the half-equator");
        if (g.start > cursor + kTouchTol) arcs.push_back({cursor, g.start});
        cursor = std::max(cursor, g.end);
    }
    if (cursor < M_PI / 2 - kTouchTol) arcs.push_back({cursor, M_PI / 2});
    return CrackSpec{Domain::Sphere2, arcs};
}

CrackSpec CrackSpec::disk_slit(double r_in, double r_out) {
    return CrackSpec{Domain::Disk2, {{r_in, r_out}}};
}

CrackSpec CrackSpec::disk_slits(std::vector<ArcInterval> segments) {
    return CrackSpec{Domain::Disk2, std::move(segments)};
}

CrackSpec CrackSpec::circle_point(double angle) {
    return CrackSpec{Domain::Circle1, {{angle, angle}}};
}

CrackSpec CrackSpec::circle_arc(double start, double end) {
    return CrackSpec{Domain::Circle1, {{start, end}}};
}

double CrackSpec::total_length() const {
    double sum = 0.0;
    for (const ArcInterval& a : arcs) sum += a.length();
    return sum;
}

bool CrackSpec::full_circle() const {
    return angular(domain) && !arcs.empty() && total_length() >= kTwoPi - kTouchTol;
}

Eigen::Vector3d CrackSpec::carrier_point(double t) const {
    switch (domain) {
    case Domain::Sphere2: return {-std::cos(t), 0.0, std::sin(t)};
    case Domain::Disk2: return {-t, 0.0, 0.0};
    case Domain::Circle1: return {std::cos(t), std::sin(t), 0.0};
    }
    return Eigen::Vector3d::Zero();
}

bool CrackSpec::contains(double t, double eps) const {
    for (const ArcInterval& a : arcs) {
        if (angular(domain)) {
            double rel = t - a.start;
            rel = rel - kTwoPi * std::floor(rel / kTwoPi);
            if (rel <= a.length() + eps || rel >= kTwoPi - eps) return true;
        } else {
            if (t >= a.start - eps && t <= a.end + eps) return true;
        }
    }
    return false;
}

CrackSpec CrackSpec::normalized() const {
    CrackSpec out;
    out.domain = domain;
    if (arcs.empty()) return out;

    for (const ArcInterval& a : arcs) {
        if (!std::isfinite(a.start) || !std::isfinite(a.end))
            throw InvalidCrackError("non-finite arc endpoint");
        if (a.end < a.start) throw InvalidCrackError("arc end precedes start");
    }

    if (domain == Domain::Disk2) {
        std::vector<ArcInterval> segs = arcs;
        for (const ArcInterval& s : segs) {
            if (s.start < -kTouchTol || s.end > 1.0 + kTouchTol)
                throw InvalidCrackError("disk slit radii must lie in [0, 1]");
            if (s.length() <= kTouchTol) throw InvalidCrackError("degenerate zero-length slit");
        }
        std::sort(segs.begin(), segs.end(),
                  [](const ArcInterval& a, const ArcInterval& b) { return a.start < b.start; });
        for (const ArcInterval& s : segs) {
            if (!out.arcs.empty()) {
                ArcInterval& prev = out.arcs.back();
                if (s.start < prev.end - kTouchTol)
                    throw InvalidCrackError("overlapping radial segments");
                if (s.start <= prev.end + kTouchTol) {  // touching: merge
                    prev.end = std::max(prev.end, s.end);
                    continue;
                }
            }
            out.arcs.push_back({std::max(0.0, s.start), std::min(1.0, s.end)});
        }
        return out;
    }

    // Angular domains. Point cuts (zero length) are allowed on Circle1 only.
    std::vector<ArcInterval> positive;
    std::vector<double> points;
    for (const ArcInterval& a : arcs) {
        const double len = a.length();
        if (len <= kTouchTol) {
            if (domain != Domain::Circle1)
                throw InvalidCrackError("degenerate zero-length arc");
            points.push_back(wrap_angle(a.start));
            continue;
        }
        if (len >= kTwoPi + kTouchTol) throw InvalidCrackError("arc longer than the full circle");
        const double s = wrap_angle(a.start);
        positive.push_back({s, s + std::min(len, kTwoPi)});
    }

    std::sort(positive.begin(), positive.end(),
              [](const ArcInterval& a, const ArcInterval& b) { return a.start < b.start; });

    std::vector<ArcInterval> merged;
    for (const ArcInterval& a : positive) {
        if (!merged.empty()) {
            ArcInterval& prev = merged.back();
            if (a.start < prev.end - kTouchTol) throw InvalidCrackError("overlapping arcs");
            if (a.start <= prev.end + kTouchTol) {
                prev.end = std::max(prev.end, a.end);
                continue;
            }
        }
        merged.push_back(a);
    }

    // The last arc may extend past pi and touch or overlap the first one.
    if (merged.size() >= 2 && merged.back().end > M_PI) {
        const double wrapped_end = merged.back().end - kTwoPi;
        if (wrapped_end > merged.front().start + kTouchTol)
            throw InvalidCrackError("overlapping arcs across the branch point");
        if (wrapped_end >= merged.front().start - kTouchTol) {
            merged.back().end = merged.front().end + kTwoPi;
            merged.erase(merged.begin());
        }
    }
    if (!merged.empty() && merged.back().length() > kTwoPi + kTouchTol)
        throw InvalidCrackError("overlapping arcs");
    if (merged.size() == 1 && merged.front().length() >= kTwoPi - kTouchTol)
        merged.front() = {-M_PI, M_PI};

    out.arcs = merged;

    // Keep point cuts that do not already lie inside a positive arc.
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end(),
                             [](double a, double b) { return std::abs(a - b) <= kTouchTol; }),
                 points.end());
    for (double p : points)
        if (!out.contains(p, kTouchTol)) out.arcs.push_back({p, p});

    std::sort(out.arcs.begin(), out.arcs.end(),
              [](const ArcInterval& a, const ArcInterval& b) { return a.start < b.start; });
    return out;
}

} // namespace slitspec
