#pragma once
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "plab/analysis.hpp"
#include "plab/dynsys.hpp"
#include "plab/errors.hpp"
#include "plab/ode.hpp"
#include "plab/pursuit.hpp"

namespace plab::io {

/// 17 significant digits: enough for every finite double to round-trip
/// bit-exactly through text.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Writes through a temp file and renames into place on commit, so readers
/// never observe a half-written output.
class AtomicFile {
public:
    explicit AtomicFile(const std::string& path)
        : path_(path), tmp_(path + ".tmp"), out_(tmp_, std::ios::binary | std::ios::trunc) {
        if (!out_) throw Error("cannot open '" + tmp_ + "' for writing");
    }
    ~AtomicFile() {
        if (!committed_) {
            out_.close();
            std::error_code ec;
            std::filesystem::remove(tmp_, ec);
        }
    }
    std::ofstream& stream() { return out_; }

    void commit() {
        out_.flush();
        if (!out_) throw Error("write to '" + tmp_ + "' failed");
        out_.close();
        std::error_code ec;
        std::filesystem::rename(tmp_, path_, ec);
        if (ec) throw Error("cannot move '" + tmp_ + "' to '" + path_ + "': " + ec.message());
        committed_ = true;
    }

private:
    std::string path_, tmp_;
    std::ofstream out_;
    bool committed_ = false;
};

// ---------------------------------------------------------------------------
// CSV (comma separated, LF endings, header row)
// ---------------------------------------------------------------------------

inline void write_simulate_csv(const std::string& path,
                               std::span<const PursuitSample> samples) {
    AtomicFile file(path);
    auto& f = file.stream();
    f << "param,evader_x,evader_y,pursuer_x,pursuer_y,rho,lambda\n";
    for (const auto& s : samples)
        f << format_double(s.param) << ',' << format_double(s.evader.x) << ','
          << format_double(s.evader.y) << ',' << format_double(s.pursuer.x) << ','
          << format_double(s.pursuer.y) << ',' << format_double(s.rho) << ','
          << format_double(s.lambda) << '\n';
    file.commit();
}

/// Shared by the circular and elliptical reduced systems; the circular one
/// has no phase, so its phi column stays empty.
inline void write_dynsys_csv(const std::string& path, const Trajectory& traj) {
    AtomicFile file(path);
    auto& f = file.stream();
    f << "t,rho,zeta,phi\n";
    const bool has_phi = traj.dim >= 3;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto y = traj.state(i);
        f << format_double(traj.t[i]) << ',' << format_double(y[0]) << ','
          << format_double(y[1]) << ',';
        if (has_phi) f << format_double(y[2]);
        f << '\n';
    }
    file.commit();
}

inline void write_compare_csv(const std::string& path, const InvarianceReport& rep) {
    AtomicFile file(path);
    auto& f = file.stream();
    f << "anchor_k,evader_x,evader_y,p1_x,p1_y,p2_x,p2_y,p3_x,p3_y,max_dev\n";
    for (const auto& a : rep.anchors) {
        f << a.k << ',' << format_double(a.evader.x) << ',' << format_double(a.evader.y);
        for (const Vec2& p : a.pursuer)
            f << ',' << format_double(p.x) << ',' << format_double(p.y);
        f << ',' << format_double(a.max_dev) << '\n';
    }
    file.commit();
}

/// gap column: distance to the previous crossing; empty for the first row.
inline void write_limit_cycle_csv(const std::string& path,
                                  std::span<const SectionCrossing> crossings,
                                  std::span<const double> gaps) {
    AtomicFile file(path);
    auto& f = file.stream();
    f << "k,rho,zeta_wrapped,gap\n";
    for (std::size_t i = 0; i < crossings.size(); ++i) {
        f << crossings[i].k << ',' << format_double(crossings[i].rho) << ','
          << format_double(crossings[i].zeta_wrapped) << ',';
        if (i > 0 && i - 1 < gaps.size()) f << format_double(gaps[i - 1]);
        f << '\n';
    }
    file.commit();
}

inline void write_zeta_ode_csv(const std::string& path, const Trajectory& traj) {
    AtomicFile file(path);
    auto& f = file.stream();
    f << "theta,zeta,zeta_prime\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto y = traj.state(i);
        f << format_double(traj.t[i]) << ',' << format_double(y[0]) << ','
          << format_double(y[1]) << '\n';
    }
    file.commit();
}

inline void write_equilibrium_csv(const std::string& path, const EquilibriumReport& rep) {
    AtomicFile file(path);
    auto& f = file.stream();
    f << "rho_star,zeta_star,lambda_plus_re,lambda_plus_im,lambda_minus_re,lambda_minus_im,"
         "class\n";
    f << format_double(rep.rho_star) << ',' << format_double(rep.zeta_star) << ','
      << format_double(rep.lambda_plus.real()) << ',' << format_double(rep.lambda_plus.imag())
      << ',' << format_double(rep.lambda_minus.real()) << ','
      << format_double(rep.lambda_minus.imag()) << ',' << to_string(rep.stability) << '\n';
    file.commit();
}

// ---------------------------------------------------------------------------
// SVG: plain polyline plot with axis ticks
// ---------------------------------------------------------------------------

struct SvgSeries {
    std::vector<Vec2> pts;
    std::string color = "#d62728";
    bool points_only = false;   ///< draw markers instead of a polyline
};

inline void write_svg_plot(const std::string& path, std::span<const SvgSeries> series,
                           int width = 720, int height = 540) {
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& s : series)
        for (const Vec2& p : s.pts) {
            if (first) {
                xmin = xmax = p.x;
                ymin = ymax = p.y;
                first = false;
            }
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
    auto widen = [](double& lo, double& hi) {
        const double pad = (hi - lo) > 0 ? 0.05 * (hi - lo) : 1.0;
        lo -= pad;
        hi += pad;
    };
    widen(xmin, xmax);
    widen(ymin, ymax);

    const double margin = 48;
    auto px = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin); };
    auto py = [&](double y) {
        return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin);
    };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return std::string(buf);
    };

    AtomicFile file(path);
    auto& f = file.stream();
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    f << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << width - 2 * margin
      << "\" height=\"" << height - 2 * margin
      << "\" fill=\"white\" stroke=\"black\" stroke-width=\"1\"/>\n";

    constexpr int ticks = 5;
    for (int i = 0; i <= ticks; ++i) {
        const double xv = xmin + (xmax - xmin) * i / ticks;
        const double yv = ymin + (ymax - ymin) * i / ticks;
        f << "<line x1=\"" << num(px(xv)) << "\" y1=\"" << height - margin << "\" x2=\""
          << num(px(xv)) << "\" y2=\"" << height - margin + 6
          << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        f << "<text x=\"" << num(px(xv)) << "\" y=\"" << height - margin + 20
          << "\" font-size=\"11\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
        f << "<line x1=\"" << margin - 6 << "\" y1=\"" << num(py(yv)) << "\" x2=\"" << margin
          << "\" y2=\"" << num(py(yv)) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        f << "<text x=\"" << margin - 9 << "\" y=\"" << num(py(yv) + 4)
          << "\" font-size=\"11\" text-anchor=\"end\">" << num(yv) << "</text>\n";
    }

    for (const auto& s : series) {
        if (s.points_only) {
            for (const Vec2& p : s.pts)
                f << "<circle cx=\"" << num(px(p.x)) << "\" cy=\"" << num(py(p.y))
                  << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
            continue;
        }
        f << "<polyline fill=\"none\" stroke=\"" << s.color
          << "\" stroke-width=\"1.2\" points=\"";
        for (const Vec2& p : s.pts) f << num(px(p.x)) << ',' << num(py(p.y)) << ' ';
        f << "\"/>\n";
    }
    f << "</svg>\n";
    file.commit();
}

} // namespace plab::io
