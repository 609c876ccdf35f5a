#pragma once

// Detuning-grid sweeps, deterministic CSV emission and a self-contained SVG
// heatmap writer.

#include <cmath>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cavcool/format.hpp"
#include "cavcool/params.hpp"
#include "cavcool/rates.hpp"

namespace cavcool {

struct SweepSpec {
    double dc_min = -5.0, dc_max = 5.0, dc_step = 0.05;
    double dl_min = -10.0, dl_max = 60.0, dl_step = 0.35;
    SystemParams params;
    std::size_t max_points = 1000000;
};

inline std::vector<double> grid_values(double lo, double hi, double step) {
    if (!(step > 0.0)) throw std::domain_error("grid step must be > 0");
    if (!(hi >= lo)) throw std::domain_error("grid range is empty");
    const std::size_t count = std::size_t(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = lo + double(i) * step;
    return v;
}

struct SweepRecord {
    double delta_c = 0.0;
    double delta = 0.0;
    double a_plus = 0.0;
    double a_minus = 0.0;
    std::optional<double> nbar;  // empty in heating/marginal cells
    double w = 0.0;
    Regime regime = Regime::marginal;
};

inline void check_spec(const SweepSpec& spec) {
    const auto dcs = grid_values(spec.dc_min, spec.dc_max, spec.dc_step);
    const auto dls = grid_values(spec.dl_min, spec.dl_max, spec.dl_step);
    if (dcs.size() * dls.size() > spec.max_points)
        throw std::domain_error("sweep grid exceeds the configured maximum point count");
}

// Row order: delta_c outer, delta inner.
inline std::vector<SweepRecord> run_sweep(const SweepSpec& spec) {
    check_spec(spec);
    const auto dcs = grid_values(spec.dc_min, spec.dc_max, spec.dc_step);
    const auto dls = grid_values(spec.dl_min, spec.dl_max, spec.dl_step);
    std::vector<SweepRecord> out;
    out.reserve(dcs.size() * dls.size());
    SystemParams p = spec.params;
    for (double dc : dcs) {
        for (double dl : dls) {
            p.delta_c = dc;
            p.delta = dl;
            const RateResult r = rates(p);
            SweepRecord rec;
            rec.delta_c = dc;
            rec.delta = dl;
            rec.a_plus = r.a_plus;
            rec.a_minus = r.a_minus;
            rec.nbar = r.nbar_ss;
            rec.w = r.w;
            rec.regime = r.regime;
            out.push_back(rec);
        }
    }
    return out;
}

inline const char* sweep_csv_header = "delta_c,delta,a_plus,a_minus,nbar,w,regime";

inline void write_sweep_csv(const std::vector<SweepRecord>& records, std::ostream& os) {
    os << sweep_csv_header << '\n';
    for (const SweepRecord& r : records) {
        os << format_g17(r.delta_c) << ',' << format_g17(r.delta) << ','
           << format_g17(r.a_plus) << ',' << format_g17(r.a_minus) << ',';
        if (r.nbar) os << format_g17(*r.nbar);
        os << ',' << format_g17(r.w) << ',' << regime_name(r.regime) << '\n';
    }
}

inline std::vector<SweepRecord> parse_sweep_csv(std::istream& is) {
    std::vector<SweepRecord> out;
    std::string line;
    if (!std::getline(is, line) || line != sweep_csv_header)
        throw std::domain_error("sweep CSV: unexpected header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cell;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cell.push_back(c);
        if (line.back() == ',') cell.push_back("");
        if (cell.size() != 7) throw std::domain_error("sweep CSV: malformed row");
        SweepRecord r;
        r.delta_c = std::strtod(cell[0].c_str(), nullptr);
        r.delta = std::strtod(cell[1].c_str(), nullptr);
        r.a_plus = std::strtod(cell[2].c_str(), nullptr);
        r.a_minus = std::strtod(cell[3].c_str(), nullptr);
        if (!cell[4].empty()) r.nbar = std::strtod(cell[4].c_str(), nullptr);
        r.w = std::strtod(cell[5].c_str(), nullptr);
        if (cell[6] == "cooling") r.regime = Regime::cooling;
        else if (cell[6] == "heating") r.regime = Regime::heating;
        else if (cell[6] == "marginal") r.regime = Regime::marginal;
        else throw std::domain_error("sweep CSV: unknown regime '" + cell[6] + "'");
        out.push_back(r);
    }
    return out;
}

// Optimal-curve records: the rates evaluated along Delta_opt(delta_c).
struct OptCurveRecord {
    double delta_c = 0.0;
    bool singular = false;
    double delta_opt = std::numeric_limits<double>::quiet_NaN();
    std::optional<RateResult> rates;
};

inline std::vector<OptCurveRecord> run_opt_curve(const std::vector<double>& dc_grid,
                                                 const SystemParams& params) {
    std::vector<OptCurveRecord> out;
    out.reserve(dc_grid.size());
    SystemParams p = params;
    for (const OptCurvePoint& pt : opt_curve(dc_grid, params)) {
        OptCurveRecord rec;
        rec.delta_c = pt.delta_c;
        rec.singular = pt.singular;
        if (!pt.singular) {
            rec.delta_opt = pt.delta;
            p.delta_c = pt.delta_c;
            p.delta = pt.delta;
            rec.rates = rates(p);
        }
        out.push_back(rec);
    }
    return out;
}

inline const char* opt_curve_csv_header = "delta_c,delta_opt,nbar,w,regime";

inline void write_opt_curve_csv(const std::vector<OptCurveRecord>& records, std::ostream& os) {
    os << opt_curve_csv_header << '\n';
    for (const OptCurveRecord& r : records) {
        os << format_g17(r.delta_c) << ',';
        if (!r.singular) os << format_g17(r.delta_opt);
        os << ',';
        if (r.rates && r.rates->nbar_ss) os << format_g17(*r.rates->nbar_ss);
        os << ',';
        if (r.rates) os << format_g17(r.rates->w);
        os << ',';
        os << (r.singular ? "singular" : regime_name(r.rates->regime)) << '\n';
    }
}

namespace detail {

inline std::string ramp_color(double t) {
    // dark blue -> teal -> light yellow
    t = std::clamp(t, 0.0, 1.0);
    auto lerp = [](double a, double b, double u) { return a + (b - a) * u; };
    double r, g, b;
    if (t < 0.5) {
        const double u = t / 0.5;
        r = lerp(13, 32, u); g = lerp(8, 144, u); b = lerp(84, 140, u);
    } else {
        const double u = (t - 0.5) / 0.5;
        r = lerp(32, 252, u); g = lerp(144, 244, u); b = lerp(140, 160, u);
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", int(r), int(g), int(b));
    return buf;
}

}  // namespace detail

// Log-color heatmap of nbar over the sweep grid; heating/marginal cells are
// left gray (uncoded). x axis: delta, y axis: delta_c (increasing upward).
inline void write_heatmap_svg(const std::vector<SweepRecord>& records, const SweepSpec& spec,
                              std::ostream& os) {
    const auto dcs = grid_values(spec.dc_min, spec.dc_max, spec.dc_step);
    const auto dls = grid_values(spec.dl_min, spec.dl_max, spec.dl_step);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& r : records)
        if (r.nbar && *r.nbar > 0.0) {
            lo = std::min(lo, *r.nbar);
            hi = std::max(hi, *r.nbar);
        }
    if (!(lo < hi)) { lo = 1e-6; hi = 1.0; }
    const double llo = std::log10(lo), lhi = std::log10(hi);
    const double cell = 4.0, margin = 40.0;
    const double wpx = margin * 2 + cell * double(dls.size());
    const double hpx = margin * 2 + cell * double(dcs.size());
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << wpx << "\" height=\"" << hpx
       << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < dcs.size(); ++i) {
        for (std::size_t j = 0; j < dls.size(); ++j) {
            const SweepRecord& r = records[i * dls.size() + j];
            std::string color = "#d8d8d8";
            if (r.nbar && *r.nbar > 0.0)
                color = detail::ramp_color(1.0 - (std::log10(*r.nbar) - llo) / (lhi - llo));
            const double x = margin + cell * double(j);
            const double y = margin + cell * double(dcs.size() - 1 - i);
            os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell
               << "\" height=\"" << cell << "\" fill=\"" << color << "\"/>\n";
        }
    }
    os << "<text x=\"" << margin << "\" y=\"" << margin - 14
       << "\" font-size=\"12\">steady-state phonon number, log color: [" << format_g17(lo)
       << ", " << format_g17(hi) << "]; gray = heating</text>\n";
    os << "<text x=\"" << wpx / 2 << "\" y=\"" << hpx - 8 << "\" font-size=\"12\">delta in ["
       << spec.dl_min << ", " << spec.dl_max << "]</text>\n";
    os << "<text x=\"8\" y=\"" << hpx / 2 << "\" font-size=\"12\" transform=\"rotate(-90 12 "
       << hpx / 2 << ")\">delta_c in [" << spec.dc_min << ", " << spec.dc_max << "]</text>\n";
    os << "</svg>\n";
}

}  // namespace cavcool
