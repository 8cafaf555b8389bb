#include "swarmfield/plots.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace swarmfield {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 480;
constexpr int kMargin = 60;

class SvgPlot {
public:
    SvgPlot(std::string title, std::string x_label, std::string y_label)
        : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

    void set_range(Scalar x0, Scalar x1, Scalar y0, Scalar y1) {
        if (x1 - x0 < 1e-12) x1 = x0 + 1.0;
        if (y1 - y0 < 1e-12) { y0 -= 0.5; y1 += 0.5; }
        x0_ = x0; x1_ = x1; y0_ = y0; y1_ = y1;
    }

    Scalar px(Scalar x) const { return kMargin + (x - x0_) / (x1_ - x0_) * (kWidth - 2 * kMargin); }
    Scalar py(Scalar y) const { return kHeight - kMargin - (y - y0_) / (y1_ - y0_) * (kHeight - 2 * kMargin); }

    void polyline(const std::vector<Scalar>& xs, const std::vector<Scalar>& ys,
                  const char* color) {
        body_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i) body_ << px(xs[i]) << ',' << py(ys[i]) << ' ';
        body_ << "\"/>\n";
    }

    void hline(Scalar y, const char* color, const std::string& label) {
        body_ << "<line x1=\"" << px(x0_) << "\" y1=\"" << py(y) << "\" x2=\"" << px(x1_)
              << "\" y2=\"" << py(y) << "\" stroke=\"" << color
              << "\" stroke-dasharray=\"6,4\" stroke-width=\"1.2\"/>\n";
        body_ << "<text x=\"" << px(x1_) - 4 << "\" y=\"" << py(y) - 5
              << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">" << label
              << "</text>\n";
    }

    void point(Scalar x, Scalar y, const char* color, Scalar r = 3.5) {
        body_ << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"" << r
              << "\" fill=\"" << color << "\"/>\n";
    }

    void marker(Scalar x, Scalar y, const char* color, char shape) {
        const Scalar cx = px(x), cy = py(y), r = 4.0;
        if (shape == 's') {
            body_ << "<rect x=\"" << cx - r << "\" y=\"" << cy - r << "\" width=\"" << 2 * r
                  << "\" height=\"" << 2 * r << "\" fill=\"none\" stroke=\"" << color
                  << "\" stroke-width=\"1.3\"/>\n";
        } else if (shape == 'x') {
            body_ << "<path d=\"M" << cx - r << ' ' << cy - r << " L" << cx + r << ' ' << cy + r
                  << " M" << cx - r << ' ' << cy + r << " L" << cx + r << ' ' << cy - r
                  << "\" stroke=\"" << color << "\" stroke-width=\"1.3\"/>\n";
        } else {
            point(x, y, color);
        }
    }

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
            << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\""
            << kWidth - 2 * kMargin << "\" height=\"" << kHeight - 2 * kMargin
            << "\" fill=\"none\" stroke=\"black\"/>\n";
        out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kMargin - 20
            << "\" text-anchor=\"middle\" font-size=\"15\">" << title_ << "</text>\n";
        out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 15
            << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label_ << "</text>\n";
        out << "<text x=\"18\" y=\"" << kHeight / 2
            << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
            << kHeight / 2 << ")\">" << y_label_ << "</text>\n";
        // axis ticks
        for (int k = 0; k <= 5; ++k) {
            const Scalar xv = x0_ + (x1_ - x0_) * k / 5.0;
            const Scalar yv = y0_ + (y1_ - y0_) * k / 5.0;
            out << "<text x=\"" << px(xv) << "\" y=\"" << kHeight - kMargin + 18
                << "\" text-anchor=\"middle\" font-size=\"11\">" << format(xv) << "</text>\n";
            out << "<text x=\"" << kMargin - 6 << "\" y=\"" << py(yv) + 4
                << "\" text-anchor=\"end\" font-size=\"11\">" << format(yv) << "</text>\n";
        }
        out << body_.str() << "</svg>\n";
    }

private:
    static std::string format(Scalar v) {
        std::ostringstream os;
        os.precision(4);
        os << v;
        return os.str();
    }

    std::string title_, x_label_, y_label_;
    Scalar x0_{0}, x1_{1}, y0_{0}, y1_{1};
    std::ostringstream body_;
};

const char* agent_color(int i) {
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return palette[i % 10];
}

}  // namespace

std::vector<std::filesystem::path> emit_plots(const RunTrace& trace, const RunSummary& summary,
                                              const ScenarioConfig& config,
                                              const std::filesystem::path& out_dir) {
    std::vector<std::filesystem::path> written;
    const int n = static_cast<int>(config.agents.size());

    {
        SvgPlot plot("Smallest pairwise distance", "t [s]", "min distance [m]");
        std::vector<Scalar> ts, ds;
        for (const StepRecord& s : trace.steps) {
            if (s.agents.size() < 2) break;
            ts.push_back(s.t);
            ds.push_back(s.min_pair_dist);
        }
        if (!ds.empty()) {
            const Scalar dmax = *std::max_element(ds.begin(), ds.end());
            plot.set_range(0.0, ts.back(), 0.0, std::max(dmax, config.d_m * 1.2));
            plot.polyline(ts, ds, "#1f77b4");
        } else {
            plot.set_range(0.0, 1.0, 0.0, config.d_m * 1.2);
        }
        plot.hline(config.d_m, "#d62728", "d_m");
        const auto path = out_dir / "min_pairwise_distance.svg";
        plot.save(path);
        written.push_back(path);
    }

    {
        SvgPlot plot("Final distance from goal", "agent id", "distance [m]");
        Scalar dmax = summary.eps_f;
        for (Scalar d : summary.final_goal_dist) dmax = std::max(dmax, d);
        plot.set_range(-0.5, n - 0.5, 0.0, dmax * 1.2);
        for (int i = 0; i < n; ++i) plot.point(i, summary.final_goal_dist[i], agent_color(i));
        plot.hline(summary.eps_f, "#d62728", "eps_f");
        const auto path = out_dir / "final_goal_distance.svg";
        plot.save(path);
        written.push_back(path);
    }

    {
        SvgPlot plot("Final headings vs anti-wind direction", "agent id", "heading [rad]");
        plot.set_range(-0.5, n - 0.5, -kPi, kPi);
        for (int i = 0; i < n; ++i) plot.point(i, summary.final_heading[i], agent_color(i));
        plot.hline(summary.wind_opposite_heading, "#d62728", "angle(-w)");
        const auto path = out_dir / "final_headings.svg";
        plot.save(path);
        written.push_back(path);
    }

    {
        SvgPlot plot("Trajectories (square: start, x: goal, dot: final)", "x [m]", "y [m]");
        Scalar lo = 0.0, hi = 0.0;
        for (const AgentSpec& a : config.agents) {
            lo = std::min({lo, a.initial.position.minCoeff(), a.params.goal.minCoeff()});
            hi = std::max({hi, a.initial.position.maxCoeff(), a.params.goal.maxCoeff()});
        }
        plot.set_range(lo * 1.1, hi * 1.1, lo * 1.1, hi * 1.1);
        for (int i = 0; i < n; ++i) {
            std::vector<Scalar> xs, ys;
            for (const StepRecord& s : trace.steps) {
                xs.push_back(s.agents[i].true_state.x());
                ys.push_back(s.agents[i].true_state.y());
            }
            plot.polyline(xs, ys, agent_color(i));
            plot.marker(config.agents[i].initial.position.x(),
                        config.agents[i].initial.position.y(), agent_color(i), 's');
            plot.marker(config.agents[i].params.goal.x(), config.agents[i].params.goal.y(),
                        agent_color(i), 'x');
            if (!xs.empty()) plot.point(xs.back(), ys.back(), agent_color(i), 2.5);
        }
        const auto path = out_dir / "trajectories.svg";
        plot.save(path);
        written.push_back(path);
    }

    return written;
}

}  // namespace swarmfield
