#include "thermoscope/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "thermoscope/errors.hpp"

namespace thermoscope {

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);  // binary keeps line endings stable
    if (!out) throw DatasetLoadError("report: cannot open " + path.string() + " for writing");
    return out;
}

}  // namespace

void write_sweep_csv(const SweepResult& result, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "n_pts,n_rx,fold,rmse_c\n";
    for (const auto& cell : result.cells) {
        for (std::size_t f = 0; f < cell.fold_rmse_c.size(); ++f) {
            out << cell.n_pts << ',' << cell.n_rx << ',' << f << ','
                << format_double(cell.fold_rmse_c[f]) << '\n';
        }
    }
}

void write_sweep_summary_csv(const SweepResult& result, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "n_pts,n_rx,mean_rmse_c,std_rmse_c\n";
    for (const auto& cell : result.cells) {
        out << cell.n_pts << ',' << cell.n_rx << ',' << format_double(cell.mean_rmse_c) << ','
            << format_double(cell.std_rmse_c) << '\n';
    }
}

void write_sweep_svg(const SweepResult& result, const std::filesystem::path& path) {
    constexpr int kW = 640, kH = 420;
    constexpr int kL = 70, kR = 150, kT = 30, kB = 50;
    const int plot_w = kW - kL - kR;
    const int plot_h = kH - kT - kB;

    std::map<int, std::vector<const SweepCell*>> by_rx;
    double x_min = 1e300, x_max = -1e300, y_max = 0.0;
    for (const auto& cell : result.cells) {
        by_rx[cell.n_rx].push_back(&cell);
        x_min = std::min(x_min, static_cast<double>(cell.n_pts));
        x_max = std::max(x_max, static_cast<double>(cell.n_pts));
        y_max = std::max(y_max, cell.mean_rmse_c + cell.std_rmse_c);
    }
    if (by_rx.empty()) throw std::invalid_argument("write_sweep_svg: empty sweep result");
    if (x_max <= x_min) x_max = x_min + 1.0;
    y_max = y_max > 0.0 ? 1.1 * y_max : 1.0;

    auto px = [&](double n_pts) {
        return kL + plot_w * (n_pts - x_min) / (x_max - x_min);
    };
    auto py = [&](double rmse) { return kT + plot_h * (1.0 - rmse / y_max); };

    static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2"};

    std::ofstream out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n";
    out << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";

    // axes
    out << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kT + plot_h
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kL << "\" y1=\"" << kT + plot_h << "\" x2=\"" << kL + plot_w
        << "\" y2=\"" << kT + plot_h << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kL + plot_w / 2 << "\" y=\"" << kH - 12
        << "\" text-anchor=\"middle\" font-size=\"14\">N_pts</text>\n";
    out << "<text x=\"18\" y=\"" << kT + plot_h / 2
        << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 "
        << kT + plot_h / 2 << ")\">mean RMSE (C)</text>\n";

    // y ticks
    for (int i = 0; i <= 5; ++i) {
        const double v = y_max * i / 5.0;
        out << "<line x1=\"" << kL - 4 << "\" y1=\"" << py(v) << "\" x2=\"" << kL << "\" y2=\""
            << py(v) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << kL - 8 << "\" y=\"" << py(v) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << format_double(std::round(v * 10) / 10)
            << "</text>\n";
    }

    int color = 0;
    int legend_y = kT + 10;
    for (auto& [n_rx, cells] : by_rx) {
        auto sorted = cells;
        std::sort(sorted.begin(), sorted.end(),
                  [](const SweepCell* a, const SweepCell* b) { return a->n_pts < b->n_pts; });
        const char* stroke = kColors[color % 7];

        // std-dev band
        std::ostringstream band;
        for (const auto* c : sorted) {
            band << px(c->n_pts) << ',' << py(c->mean_rmse_c + c->std_rmse_c) << ' ';
        }
        for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
            band << px((*it)->n_pts) << ',' << py(std::max(0.0, (*it)->mean_rmse_c - (*it)->std_rmse_c))
                 << ' ';
        }
        out << "<polygon points=\"" << band.str() << "\" fill=\"" << stroke
            << "\" opacity=\"0.15\" stroke=\"none\"/>\n";

        out << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"2\" points=\"";
        for (const auto* c : sorted) out << px(c->n_pts) << ',' << py(c->mean_rmse_c) << ' ';
        out << "\"/>\n";
        for (const auto* c : sorted) {
            out << "<circle cx=\"" << px(c->n_pts) << "\" cy=\"" << py(c->mean_rmse_c)
                << "\" r=\"3\" fill=\"" << stroke << "\"/>\n";
        }

        out << "<line x1=\"" << kL + plot_w + 12 << "\" y1=\"" << legend_y << "\" x2=\""
            << kL + plot_w + 36 << "\" y2=\"" << legend_y << "\" stroke=\"" << stroke
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << kL + plot_w + 42 << "\" y=\"" << legend_y + 4
            << "\" font-size=\"12\">N_rx = " << n_rx << "</text>\n";
        legend_y += 20;
        ++color;
    }
    out << "</svg>\n";
}

void write_loss_csv(const TrainResult& result, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "epoch,train_mse,val_mse\n";
    for (std::size_t e = 0; e < result.history.size(); ++e) {
        out << e << ',' << format_double(result.history[e].train_mse) << ','
            << format_double(result.history[e].val_mse) << '\n';
    }
}

void write_eval_csv(const std::vector<EvalRow>& rows, int n_pts,
                    const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "run,tx,step";
    for (int i = 0; i < n_pts; ++i) out << ",pred_" << i;
    for (int i = 0; i < n_pts; ++i) out << ",true_" << i;
    out << '\n';
    for (const auto& row : rows) {
        out << row.run_id << ',' << row.tx_index << ',' << row.step;
        for (double v : row.predicted_c) out << ',' << format_double(v);
        for (double v : row.true_c) out << ',' << format_double(v);
        out << '\n';
    }
}

SweepResult read_sweep_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DatasetLoadError("report: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("n_pts,n_rx,fold,rmse_c", 0) != 0) {
        throw DatasetLoadError("report: " + path.string() + " is not a sweep CSV");
    }

    std::map<std::pair<int, int>, SweepCell> cells;
    int max_fold = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        int vals[3] = {};
        for (int i = 0; i < 3; ++i) {
            if (!std::getline(ss, tok, ',')) throw DatasetLoadError("report: bad row in " + path.string());
            vals[i] = std::stoi(tok);
        }
        if (!std::getline(ss, tok, ',')) throw DatasetLoadError("report: bad row in " + path.string());
        const double r = std::stod(tok);

        auto& cell = cells[{vals[0], vals[1]}];
        cell.n_pts = vals[0];
        cell.n_rx = vals[1];
        if (static_cast<int>(cell.fold_rmse_c.size()) != vals[2]) {
            throw DatasetLoadError("report: non-contiguous fold indices in " + path.string());
        }
        cell.fold_rmse_c.push_back(r);
        max_fold = std::max(max_fold, vals[2]);
    }

    SweepResult result;
    result.n_folds = max_fold + 1;
    for (auto& [key, cell] : cells) {
        double mean = 0.0;
        for (double v : cell.fold_rmse_c) mean += v;
        mean /= static_cast<double>(cell.fold_rmse_c.size());
        double var = 0.0;
        for (double v : cell.fold_rmse_c) var += (v - mean) * (v - mean);
        cell.mean_rmse_c = mean;
        cell.std_rmse_c = cell.fold_rmse_c.size() > 1
                              ? std::sqrt(var / static_cast<double>(cell.fold_rmse_c.size() - 1))
                              : 0.0;
        result.cells.push_back(cell);
    }
    return result;
}

}  // namespace thermoscope
