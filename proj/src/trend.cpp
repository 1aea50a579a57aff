#include "semdrift/trend.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "semdrift/cluster.hpp"
#include "semdrift/kernels.hpp"
#include "semdrift/preprocess.hpp"

namespace semdrift::trend {

namespace {

constexpr std::array<const char*, 8> kPalette = {
    "#c0392b", "#27ae60", "#2980b9", "#e67e22", "#8e44ad", "#16a085", "#d35400", "#2c3e50"};

std::string fmt(double v, const char* spec = "%.2f") {
    char buf[32];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::string cell_text(const TrendCell& cell) {
    if (!cell.value) return "0.0";  // display convention for absent terms
    return fmt(*cell.value, "%.3f");
}

void require_writable(const std::ofstream& out, const std::filesystem::path& path) {
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
}

// --- small symmetric eigensolver (cyclic Jacobi) ----------------------------

struct EigenResult {
    std::vector<double> values;   // descending
    std::vector<double> vectors;  // column j of the n x n matrix = eigenvector j
    int n = 0;
};

EigenResult symmetric_eigen(std::vector<double> a, int n) {
    std::vector<double> v(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] = 1.0;
    const auto at = [&](std::vector<double>& m, int r, int c) -> double& {
        return m[static_cast<std::size_t>(r) * static_cast<std::size_t>(n) + static_cast<std::size_t>(c)];
    };

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += at(a, p, q) * at(a, p, q);
        if (off < 1e-24) break;

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(a, p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (at(a, q, q) - at(a, p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double aip = at(a, i, p), aiq = at(a, i, q);
                    at(a, i, p) = c * aip - s * aiq;
                    at(a, i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    const double api = at(a, p, i), aqi = at(a, q, i);
                    at(a, p, i) = c * api - s * aqi;
                    at(a, q, i) = s * api + c * aqi;
                }
                for (int i = 0; i < n; ++i) {
                    const double vip = at(v, i, p), viq = at(v, i, q);
                    at(v, i, p) = c * vip - s * viq;
                    at(v, i, q) = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        const double lx = at(a, x, x), ly = at(a, y, y);
        if (lx != ly) return lx > ly;
        return x < y;
    });

    EigenResult res;
    res.n = n;
    res.values.resize(static_cast<std::size_t>(n));
    res.vectors.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        res.values[static_cast<std::size_t>(j)] = at(a, order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(j)]);
        for (int i = 0; i < n; ++i) {
            res.vectors[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)] =
                at(v, i, order[static_cast<std::size_t>(j)]);
        }
    }
    return res;
}

}  // namespace

std::string trend_mode_name(TrendMode m) {
    return m == TrendMode::word_pair ? "word_pair" : "centroid_pair";
}

std::optional<TrendMode> parse_trend_mode(std::string_view name) {
    if (name == "word_pair") return TrendMode::word_pair;
    if (name == "centroid_pair") return TrendMode::centroid_pair;
    return std::nullopt;
}

const char* cell_flag_name(CellFlag f) {
    switch (f) {
        case CellFlag::none: return "none";
        case CellFlag::max: return "max";
        case CellFlag::min: return "min";
        case CellFlag::missing: return "missing";
    }
    return "?";
}

std::vector<TrendCell> annotate_extrema(std::vector<TrendCell> row) {
    int present = 0;
    for (auto& cell : row) {
        cell.flag = cell.value ? CellFlag::none : CellFlag::missing;
        if (cell.value) ++present;
    }
    if (present < 2) return row;

    int max_idx = -1;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (!row[i].value) continue;
        if (max_idx < 0 || *row[i].value > *row[static_cast<std::size_t>(max_idx)].value) {
            max_idx = static_cast<int>(i);
        }
    }
    int min_idx = -1;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (!row[i].value || static_cast<int>(i) == max_idx) continue;
        if (min_idx < 0 || *row[i].value < *row[static_cast<std::size_t>(min_idx)].value) {
            min_idx = static_cast<int>(i);
        }
    }
    row[static_cast<std::size_t>(max_idx)].flag = CellFlag::max;
    row[static_cast<std::size_t>(min_idx)].flag = CellFlag::min;
    return row;
}

TrendTable compute_trend(const std::map<std::string, embedding::EmbeddingModel>& models,
                         const TrendQuery& query) {
    if (query.relative_terms.empty()) throw std::invalid_argument("trend query needs at least one relative term");
    if (query.slice_labels.empty()) throw std::invalid_argument("trend query needs at least one slice label");

    TrendTable table;
    table.query = query;
    table.query.base_term = preprocess::normalize_term(query.base_term);
    for (auto& term : table.query.relative_terms) term = preprocess::normalize_term(term);

    std::vector<const embedding::EmbeddingModel*> slice_models;
    for (const auto& label : table.query.slice_labels) {
        const auto it = models.find(label);
        if (it == models.end()) throw std::runtime_error("no model for slice label: " + label);
        slice_models.push_back(&it->second);
    }

    const std::string& base = table.query.base_term;
    const bool base_anywhere =
        std::any_of(slice_models.begin(), slice_models.end(),
                    [&](const embedding::EmbeddingModel* m) { return m->vocab.contains(base); });
    if (!base_anywhere) {
        throw DegenerateQueryError("base term '" + base + "' absent from every requested model");
    }

    for (const auto& term : table.query.relative_terms) {
        TrendRow row;
        row.term = term;
        row.cells.reserve(slice_models.size());
        for (const embedding::EmbeddingModel* model : slice_models) {
            TrendCell cell;
            if (query.mode == TrendMode::word_pair) {
                if (const auto d = embedding::pair_distance(*model, base, term)) cell.value = *d;
            } else {
                if (model->vocab.contains(base) && model->vocab.contains(term)) {
                    const auto base_topic = cluster::topic_cluster(*model, base);
                    const auto term_topic = cluster::topic_cluster(*model, term);
                    const double c = embedding::cosine_similarity(base_topic.centroid_of_topic,
                                                                  term_topic.centroid_of_topic);
                    cell.value = std::clamp((1.0 - c) / 2.0, 0.0, 1.0);
                }
            }
            row.cells.push_back(cell);
        }
        row.cells = annotate_extrema(std::move(row.cells));
        table.rows.push_back(std::move(row));
    }
    return table;
}

void export_table_csv(const TrendTable& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    require_writable(out, path);
    if (!table.provenance.empty()) out << "# config_hash=" << table.provenance << '\n';
    out << "term";
    for (const auto& label : table.query.slice_labels) out << ',' << label;
    out << '\n';
    for (const auto& row : table.rows) {
        out << row.term;
        for (const auto& cell : row.cells) out << ',' << cell_text(cell);
        out << '\n';
        out << row.term << "#flags";
        for (const auto& cell : row.cells) out << ',' << cell_flag_name(cell.flag);
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void export_table_json(const TrendTable& table, const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["base_term"] = table.query.base_term;
    doc["mode"] = trend_mode_name(table.query.mode);
    doc["slice_labels"] = table.query.slice_labels;
    if (!table.provenance.empty()) doc["config_hash"] = table.provenance;
    doc["rows"] = nlohmann::json::array();
    for (const auto& row : table.rows) {
        nlohmann::json jrow;
        jrow["term"] = row.term;
        auto values = nlohmann::json::array();
        auto flags = nlohmann::json::array();
        for (const auto& cell : row.cells) {
            if (cell.value) values.push_back(*cell.value);
            else values.push_back(nullptr);
            flags.push_back(cell_flag_name(cell.flag));
        }
        jrow["values"] = std::move(values);
        jrow["flags"] = std::move(flags);
        doc["rows"].push_back(std::move(jrow));
    }
    std::ofstream out(path);
    require_writable(out, path);
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void export_plot_svg(const TrendTable& table, const std::filesystem::path& path) {
    const std::size_t n = table.query.slice_labels.size();
    if (n < 2) throw std::invalid_argument("trend plot needs at least 2 slice labels");

    constexpr double kWidth = 860.0, kHeight = 470.0;
    constexpr double kLeft = 80.0, kRight = 630.0, kTop = 30.0, kBottom = 400.0;
    const auto x_at = [&](std::size_t i) {
        return kLeft + (kRight - kLeft) * static_cast<double>(i) / static_cast<double>(n - 1);
    };
    const auto y_at = [&](double v) { return kBottom - (kBottom - kTop) * v; };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    if (!table.provenance.empty()) svg << "<!-- config_hash=" << table.provenance << " -->\n";
    svg << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";

    // horizontal grid + y tick labels
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = 0.25 * tick;
        const double y = y_at(v);
        svg << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(kRight)
            << "\" y2=\"" << fmt(y) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << fmt(kLeft - 10.0) << "\" y=\"" << fmt(y + 4.0)
            << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" << fmt(v)
            << "</text>\n";
    }
    // x tick labels
    for (std::size_t i = 0; i < n; ++i) {
        svg << "<text x=\"" << fmt(x_at(i)) << "\" y=\"" << fmt(kBottom + 20.0)
            << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
            << table.query.slice_labels[i] << "</text>\n";
    }
    // axes
    svg << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(kLeft)
        << "\" y2=\"" << fmt(kBottom) << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    svg << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kBottom) << "\" x2=\"" << fmt(kRight)
        << "\" y2=\"" << fmt(kBottom) << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    svg << "<text x=\"" << fmt((kLeft + kRight) / 2.0) << "\" y=\"" << fmt(kBottom + 45.0)
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">time slice"
           "</text>\n";
    svg << "<text x=\"20\" y=\"" << fmt((kTop + kBottom) / 2.0)
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
        << fmt((kTop + kBottom) / 2.0)
        << ")\">pair distance (0 = interchangeable, 1 = unrelated)</text>\n";

    // one polyline per contiguous run of present cells; lone points as circles
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const char* color = kPalette[r % kPalette.size()];
        std::size_t i = 0;
        while (i < row.cells.size()) {
            if (!row.cells[i].value) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j + 1 < row.cells.size() && row.cells[j + 1].value) ++j;
            if (j == i) {
                svg << "<circle cx=\"" << fmt(x_at(i)) << "\" cy=\"" << fmt(y_at(*row.cells[i].value))
                    << "\" r=\"3\" fill=\"" << color << "\"/>\n";
            } else {
                svg << "<polyline fill=\"none\" stroke=\"" << color
                    << "\" stroke-width=\"2\" points=\"";
                for (std::size_t p = i; p <= j; ++p) {
                    if (p > i) svg << ' ';
                    svg << fmt(x_at(p)) << ',' << fmt(y_at(*row.cells[p].value));
                }
                svg << "\"/>\n";
            }
            i = j + 1;
        }
    }

    // legend
    const std::string base = table.query.base_term;
    svg << "<text x=\"" << fmt(kRight + 20.0) << "\" y=\"" << fmt(kTop + 10.0)
        << "\" font-family=\"sans-serif\" font-size=\"13\" font-weight=\"bold\">base: " << base
        << "</text>\n";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const double y = kTop + 35.0 + 22.0 * static_cast<double>(r);
        const char* color = kPalette[r % kPalette.size()];
        svg << "<line x1=\"" << fmt(kRight + 20.0) << "\" y1=\"" << fmt(y - 4.0) << "\" x2=\""
            << fmt(kRight + 50.0) << "\" y2=\"" << fmt(y - 4.0) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << fmt(kRight + 58.0) << "\" y=\"" << fmt(y)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << table.rows[r].term
            << "</text>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    require_writable(out, path);
    out << svg.str();
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<ProjectedTerm> project_terms(const embedding::EmbeddingModel& model,
                                         const std::vector<std::string>& terms) {
    std::vector<std::string> present;
    for (const auto& term : terms) {
        const std::string norm = preprocess::normalize_term(term);
        if (model.vocab.contains(norm) &&
            std::find(present.begin(), present.end(), norm) == present.end()) {
            present.push_back(norm);
        }
    }
    const int n = static_cast<int>(present.size());
    if (n < 2) throw std::runtime_error("projection needs at least 2 terms present in the model");
    const int d = model.dim();

    // center the selected vectors
    std::vector<double> centered(static_cast<std::size_t>(n) * static_cast<std::size_t>(d), 0.0);
    std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < n; ++i) {
        kernels::axpy(1.0, model.input_row(model.vocab.id(present[static_cast<std::size_t>(i)])).data(),
                      mean.data(), static_cast<std::size_t>(d));
    }
    kernels::scale(mean.data(), 1.0 / n, static_cast<std::size_t>(d));
    for (int i = 0; i < n; ++i) {
        double* row = centered.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(d);
        std::copy_n(model.input_row(model.vocab.id(present[static_cast<std::size_t>(i)])).data(), d, row);
        kernels::axpy(-1.0, mean.data(), row, static_cast<std::size_t>(d));
    }

    // top-2 PCs from the n x n Gram matrix of the centered rows
    std::vector<double> gram(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            gram[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)] =
                kernels::dot(centered.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(d),
                             centered.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(d),
                             static_cast<std::size_t>(d));
        }
    }
    const EigenResult eig = symmetric_eigen(gram, n);

    std::vector<ProjectedTerm> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)].term = present[static_cast<std::size_t>(i)];

    const double scale_ref = std::max(eig.values.empty() ? 0.0 : eig.values[0], 1.0);
    for (int comp = 0; comp < 2 && comp < n; ++comp) {
        const double lambda = eig.values[static_cast<std::size_t>(comp)];
        if (lambda <= 1e-12 * scale_ref) continue;  // degenerate direction; scores stay 0
        const double root = std::sqrt(lambda);
        // loading = X^T w / sqrt(lambda); sign fixed so its largest-|.| entry is positive
        std::vector<double> loading(static_cast<std::size_t>(d), 0.0);
        for (int i = 0; i < n; ++i) {
            const double w = eig.vectors[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                                         static_cast<std::size_t>(comp)];
            kernels::axpy(w / root,
                          centered.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(d),
                          loading.data(), static_cast<std::size_t>(d));
        }
        int arg = 0;
        for (int j = 1; j < d; ++j) {
            if (std::abs(loading[static_cast<std::size_t>(j)]) > std::abs(loading[static_cast<std::size_t>(arg)])) arg = j;
        }
        const double sign = loading[static_cast<std::size_t>(arg)] < 0.0 ? -1.0 : 1.0;
        for (int i = 0; i < n; ++i) {
            const double score = sign * root *
                                 eig.vectors[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                                             static_cast<std::size_t>(comp)];
            if (comp == 0) out[static_cast<std::size_t>(i)].x = score;
            else out[static_cast<std::size_t>(i)].y = score;
        }
    }
    return out;
}

void export_projection_svg(const embedding::EmbeddingModel& model,
                           const std::vector<std::string>& terms,
                           const std::filesystem::path& path, const std::string& provenance) {
    const auto projected = project_terms(model, terms);

    constexpr double kWidth = 560.0, kHeight = 560.0;
    constexpr double kPad = 70.0;
    double min_x = projected[0].x, max_x = projected[0].x;
    double min_y = projected[0].y, max_y = projected[0].y;
    for (const auto& p : projected) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const double span_x = std::max(max_x - min_x, 1e-9);
    const double span_y = std::max(max_y - min_y, 1e-9);
    const auto sx = [&](double x) { return kPad + (kWidth - 2 * kPad) * (x - min_x) / span_x; };
    const auto sy = [&](double y) { return kHeight - kPad - (kHeight - 2 * kPad) * (y - min_y) / span_y; };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    if (!provenance.empty()) svg << "<!-- config_hash=" << provenance << " -->\n";
    svg << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    if (!model.slice_label.empty()) {
        svg << "<text x=\"" << fmt(kWidth / 2.0)
            << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">slice "
            << model.slice_label << "</text>\n";
    }
    svg << "<text x=\"" << fmt(kWidth / 2.0) << "\" y=\"" << fmt(kHeight - 16.0)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">PC1</text>\n";
    svg << "<text x=\"16\" y=\"" << fmt(kHeight / 2.0)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << fmt(kHeight / 2.0) << ")\">PC2</text>\n";

    for (std::size_t i = 0; i < projected.size(); ++i) {
        const char* color = kPalette[i % kPalette.size()];
        svg << "<circle cx=\"" << fmt(sx(projected[i].x)) << "\" cy=\"" << fmt(sy(projected[i].y))
            << "\" r=\"5\" fill=\"" << color << "\"/>\n";
        svg << "<text x=\"" << fmt(sx(projected[i].x) + 9.0) << "\" y=\""
            << fmt(sy(projected[i].y) + 4.0)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << projected[i].term << "</text>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    require_writable(out, path);
    out << svg.str();
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace semdrift::trend
