#include "cdt/io.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "cdt/errors.hpp"

namespace cdt {

std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& token, const std::filesystem::path& path, int line_no) {
    double v = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
        throw parse_error(path.string() + ":" + std::to_string(line_no) +
                          ": bad numeric field '" + token + "'");
    return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw parse_error("cannot write file: " + path.string());
    return out;
}

} // namespace

void write_series_csv(const std::filesystem::path& path, const ObservationSeries<double>& series) {
    auto out = open_out(path);
    out << "timestamp,contiguous";
    for (const auto& label : series.channel_labels) out << ',' << label;
    out << '\n';
    for (int i = 0; i < series.samples(); ++i) {
        out << format_double(series.timestamps[i]) << ','
            << (series.contiguous_with_previous[i] ? 1 : 0);
        for (int c = 0; c < series.channels(); ++c)
            out << ',' << format_double(series.values(i, c));
        out << '\n';
    }
}

ObservationSeries<double> read_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open series file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw parse_error(path.string() + ": empty file");
    const auto header = split_csv_line(line);
    if (header.size() < 4 || header[0] != "timestamp" || header[1] != "contiguous")
        throw parse_error(path.string() + ": expected header timestamp,contiguous,<channels...>");

    ObservationSeries<double> series;
    series.channel_labels.assign(header.begin() + 2, header.end());
    const int g = static_cast<int>(series.channel_labels.size());

    std::vector<std::vector<double>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != g + 2)
            throw parse_error(path.string() + ":" + std::to_string(line_no) +
                              ": wrong field count");
        series.timestamps.push_back(parse_double(fields[0], path, line_no));
        series.contiguous_with_previous.push_back(fields[1] == "1");
        std::vector<double> row(g);
        for (int c = 0; c < g; ++c) row[c] = parse_double(fields[c + 2], path, line_no);
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw parse_error(path.string() + ": series needs at least 2 rows");

    series.values.resize(static_cast<int>(rows.size()), g);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int c = 0; c < g; ++c) series.values(static_cast<int>(i), c) = rows[i][c];
    if (!series.contiguous_with_previous.empty()) series.contiguous_with_previous[0] = false;
    return series;
}

void write_trajectory_csv(const std::filesystem::path& path, const StateLayout& layout,
                          const std::vector<double>& time,
                          const std::vector<VectorX<double>>& states,
                          const std::vector<VectorX<double>>* stddevs) {
    if (time.size() != states.size())
        throw validation_error("trajectory time and state counts differ");
    if (stddevs && stddevs->size() != states.size())
        throw validation_error("trajectory stddev count differs");

    auto out = open_out(path);
    out << "time";
    for (int i = 0; i < layout.dim(); ++i) out << ',' << layout.column_name(i);
    if (stddevs)
        for (int i = 0; i < layout.dim(); ++i) out << ',' << layout.column_name(i) << "_sd";
    out << '\n';
    for (std::size_t n = 0; n < states.size(); ++n) {
        out << format_double(time[n]);
        for (int i = 0; i < layout.dim(); ++i) out << ',' << format_double(states[n][i]);
        if (stddevs)
            for (int i = 0; i < layout.dim(); ++i)
                out << ',' << format_double((*stddevs)[n][i]);
        out << '\n';
    }
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
    auto out = open_out(path);
    for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open file for digest: " + path.string());
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    char hex[17];
    for (int i = 15; i >= 0; --i) {
        hex[i] = "0123456789abcdef"[hash & 0xf];
        hash >>= 4;
    }
    hex[16] = '\0';
    return hex;
}

void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::vector<double>& x, const std::vector<PlotSeries>& series) {
    if (x.empty() || series.empty()) throw validation_error("nothing to plot");
    for (const auto& s : series)
        if (s.y.size() != x.size())
            throw validation_error("plot series length mismatch: " + s.name);

    const int width = 900, height = 480;
    const int ml = 70, mr = 180, mt = 40, mb = 50;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double xmin = x.front(), xmax = x.front(), ymin = series[0].y[0], ymax = ymin;
    for (const double v : x) {
        xmin = std::min(xmin, v);
        xmax = std::max(xmax, v);
    }
    for (const auto& s : series)
        for (const double v : s.y) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) {
        ymax += 0.5;
        ymin -= 0.5;
    }
    const auto px = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * pw; };
    const auto py = [&](double v) { return mt + (ymax - v) / (ymax - ymin) * ph; };

    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    auto out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << ml << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">"
        << title << "</text>\n"
        << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
        << mt + ph << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
        << "\" stroke=\"black\"/>\n";
    // axis ticks: min/mid/max on each axis
    for (const double v : {xmin, 0.5 * (xmin + xmax), xmax})
        out << "<text x=\"" << px(v) << "\" y=\"" << mt + ph + 20
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
            << format_double(v) << "</text>\n";
    for (const double v : {ymin, 0.5 * (ymin + ymax), ymax})
        out << "<text x=\"" << ml - 8 << "\" y=\"" << py(v) + 4
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">"
            << format_double(v) << "</text>\n";
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">time index"
        << "</text>\n"
        << "<text x=\"16\" y=\"" << mt + ph / 2
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
        << "transform=\"rotate(-90 16 " << mt + ph / 2 << ")\">factor value</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = palette[s % 8];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < x.size(); ++i)
            out << px(x[i]) << ',' << py(series[s].y[i]) << ' ';
        out << "\"/>\n";
        const double ly = mt + 16.0 * static_cast<double>(s);
        out << "<line x1=\"" << ml + pw + 12 << "\" y1=\"" << ly + 8 << "\" x2=\"" << ml + pw + 32
            << "\" y2=\"" << ly + 8 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << ml + pw + 38 << "\" y=\"" << ly + 12
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << series[s].name << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace cdt
