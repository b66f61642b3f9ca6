#include "cdt/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "cdt/errors.hpp"

namespace cdt {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

double to_double(const std::string& token, const std::string& context) {
    double v = 0;
    const std::string t = trim(token);
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw parse_error("bad number '" + token + "' in " + context);
    return v;
}

} // namespace

KeyValues KeyValues::from_string(const std::string& text, const std::string& origin) {
    KeyValues kv;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw parse_error(origin + ":" + std::to_string(line_no) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw parse_error(origin + ":" + std::to_string(line_no) + ": empty key");
        kv.values_[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

KeyValues KeyValues::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open config file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str(), path.string());
}

std::string KeyValues::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw validation_error("missing config key: " + key);
    return it->second;
}

std::string KeyValues::get_or(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double KeyValues::get_double(const std::string& key) const {
    return to_double(get(key), "key '" + key + "'");
}

double KeyValues::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long KeyValues::get_int(const std::string& key) const {
    const double v = get_double(key);
    const long n = static_cast<long>(v);
    if (static_cast<double>(n) != v)
        throw parse_error("key '" + key + "' must be an integer, got " + get(key));
    return n;
}

long KeyValues::get_int_or(const std::string& key, long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

MatrixX<double> parse_matrix(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::stringstream ss(text);
    std::string row_text;
    while (std::getline(ss, row_text, ';')) {
        std::vector<double> row;
        std::stringstream rs(row_text);
        std::string cell;
        while (std::getline(rs, cell, ',')) row.push_back(to_double(cell, "matrix literal"));
        if (row.empty()) throw parse_error("empty row in matrix literal");
        if (!rows.empty() && row.size() != rows.front().size())
            throw parse_error("ragged matrix literal");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw parse_error("empty matrix literal");
    MatrixX<double> m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    return m;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(to_double(cell, "number list"));
    if (out.empty()) throw parse_error("empty number list");
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (const double v : parse_double_list(text)) {
        const int n = static_cast<int>(v);
        if (static_cast<double>(n) != v || n < 0)
            throw parse_error("expected non-negative integers in list");
        out.push_back(n);
    }
    return out;
}

SvarSpec<double> svar_spec_from_config(const KeyValues& kv) {
    SvarSpec<double> spec;
    spec.schedule.base.a0 = parse_matrix(kv.get("a0"));
    spec.schedule.base.a1 = parse_matrix(kv.get("a1"));

    const std::string kind = kv.get_or("schedule", "constant");
    if (kind == "constant") {
        spec.schedule.kind = ScheduleKind::constant;
    } else if (kind == "step") {
        spec.schedule.kind = ScheduleKind::step;
        spec.schedule.step_index = static_cast<int>(kv.get_int("step_index"));
        spec.schedule.step_to.a0 = parse_matrix(kv.get("a0_step"));
        spec.schedule.step_to.a1 = parse_matrix(kv.get("a1_step"));
    } else if (kind == "ramp") {
        spec.schedule.kind = ScheduleKind::ramp;
        spec.schedule.ramp_start = static_cast<int>(kv.get_int("ramp_start"));
        spec.schedule.ramp_end = static_cast<int>(kv.get_int("ramp_end"));
        spec.schedule.ramp_to.a0 = parse_matrix(kv.get("a0_end"));
        spec.schedule.ramp_to.a1 = parse_matrix(kv.get("a1_end"));
    } else {
        throw validation_error("unknown schedule kind: " + kind);
    }

    const std::string noise = kv.get_or("noise", "gaussian");
    if (noise == "gaussian")
        spec.noise_kind = NoiseKind::gaussian;
    else if (noise == "laplace")
        spec.noise_kind = NoiseKind::laplace;
    else
        throw validation_error("unknown noise kind: " + noise);

    spec.noise_scale = kv.get_double_or("noise_scale", 1.0);
    spec.n_samples = static_cast<int>(kv.get_int("n"));
    spec.seed = static_cast<std::uint64_t>(kv.get_int_or("seed", 0));
    spec.burn_in = static_cast<int>(kv.get_int_or("burn_in", -1));
    if (kv.has("y_init")) {
        const auto v = parse_double_list(kv.get("y_init"));
        spec.y_init = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
    }
    return spec;
}

std::vector<std::string> labels_from_config(const KeyValues& kv, int node_count) {
    if (kv.has("labels")) {
        std::vector<std::string> labels;
        std::stringstream ss(kv.get("labels"));
        std::string cell;
        while (std::getline(ss, cell, ',')) labels.push_back(cell);
        if (static_cast<int>(labels.size()) != node_count)
            throw validation_error("labels count does not match node count");
        return labels;
    }
    return GraphSpec::with_default_labels(node_count).node_labels;
}

} // namespace cdt
