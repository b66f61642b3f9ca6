#ifndef CDT_CONFIG_HPP
#define CDT_CONFIG_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cdt/layout.hpp"
#include "cdt/svar.hpp"

namespace cdt {

/// Flat key=value config text. `#` starts a comment, blank lines are
/// ignored, later keys override earlier ones.
class KeyValues {
public:
    static KeyValues from_file(const std::filesystem::path& path);
    static KeyValues from_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

    std::string get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    long get_int(const std::string& key) const;
    long get_int_or(const std::string& key, long fallback) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// Matrix literal: rows separated by ';', entries by ','.
/// Example 2x2: "0,0.3;0.1,0".
MatrixX<double> parse_matrix(const std::string& text);

/// Comma-separated doubles.
std::vector<double> parse_double_list(const std::string& text);

/// Comma-separated non-negative integers.
std::vector<int> parse_int_list(const std::string& text);

/// Assembles the simulator spec from config keys: a0/a1 (base), schedule
/// (constant|step|ramp), step_index + a0_step/a1_step, ramp_start/ramp_end +
/// a0_end/a1_end, noise, noise_scale, n, seed, burn_in, y_init.
SvarSpec<double> svar_spec_from_config(const KeyValues& kv);

/// Node labels: explicit `labels` key, else node1..nodeG from the `g` key or
/// the base matrix size.
std::vector<std::string> labels_from_config(const KeyValues& kv, int node_count);

} // namespace cdt

#endif
