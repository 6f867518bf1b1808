#include "mtt/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <vector>

namespace mtt::cli {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

// Shortest text that parses back to the same double.
std::string fmt_double(double v) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ec == std::errc() ? end : buf);
}

double to_double(std::string_view key, std::string_view text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(text) + "'");
    }
    return v;
}

long long to_integer(std::string_view key, std::string_view text) {
    long long v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc() || ptr != end) {
        throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(text) + "'");
    }
    return v;
}

enum class Bound { open, closed, none };

struct Range {
    double lo = -std::numeric_limits<double>::infinity();
    Bound lo_kind = Bound::none;
    double hi = std::numeric_limits<double>::infinity();
    Bound hi_kind = Bound::none;

    [[nodiscard]] bool contains(double v) const {
        if (lo_kind == Bound::open && !(v > lo)) return false;
        if (lo_kind == Bound::closed && !(v >= lo)) return false;
        if (hi_kind == Bound::open && !(v < hi)) return false;
        if (hi_kind == Bound::closed && !(v <= hi)) return false;
        return true;
    }

    [[nodiscard]] std::string describe() const {
        std::string s = lo_kind == Bound::closed ? "[" : "(";
        s += lo_kind == Bound::none ? "-inf" : fmt_double(lo);
        s += ", ";
        s += hi_kind == Bound::none ? "inf" : fmt_double(hi);
        s += hi_kind == Bound::closed ? "]" : ")";
        return s;
    }
};

constexpr Range positive{0.0, Bound::open};
constexpr Range non_negative{0.0, Bound::closed};
constexpr Range unit_open{0.0, Bound::open, 1.0, Bound::open};

double checked(std::string_view key, double v, const Range& range) {
    if (!range.contains(v)) {
        throw ConfigError(std::string(key) + " = " + fmt_double(v) + " is out of range: must be in " + range.describe());
    }
    return v;
}

double parse_number(std::string_view key, std::string_view text, const Range& range) {
    return checked(key, to_double(key, text), range);
}

long long parse_int(std::string_view key, std::string_view text, long long lo, long long hi) {
    const auto v = to_integer(key, text);
    if (v < lo || v > hi) {
        throw ConfigError(std::string(key) + " = " + std::to_string(v) + " is out of range: must be in [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return v;
}

std::vector<double> parse_list(std::string_view key, std::string_view text, std::size_t expected) {
    std::vector<double> out;
    for (auto part : split(text, ',')) out.push_back(to_double(key, part));
    if (expected != 0 && out.size() != expected) {
        throw ConfigError(std::string(key) + ": expected " + std::to_string(expected) + " comma-separated values");
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ConfigError(std::string(key) + ": expected true or false");
}

std::string join(const std::vector<double>& values, const char* sep = ",") {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) s += sep;
        s += fmt_double(values[i]);
    }
    return s;
}

std::string rect_text(const Rect& r) {
    return join({r.x_min, r.y_min, r.x_max, r.y_max});
}

Rect parse_rect(std::string_view key, std::string_view text) {
    const auto v = parse_list(key, text, 4);
    const Rect r{v[0], v[1], v[2], v[3]};
    if (!(r.width() > 0.0 && r.height() > 0.0)) throw ConfigError(std::string(key) + ": rectangle must have positive area");
    return r;
}

struct KeySpec {
    std::string_view key;
    std::function<void(ExperimentConfig&, std::string_view, std::string_view)> parse;
    std::function<std::string(const ExperimentConfig&)> print;
};

const std::vector<KeySpec>& key_specs() {
    static const std::vector<KeySpec> specs = {
        {"scenario.n_targets",
         [](auto& c, auto k, auto v) { c.scenario.n_targets = static_cast<int>(parse_int(k, v, 0, 1000)); },
         [](const auto& c) { return std::to_string(c.scenario.n_targets); }},
        {"scenario.n_steps",
         [](auto& c, auto k, auto v) { c.scenario.n_steps = static_cast<int>(parse_int(k, v, 1, 10'000'000)); },
         [](const auto& c) { return std::to_string(c.scenario.n_steps); }},
        {"scenario.tau", [](auto& c, auto k, auto v) { c.scenario.tau = parse_number(k, v, positive); },
         [](const auto& c) { return fmt_double(c.scenario.tau); }},
        {"scenario.q_diag",
         [](auto& c, auto k, auto v) {
             const auto q = parse_list(k, v, 4);
             for (std::size_t i = 0; i < 4; ++i) c.scenario.q_diag[i] = checked(k, q[i], non_negative);
         },
         [](const auto& c) { return join({c.scenario.q_diag.begin(), c.scenario.q_diag.end()}); }},
        {"scenario.workspace", [](auto& c, auto k, auto v) { c.scenario.workspace = parse_rect(k, v); },
         [](const auto& c) { return rect_text(c.scenario.workspace); }},
        {"scenario.seed",
         [](auto& c, auto k, auto v) {
             c.scenario.seed = static_cast<std::uint64_t>(parse_int(k, v, 0, std::numeric_limits<long long>::max()));
         },
         [](const auto& c) { return std::to_string(c.scenario.seed); }},
        {"scenario.initial_states",
         [](auto& c, auto k, auto v) {
             c.scenario.initial_states.clear();
             if (v.empty()) return;
             for (auto state : split(v, ';')) {
                 const auto x = parse_list(k, state, 4);
                 c.scenario.initial_states.push_back(Eigen::Map<const Vec>(x.data(), 4));
             }
         },
         [](const auto& c) {
             std::string s;
             for (std::size_t i = 0; i < c.scenario.initial_states.size(); ++i) {
                 if (i) s += "; ";
                 const auto& x = c.scenario.initial_states[i];
                 s += join({x(0), x(1), x(2), x(3)});
             }
             return s;
         }},

        {"sensor.type",
         [](auto& c, auto k, auto v) {
             if (v == "mean") c.sensor.kind = SensorKind::mean;
             else if (v == "grid") c.sensor.kind = SensorKind::grid;
             else throw ConfigError(std::string(k) + ": expected mean or grid");
         },
         [](const auto& c) { return std::string(to_string(c.sensor.kind)); }},
        {"sensor.r_diag",
         [](auto& c, auto k, auto v) {
             const auto r = parse_list(k, v, 2);
             c.sensor.r_diag = {checked(k, r[0], non_negative), checked(k, r[1], non_negative)};
         },
         [](const auto& c) { return join({c.sensor.r_diag[0], c.sensor.r_diag[1]}); }},
        {"sensor.p_d", [](auto& c, auto k, auto v) { c.sensor.grid.p_d = parse_number(k, v, unit_open); },
         [](const auto& c) { return fmt_double(c.sensor.grid.p_d); }},
        {"sensor.snr", [](auto& c, auto k, auto v) { c.sensor.grid.snr = parse_number(k, v, positive); },
         [](const auto& c) { return fmt_double(c.sensor.grid.snr); }},
        {"sensor.rows",
         [](auto& c, auto k, auto v) { c.sensor.grid.rows = static_cast<int>(parse_int(k, v, 1, 4096)); },
         [](const auto& c) { return std::to_string(c.sensor.grid.rows); }},
        {"sensor.cols",
         [](auto& c, auto k, auto v) { c.sensor.grid.cols = static_cast<int>(parse_int(k, v, 1, 4096)); },
         [](const auto& c) { return std::to_string(c.sensor.grid.cols); }},
        {"sensor.m_cells",
         [](auto& c, auto k, auto v) { c.sensor.grid.m_cells = static_cast<int>(parse_int(k, v, 1, 1 << 24)); },
         [](const auto& c) { return std::to_string(c.sensor.grid.m_cells); }},
        {"sensor.strategy",
         [](auto& c, auto k, auto v) {
             if (v == "random") c.sensor.selection.strategy = CellStrategy::random;
             else if (v == "round_robin") c.sensor.selection.strategy = CellStrategy::round_robin;
             else if (v == "fixed_list") c.sensor.selection.strategy = CellStrategy::fixed_list;
             else throw ConfigError(std::string(k) + ": expected random, round_robin or fixed_list");
         },
         [](const auto& c) -> std::string {
             switch (c.sensor.selection.strategy) {
                 case CellStrategy::random: return "random";
                 case CellStrategy::round_robin: return "round_robin";
                 case CellStrategy::fixed_list: return "fixed_list";
             }
             return "random";
         }},
        {"sensor.cells",
         [](auto& c, auto k, auto v) {
             c.sensor.selection.fixed_cells.clear();
             if (v.empty()) return;
             for (auto part : split(v, ','))
                 c.sensor.selection.fixed_cells.push_back(static_cast<int>(parse_int(k, part, 0, 1 << 24)));
         },
         [](const auto& c) {
             std::string s;
             for (std::size_t i = 0; i < c.sensor.selection.fixed_cells.size(); ++i) {
                 if (i) s += ",";
                 s += std::to_string(c.sensor.selection.fixed_cells[i]);
             }
             return s;
         }},

        {"filter.type",
         [](auto& c, auto k, auto v) {
             if (v == "gpf") c.filter = FilterKind::gpf;
             else if (v == "pf") c.filter = FilterKind::classical_pf;
             else if (v == "kf") c.filter = FilterKind::kalman;
             else throw ConfigError(std::string(k) + ": expected gpf, pf or kf");
         },
         [](const auto& c) { return std::string(to_string(c.filter)); }},
        {"filter.init_pos_var", [](auto& c, auto k, auto v) { c.init.pos_var = parse_number(k, v, non_negative); },
         [](const auto& c) { return fmt_double(c.init.pos_var); }},
        {"filter.init_vel_var", [](auto& c, auto k, auto v) { c.init.vel_var = parse_number(k, v, non_negative); },
         [](const auto& c) { return fmt_double(c.init.vel_var); }},
        {"filter.init_weight",
         [](auto& c, auto k, auto v) { c.init.weight = parse_number(k, v, {0.0, Bound::open, 1.0, Bound::closed}); },
         [](const auto& c) { return fmt_double(c.init.weight); }},

        {"gpf.epsilon", [](auto& c, auto k, auto v) { c.gpf.epsilon = parse_number(k, v, unit_open); },
         [](const auto& c) { return fmt_double(c.gpf.epsilon); }},
        {"gpf.d_thresh", [](auto& c, auto k, auto v) { c.gpf.d_thresh = parse_number(k, v, positive); },
         [](const auto& c) { return fmt_double(c.gpf.d_thresh); }},
        {"gpf.w_prune",
         [](auto& c, auto k, auto v) { c.gpf.w_prune = parse_number(k, v, {0.0, Bound::closed, 1.0, Bound::open}); },
         [](const auto& c) { return fmt_double(c.gpf.w_prune); }},
        {"gpf.n_max",
         [](auto& c, auto k, auto v) { c.gpf.n_max = static_cast<std::size_t>(parse_int(k, v, 1, 1'000'000)); },
         [](const auto& c) { return std::to_string(c.gpf.n_max); }},
        {"gpf.w_birth",
         [](auto& c, auto k, auto v) { c.gpf.w_birth = parse_number(k, v, {0.0, Bound::open, 1.0, Bound::closed}); },
         [](const auto& c) { return fmt_double(c.gpf.w_birth); }},
        {"gpf.s_max",
         [](auto& c, auto k, auto v) { c.gpf.s_max = static_cast<std::size_t>(parse_int(k, v, 1, 30)); },
         [](const auto& c) { return std::to_string(c.gpf.s_max); }},
        {"gpf.merge_cov",
         [](auto& c, auto k, auto v) {
             if (v == "moment_match") c.gpf.merge_cov = MergeCovariance::moment_match;
             else if (v == "sum") c.gpf.merge_cov = MergeCovariance::sum;
             else throw ConfigError(std::string(k) + ": expected moment_match or sum");
         },
         [](const auto& c) {
             return std::string(c.gpf.merge_cov == MergeCovariance::moment_match ? "moment_match" : "sum");
         }},
        {"gpf.clutter_density",
         [](auto& c, auto k, auto v) { c.gpf.clutter_density = parse_number(k, v, non_negative); },
         [](const auto& c) { return fmt_double(c.gpf.clutter_density); }},
        {"gpf.fov",
         [](auto& c, auto k, auto v) {
             c.gpf.fov.rects.clear();
             if (v.empty() || v == "full") return;
             for (auto r : split(v, ';')) c.gpf.fov.rects.push_back(parse_rect(k, r));
         },
         [](const auto& c) {
             if (c.gpf.fov.is_full()) return std::string("full");
             std::string s;
             for (std::size_t i = 0; i < c.gpf.fov.rects.size(); ++i) {
                 if (i) s += "; ";
                 s += rect_text(c.gpf.fov.rects[i]);
             }
             return s;
         }},

        {"pf.n_particles",
         [](auto& c, auto k, auto v) { c.pf.n_particles = static_cast<std::size_t>(parse_int(k, v, 1, 100'000'000)); },
         [](const auto& c) { return std::to_string(c.pf.n_particles); }},
        {"pf.resampling",
         [](auto& c, auto k, auto v) {
             if (v == "multinomial") c.pf.resampling = ResamplingScheme::multinomial;
             else if (v == "systematic") c.pf.resampling = ResamplingScheme::systematic;
             else throw ConfigError(std::string(k) + ": expected multinomial or systematic");
         },
         [](const auto& c) {
             return std::string(c.pf.resampling == ResamplingScheme::multinomial ? "multinomial" : "systematic");
         }},

        {"metrics.extraction_threshold",
         [](auto& c, auto k, auto v) {
             c.metrics.extraction_threshold = parse_number(k, v, {0.0, Bound::closed, 1.0, Bound::closed});
         },
         [](const auto& c) { return fmt_double(c.metrics.extraction_threshold); }},
        {"metrics.cutoff", [](auto& c, auto k, auto v) { c.metrics.cutoff = parse_number(k, v, positive); },
         [](const auto& c) { return fmt_double(c.metrics.cutoff); }},
        {"metrics.ospa", [](auto& c, auto k, auto v) { c.metrics.ospa = parse_bool(k, v); },
         [](const auto& c) { return std::string(c.metrics.ospa ? "true" : "false"); }},
    };
    return specs;
}

const KeySpec* find_spec(std::string_view key) {
    for (const auto& s : key_specs())
        if (s.key == key) return &s;
    return nullptr;
}

/// Cross-field checks once every key has been applied.
void finalize(ExperimentConfig& config) {
    // The grid always tiles the scenario workspace.
    config.sensor.grid.workspace = config.scenario.workspace;
    if (config.sensor.grid.m_cells > config.sensor.grid.cell_count()) {
        throw ConfigError("sensor.m_cells = " + std::to_string(config.sensor.grid.m_cells) +
                          " exceeds the number of cells (" + std::to_string(config.sensor.grid.cell_count()) + ")");
    }
    try {
        config.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace

void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value) {
    const auto* spec = find_spec(key);
    if (!spec) throw ConfigError("unknown key '" + std::string(key) + "'");
    spec->parse(config, key, value);
}

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig config;
    std::set<std::string, std::less<>> seen;
    int line_no = 0;
    for (auto raw : split(text, '\n')) {
        ++line_no;
        auto line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("missing key before '='", line_no);
        if (!seen.emplace(key).second) throw ConfigError("duplicate key '" + std::string(key) + "'", line_no);
        try {
            apply_setting(config, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(e.what(), line_no);
        }
    }
    finalize(config);
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::map<std::string, std::string> config_snapshot(const ExperimentConfig& config) {
    std::map<std::string, std::string> out;
    for (const auto& s : key_specs()) out.emplace(s.key, s.print(config));
    return out;
}

std::string to_config_text(const ExperimentConfig& config) {
    std::string text;
    for (const auto& s : key_specs()) {
        text += s.key;
        text += " = ";
        text += s.print(config);
        text += '\n';
    }
    return text;
}

}  // namespace mtt::cli
