#include "stochlog/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "stochlog/error.hpp"
#include "stochlog/format.hpp"

namespace stochlog {

namespace {

constexpr std::string_view kExampleText[4][3] = {
    {"sin(t) + 2/3", "cos(t) + 1", "sqrt(cos(t) + 1)"},
    {"sin(t) + 1/2", "cos(t) + 1", "sqrt(cos(t) + 1)"},
    {"sin(sqrt(2)*t) + cos(sqrt(3)*t) + 2/3", "sin(sqrt(6)*t) + cos(sqrt(2)*t) + 2", "sqrt(cos(t) + 1)"},
    {"sin(sqrt(2)*t) + cos(sqrt(3)*t) + 1/3", "sin(sqrt(6)*t) + cos(sqrt(2)*t) + 2", "sqrt(cos(t) + 1)"},
};

struct Entry {
    std::string value;
    std::size_t line;
    bool quoted;
};

using Section = std::map<std::string, Entry>;

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Splits a value into its text and whether it was quoted; strips trailing comments.
Entry parse_value(std::string_view raw, std::size_t line) {
    raw = trim(raw);
    if (!raw.empty() && raw.front() == '"') {
        std::string out;
        std::size_t i = 1;
        for (; i < raw.size(); ++i) {
            const char c = raw[i];
            if (c == '\\' && i + 1 < raw.size()) {
                out.push_back(raw[++i]);
            } else if (c == '"') {
                break;
            } else {
                out.push_back(c);
            }
        }
        if (i >= raw.size()) throw ConfigError("unterminated string", line);
        const std::string_view rest = trim(raw.substr(i + 1));
        if (!rest.empty() && rest.front() != '#' && rest.front() != ';') {
            throw ConfigError("unexpected text after string", line);
        }
        return {out, line, true};
    }
    const std::size_t comment = raw.find_first_of("#;");
    return {std::string(trim(raw.substr(0, comment))), line, false};
}

std::map<std::string, Section> parse_sections(std::string_view text) {
    std::map<std::string, Section> sections;
    Section* current = nullptr;
    std::size_t line_no = 0;
    bool any_content = false;
    std::istringstream in{std::string(text)};
    std::string raw_line;
    while (std::getline(in, raw_line)) {
        ++line_no;
        std::string_view line = trim(raw_line);
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        any_content = true;
        if (line.front() == '[') {
            const std::size_t close = line.find(']');
            if (close == std::string_view::npos || !trim(line.substr(close + 1)).empty()) {
                throw ConfigError("malformed section header", line_no);
            }
            const std::string name(trim(line.substr(1, close - 1)));
            static const std::set<std::string> known{"coefficients", "scan", "sim", "ensemble", "output"};
            if (!known.contains(name)) throw ConfigError("unknown section [" + name + "]", line_no);
            if (sections.contains(name)) throw ConfigError("duplicate section [" + name + "]", line_no);
            current = &sections[name];
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty()) throw ConfigError("missing key", line_no);
        if (current == nullptr) throw ConfigError("key '" + key + "' outside of any section", line_no);
        if (current->contains(key)) throw ConfigError("duplicate key '" + key + "'", line_no);
        current->emplace(key, parse_value(line.substr(eq + 1), line_no));
    }
    if (!any_content) throw ConfigError("empty configuration", 1);
    return sections;
}

class SectionReader {
public:
    SectionReader(const std::map<std::string, Section>& all, const std::string& name,
                  std::set<std::string> allowed)
        : name_(name), allowed_(std::move(allowed)) {
        if (const auto it = all.find(name); it != all.end()) section_ = &it->second;
        if (section_ != nullptr) {
            for (const auto& [key, entry] : *section_) {
                if (!allowed_.contains(key)) {
                    throw ConfigError("unknown key '" + key + "' in [" + name_ + "]", entry.line);
                }
            }
        }
    }

    const Entry* find(const std::string& key) const {
        if (section_ == nullptr) return nullptr;
        const auto it = section_->find(key);
        return it == section_->end() ? nullptr : &it->second;
    }

    void read(const std::string& key, double& out) const {
        if (const Entry* e = find(key)) out = to_double(*e, key);
    }

    void read(const std::string& key, std::optional<double>& out) const {
        if (const Entry* e = find(key)) out = to_double(*e, key);
    }

    template <class Int>
    void read_int(const std::string& key, Int& out) const {
        if (const Entry* e = find(key)) {
            Int value{};
            const auto [ptr, ec] = std::from_chars(e->value.data(), e->value.data() + e->value.size(), value);
            if (ec != std::errc{} || ptr != e->value.data() + e->value.size()) {
                throw ConfigError("'" + key + "' expects a non-negative integer, got '" + e->value + "'", e->line);
            }
            out = value;
        }
    }

    void read(const std::string& key, std::string& out) const {
        if (const Entry* e = find(key)) out = e->value;
    }

    void read_list(const std::string& key, std::vector<double>& out) const {
        const Entry* e = find(key);
        if (e == nullptr) return;
        out.clear();
        std::string_view rest = e->value;
        while (!trim(rest).empty()) {
            const std::size_t comma = rest.find(',');
            const std::string item(trim(rest.substr(0, comma)));
            out.push_back(to_double(Entry{item, e->line, false}, key));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
    }

    CoeffExpr read_expr(const std::string& key) const {
        const Entry* e = find(key);
        if (e == nullptr) throw ConfigError("missing '" + key + "' in [" + name_ + "]", 0);
        try {
            return parse_expr(e->value);
        } catch (const ParseError& err) {
            throw ConfigError("'" + key + "': " + err.what(), e->line);
        }
    }

private:
    static double to_double(const Entry& e, const std::string& key) {
        double value = 0.0;
        const char* begin = e.value.data();
        const char* end = begin + e.value.size();
        const auto [ptr, ec] = std::from_chars(begin, end, value);
        if (e.value.empty() || ec != std::errc{} || ptr != end) {
            throw ConfigError("'" + key + "' expects a number, got '" + e.value + "'", e.line);
        }
        return value;
    }

    std::string name_;
    std::set<std::string> allowed_;
    const Section* section_ = nullptr;
};

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string join(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ", ";
        out += format_double(values[i]);
    }
    return out;
}

}  // namespace

SystemSpec builtin_example(int id) {
    if (id < 1 || id > 4) throw ValidationError("example id must be 1..4, got " + std::to_string(id));
    const auto& text = kExampleText[id - 1];
    return make_system(text[0], text[1], text[2], "example " + std::to_string(id));
}

RunConfig builtin_run_config(int id) {
    RunConfig cfg;
    cfg.spec = builtin_example(id);
    cfg.example_id = id;
    cfg.route = id >= 3 ? ClassifyRoute::Averages : ClassifyRoute::Windows;
    cfg.ensemble.base = cfg.sim;
    return cfg;
}

void RunConfig::validate() const {
    spec.validate();
    scan.validate();
    if (!(avg_horizon > 0.0)) throw ValidationError("avg_horizon must be > 0");
    sim.validate();
    // RK4 is valid for a single deterministic run. The ensemble entry points
    // reject it on their own, so only the remaining ensemble fields are checked.
    EnsembleConfig stochastic = ensemble;
    if (stochastic.base.scheme == Scheme::RK4) stochastic.base.scheme = Scheme::LogEM;
    stochastic.validate();
    for (double p : p_list) {
        if (!(p > 0.0)) throw ValidationError("p_list entries must be > 0");
    }
    if (example_id && (*example_id < 1 || *example_id > 4)) throw ValidationError("example id must be 1..4");
}

RunConfig parse_config(std::string_view text) {
    const auto sections = parse_sections(text);
    RunConfig cfg;

    const SectionReader coeff(sections, "coefficients",
                              {"example", "r", "a", "sigma", "label", "grid_start", "grid_end", "grid_step"});
    if (const Entry* ex = coeff.find("example")) {
        for (const char* key : {"r", "a", "sigma"}) {
            if (const Entry* e = coeff.find(key)) {
                throw ConfigError(std::string("'") + key + "' cannot be combined with 'example'", e->line);
            }
        }
        int id = 0;
        coeff.read_int("example", id);
        if (id < 1 || id > 4) throw ConfigError("example must be 1..4", ex->line);
        cfg.spec = builtin_example(id);
        cfg.example_id = id;
    } else {
        if (sections.find("coefficients") == sections.end()) throw ConfigError("missing [coefficients] section", 0);
        cfg.spec.r = coeff.read_expr("r");
        cfg.spec.a = coeff.read_expr("a");
        cfg.spec.sigma = coeff.read_expr("sigma");
        cfg.spec.label.clear();
    }
    coeff.read("label", cfg.spec.label);
    coeff.read("grid_start", cfg.spec.validation_grid.t_start);
    coeff.read("grid_end", cfg.spec.validation_grid.t_end);
    coeff.read("grid_step", cfg.spec.validation_grid.step);

    const SectionReader scan(sections, "scan",
                             {"window", "scan_start", "scan_end", "scan_step", "quad_step", "margin", "avg_horizon",
                              "route"});
    scan.read("window", cfg.scan.window);
    scan.read("scan_start", cfg.scan.scan_start);
    scan.read("scan_end", cfg.scan.scan_end);
    scan.read("scan_step", cfg.scan.scan_step);
    scan.read("quad_step", cfg.scan.quad.step);
    scan.read("margin", cfg.scan.margin);
    scan.read("avg_horizon", cfg.avg_horizon);
    if (cfg.example_id && *cfg.example_id >= 3) cfg.route = ClassifyRoute::Averages;
    if (const Entry* e = scan.find("route")) {
        try {
            cfg.route = parse_route(e->value);
        } catch (const ValidationError& err) {
            throw ConfigError(err.what(), e->line);
        }
    }

    const SectionReader sim(sections, "sim", {"x0", "dt", "t_end", "seed", "scheme", "record_stride"});
    sim.read("x0", cfg.sim.x0);
    sim.read("dt", cfg.sim.dt);
    sim.read("t_end", cfg.sim.t_end);
    sim.read_int("seed", cfg.sim.seed);
    if (const Entry* e = sim.find("scheme")) {
        try {
            cfg.sim.scheme = parse_scheme(e->value);
        } catch (const ValidationError& err) {
            throw ConfigError(err.what(), e->line);
        }
    }
    if (sim.find("record_stride") != nullptr) {
        sim.read_int("record_stride", cfg.sim.record_stride);
    } else {
        cfg.sim.record_stride = default_record_stride(cfg.sim.t_end, cfg.sim.dt);
    }

    const SectionReader ens(sections, "ensemble",
                            {"n_paths", "master_seed", "probe_times", "p_list", "eps_ext", "lower_level",
                             "upper_level", "threads"});
    ens.read_int("n_paths", cfg.ensemble.n_paths);
    ens.read_int("master_seed", cfg.ensemble.master_seed);
    ens.read_list("probe_times", cfg.ensemble.probe_times);
    ens.read_list("p_list", cfg.p_list);
    ens.read("eps_ext", cfg.ensemble.eps_ext);
    ens.read("lower_level", cfg.ensemble.lower_level);
    ens.read("upper_level", cfg.ensemble.upper_level);
    ens.read_int("threads", cfg.ensemble.threads);
    cfg.ensemble.base = cfg.sim;

    const SectionReader output(sections, "output", {"dir"});
    output.read("dir", cfg.output_dir);

    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string(), 0);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string write_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "[coefficients]\n";
    if (cfg.example_id) {
        out << "example = " << *cfg.example_id << '\n';
    } else {
        out << "r = " << quote(cfg.spec.r.to_string()) << '\n';
        out << "a = " << quote(cfg.spec.a.to_string()) << '\n';
        out << "sigma = " << quote(cfg.spec.sigma.to_string()) << '\n';
    }
    out << "label = " << quote(cfg.spec.label) << '\n';
    out << "grid_start = " << format_double(cfg.spec.validation_grid.t_start) << '\n';
    out << "grid_end = " << format_double(cfg.spec.validation_grid.t_end) << '\n';
    out << "grid_step = " << format_double(cfg.spec.validation_grid.step) << '\n';

    out << "\n[scan]\n";
    out << "window = " << format_double(cfg.scan.window) << '\n';
    out << "scan_start = " << format_double(cfg.scan.scan_start) << '\n';
    out << "scan_end = " << format_double(cfg.scan.scan_end) << '\n';
    out << "scan_step = " << format_double(cfg.scan.scan_step) << '\n';
    out << "quad_step = " << format_double(cfg.scan.quad.step) << '\n';
    out << "margin = " << format_double(cfg.scan.margin) << '\n';
    out << "avg_horizon = " << format_double(cfg.avg_horizon) << '\n';
    out << "route = " << to_string(cfg.route) << '\n';

    out << "\n[sim]\n";
    out << "x0 = " << format_double(cfg.sim.x0) << '\n';
    out << "dt = " << format_double(cfg.sim.dt) << '\n';
    out << "t_end = " << format_double(cfg.sim.t_end) << '\n';
    out << "seed = " << cfg.sim.seed << '\n';
    out << "scheme = " << to_string(cfg.sim.scheme) << '\n';
    out << "record_stride = " << cfg.sim.record_stride << '\n';

    out << "\n[ensemble]\n";
    out << "n_paths = " << cfg.ensemble.n_paths << '\n';
    out << "master_seed = " << cfg.ensemble.master_seed << '\n';
    out << "probe_times = " << quote(join(cfg.ensemble.probe_times)) << '\n';
    out << "p_list = " << quote(join(cfg.p_list)) << '\n';
    out << "eps_ext = " << format_double(cfg.ensemble.eps_ext) << '\n';
    if (cfg.ensemble.lower_level) out << "lower_level = " << format_double(*cfg.ensemble.lower_level) << '\n';
    if (cfg.ensemble.upper_level) out << "upper_level = " << format_double(*cfg.ensemble.upper_level) << '\n';
    out << "threads = " << cfg.ensemble.threads << '\n';

    out << "\n[output]\n";
    out << "dir = " << quote(cfg.output_dir) << '\n';
    return out.str();
}

}  // namespace stochlog
