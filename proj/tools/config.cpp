#include "config.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace fqm::cli {

LineIndex::LineIndex(const std::string& text) {
    // Minimal scanner: tracks nesting, keys and array indices, skipping over
    // string contents and scalar tokens. Syntax errors are left to the parser.
    struct Frame {
        bool is_object;
        std::string pointer;
        long index = 0;
        std::string pending_key;
        bool expect_key = true;
    };
    std::vector<Frame> stack;
    int line = 1;
    std::size_t i = 0;
    auto escape = [](const std::string& key) {
        std::string out;
        for (char c : key) {
            if (c == '~') out += "~0";
            else if (c == '/') out += "~1";
            else out += c;
        }
        return out;
    };
    auto read_string = [&]() {
        std::string out;
        ++i;  // opening quote
        while (i < text.size() && text[i] != '"') {
            if (text[i] == '\\' && i + 1 < text.size()) {
                out += text[i + 1];
                i += 2;
                continue;
            }
            if (text[i] == '\n') ++line;
            out += text[i++];
        }
        ++i;  // closing quote
        return out;
    };
    // Pointer of a value starting now, recorded at the current line.
    auto value_pointer = [&]() -> std::string {
        if (stack.empty()) return "";
        Frame& top = stack.back();
        if (top.is_object) return top.pointer + "/" + escape(top.pending_key);
        std::string p = top.pointer + "/" + std::to_string(top.index);
        lines_.emplace(p, line);
        return p;
    };
    lines_[""] = 1;
    while (i < text.size()) {
        const char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (c == '"') {
            if (!stack.empty() && stack.back().is_object && stack.back().expect_key) {
                const int key_line = line;
                stack.back().pending_key = read_string();
                stack.back().expect_key = false;
                lines_.emplace(stack.back().pointer + "/" + escape(stack.back().pending_key), key_line);
            } else {
                value_pointer();
                read_string();
            }
        } else if (c == '{' || c == '[') {
            const std::string p = value_pointer();
            stack.push_back(Frame{c == '{', p, 0, {}, true});
            ++i;
        } else if (c == '}' || c == ']') {
            if (!stack.empty()) stack.pop_back();
            ++i;
        } else if (c == ',') {
            if (!stack.empty()) {
                if (stack.back().is_object) stack.back().expect_key = true;
                else ++stack.back().index;
            }
            ++i;
        } else if (c == ':' || std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else {
            value_pointer();
            while (i < text.size() && !std::strchr(",]}\n \t\r", text[i])) ++i;
        }
    }
}

int LineIndex::line_of(const std::string& pointer) const {
    std::string p = pointer;
    while (true) {
        if (auto it = lines_.find(p); it != lines_.end()) return it->second;
        const auto cut = p.rfind('/');
        if (cut == std::string::npos) return 1;
        p = p.substr(0, cut);
    }
}

namespace {

using nlohmann::json;

class Reader {
public:
    Reader(const json& root, const LineIndex& lines, std::string source)
        : root_(root), lines_(lines), source_(std::move(source)) {}

    [[noreturn]] void fail(const std::string& pointer, const std::string& what) const {
        throw ConfigError(source_, lines_.line_of(pointer), what);
    }

    static std::string name(const std::string& pointer) { return pointer.empty() ? "document" : pointer.substr(1); }

    const json& at(const std::string& pointer) const { return root_.at(json::json_pointer(pointer)); }
    bool has(const std::string& pointer) const { return root_.contains(json::json_pointer(pointer)); }

    // The object at pointer must exist and hold only the allowed keys.
    void object(const std::string& pointer, const std::set<std::string>& allowed) const {
        if (!has(pointer)) fail(pointer, "missing required block '" + name(pointer) + "'");
        const json& node = at(pointer);
        if (!node.is_object()) fail(pointer, "'" + name(pointer) + "' must be an object");
        for (const auto& [key, value] : node.items()) {
            if (!allowed.count(key)) fail(pointer + "/" + key, "unknown key '" + key + "' in '" + name(pointer) + "'");
        }
    }

    double number(const std::string& pointer, std::optional<double> fallback = std::nullopt) const {
        if (!has(pointer)) {
            if (fallback) return *fallback;
            fail(pointer, "missing required field '" + name(pointer) + "'");
        }
        const json& node = at(pointer);
        if (!node.is_number()) fail(pointer, "'" + name(pointer) + "' must be a number");
        const double v = node.get<double>();
        if (!std::isfinite(v)) fail(pointer, "'" + name(pointer) + "' must be finite");
        return v;
    }

    double positive(const std::string& pointer, std::optional<double> fallback = std::nullopt) const {
        const double v = number(pointer, fallback);
        if (!(v > 0.0)) fail(pointer, "'" + name(pointer) + "' must be positive");
        return v;
    }

    long integer(const std::string& pointer, std::optional<long> fallback = std::nullopt, long minimum = 0) const {
        if (!has(pointer)) {
            if (fallback) return *fallback;
            fail(pointer, "missing required field '" + name(pointer) + "'");
        }
        const json& node = at(pointer);
        if (!node.is_number_integer()) fail(pointer, "'" + name(pointer) + "' must be an integer");
        const long v = node.get<long>();
        if (v < minimum) fail(pointer, "'" + name(pointer) + "' must be at least " + std::to_string(minimum));
        return v;
    }

    std::string string(const std::string& pointer, std::optional<std::string> fallback = std::nullopt) const {
        if (!has(pointer)) {
            if (fallback) return *fallback;
            fail(pointer, "missing required field '" + name(pointer) + "'");
        }
        const json& node = at(pointer);
        if (!node.is_string()) fail(pointer, "'" + name(pointer) + "' must be a string");
        return node.get<std::string>();
    }

    bool boolean(const std::string& pointer, bool fallback) const {
        if (!has(pointer)) return fallback;
        const json& node = at(pointer);
        if (!node.is_boolean()) fail(pointer, "'" + name(pointer) + "' must be true or false");
        return node.get<bool>();
    }

    std::vector<double> numbers(const std::string& pointer, std::optional<std::vector<double>> fallback = std::nullopt,
                                bool allow_empty = false) const {
        if (!has(pointer)) {
            if (fallback) return *fallback;
            fail(pointer, "missing required field '" + name(pointer) + "'");
        }
        const json& node = at(pointer);
        if (!node.is_array()) fail(pointer, "'" + name(pointer) + "' must be an array of numbers");
        if (node.empty() && !allow_empty) fail(pointer, "'" + name(pointer) + "' must not be empty");
        std::vector<double> out;
        for (std::size_t k = 0; k < node.size(); ++k) out.push_back(number(pointer + "/" + std::to_string(k)));
        return out;
    }

    std::vector<long> integers(const std::string& pointer, long minimum) const {
        if (!has(pointer)) fail(pointer, "missing required field '" + name(pointer) + "'");
        const json& node = at(pointer);
        if (!node.is_array() || node.empty()) fail(pointer, "'" + name(pointer) + "' must be a non-empty array of integers");
        std::vector<long> out;
        for (std::size_t k = 0; k < node.size(); ++k) out.push_back(integer(pointer + "/" + std::to_string(k), std::nullopt, minimum));
        return out;
    }

private:
    const json& root_;
    const LineIndex& lines_;
    std::string source_;
};

// Runs a library constructor, re-raising its validation error at pointer.
template <class F>
auto anchored(const Reader& in, const std::string& pointer, F&& make) {
    try {
        return make();
    } catch (const std::invalid_argument& e) {
        in.fail(pointer, e.what());
    }
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        int line = 1;
        for (std::size_t k = 0; k < std::min(e.byte, text.size()); ++k) {
            if (text[k] == '\n') ++line;
        }
        throw ConfigError(source, line, std::string("malformed JSON: ") + e.what());
    }
    const LineIndex lines(text);
    const Reader in(root, lines, source);
    if (!root.is_object()) in.fail("", "configuration must be a JSON object");
    in.object("", {"units", "physics", "grid", "potential", "initial_state", "evolve", "groundstate", "spectrum",
                   "kernel", "verify", "output", "seed"});

    RunConfig cfg;
    cfg.source = source;

    in.object("/units", {"system", "length", "time", "energy"});
    cfg.units = Units{in.string("/units/system"), in.string("/units/length"), in.string("/units/time"),
                      in.string("/units/energy")};

    in.object("/physics", {"alpha", "d_alpha", "hbar"});
    const double alpha = in.number("/physics/alpha");
    const double d_alpha = in.number("/physics/d_alpha", 0.5);
    const double hbar = in.number("/physics/hbar", 1.0);
    if (!(alpha > 1.0 && alpha <= 2.0)) in.fail("/physics/alpha", "alpha must satisfy 1 < alpha <= 2");
    if (!(d_alpha > 0.0)) in.fail("/physics/d_alpha", "d_alpha must be positive");
    if (!(hbar > 0.0)) in.fail("/physics/hbar", "hbar must be positive");
    cfg.params = PhysicalParams(alpha, d_alpha, hbar);

    if (in.has("/grid")) {
        in.object("/grid", {"dim", "points", "extent"});
        cfg.grid.dim = static_cast<int>(in.integer("/grid/dim", 1, 1));
        cfg.grid.points = in.integer("/grid/points", 256, 1);
        cfg.grid.extent = in.positive("/grid/extent", 40.0);
        if (cfg.grid.dim > 3) in.fail("/grid/dim", "grid dimension must be 1, 2 or 3");
        anchored(in, "/grid/points", [&] { return make_grid(cfg.grid.dim, cfg.grid.points, cfg.grid.extent); });
    }

    if (in.has("/potential")) {
        in.object("/potential", {"kind", "q2", "beta", "samples"});
        const std::string kind = in.string("/potential/kind");
        if (kind == "free") {
            in.object("/potential", {"kind"});
            cfg.potential = PotentialSpec::free();
        } else if (kind == "power_law") {
            in.object("/potential", {"kind", "q2", "beta"});
            const double q2 = in.number("/potential/q2");
            const double beta = in.number("/potential/beta");
            cfg.potential = anchored(in, "/potential/beta", [&] { return PotentialSpec::power_law(q2, beta); });
        } else if (kind == "tabulated") {
            in.object("/potential", {"kind", "samples"});
            std::vector<double> samples = in.numbers("/potential/samples");
            const SpatialGrid grid = make_grid(cfg.grid.dim, cfg.grid.points, cfg.grid.extent);
            if (static_cast<Eigen::Index>(samples.size()) != grid.size()) {
                in.fail("/potential/samples", "tabulated potential needs " + std::to_string(grid.size()) +
                                                  " samples, got " + std::to_string(samples.size()));
            }
            cfg.potential = PotentialSpec::tabulated(std::move(samples));
        } else {
            in.fail("/potential/kind", "unknown potential kind '" + kind + "' (free, power_law, tabulated)");
        }
    }

    if (in.has("/initial_state")) {
        in.object("/initial_state", {"kind", "center", "width", "momentum"});
        InitialStateConfig s;
        s.kind = in.string("/initial_state/kind");
        const std::vector<double> zeros(static_cast<std::size_t>(cfg.grid.dim), 0.0);
        s.center = in.numbers("/initial_state/center", zeros);
        s.momentum = in.numbers("/initial_state/momentum", zeros);
        s.width = in.positive("/initial_state/width", 1.0);
        if (s.kind != "gaussian" && s.kind != "plane_wave" && s.kind != "random") {
            in.fail("/initial_state/kind", "unknown initial state '" + s.kind + "' (gaussian, plane_wave, random)");
        }
        if (static_cast<int>(s.center.size()) != cfg.grid.dim) {
            in.fail("/initial_state/center", "center needs one entry per grid dimension");
        }
        if (static_cast<int>(s.momentum.size()) != cfg.grid.dim) {
            in.fail("/initial_state/momentum", "momentum needs one entry per grid dimension");
        }
        cfg.initial_state = s;
    }

    if (in.has("/evolve")) {
        in.object("/evolve", {"dt", "steps", "snapshot_every"});
        EvolveConfig e;
        e.dt = in.positive("/evolve/dt");
        e.steps = in.integer("/evolve/steps");
        e.snapshot_every = in.integer("/evolve/snapshot_every", 0);
        cfg.evolve = e;
    }

    if (in.has("/groundstate")) {
        in.object("/groundstate", {"dt", "tol", "max_iters"});
        GroundStateConfig g;
        g.dt = in.positive("/groundstate/dt");
        g.tol = in.positive("/groundstate/tol", 1e-8);
        g.max_iters = in.integer("/groundstate/max_iters", 100000, 1);
        cfg.groundstate = g;
    }

    if (in.has("/spectrum")) {
        in.object("/spectrum", {"model", "coupling", "q2", "beta", "n_min", "n_max", "oracle", "oracle_tol"});
        SpectrumConfig s;
        s.model = in.string("/spectrum/model");
        if (s.model == "bohr") {
            in.object("/spectrum", {"model", "coupling", "n_min", "n_max"});
            s.coupling = in.positive("/spectrum/coupling", 1.0);
            s.n_min = in.integer("/spectrum/n_min", 1, 1);
        } else if (s.model == "oscillator") {
            in.object("/spectrum", {"model", "q2", "beta", "n_min", "n_max", "oracle", "oracle_tol"});
            s.q2 = in.positive("/spectrum/q2");
            s.beta = in.number("/spectrum/beta");
            if (!(s.beta > 1.0 && s.beta <= 2.0)) in.fail("/spectrum/beta", "beta must satisfy 1 < beta <= 2");
            s.n_min = in.integer("/spectrum/n_min", 0, 0);
            s.oracle = in.boolean("/spectrum/oracle", false);
            s.oracle_tol = in.positive("/spectrum/oracle_tol", 1e-12);
            if (s.oracle_tol > 1e-4) in.fail("/spectrum/oracle_tol", "oracle_tol must not exceed 1e-4");
        } else {
            in.fail("/spectrum/model", "unknown spectrum model '" + s.model + "' (bohr, oscillator)");
        }
        s.n_max = in.integer("/spectrum/n_max");
        if (s.n_max < s.n_min) in.fail("/spectrum/n_max", "n_max must not be below n_min");
        cfg.spectrum = s;
    }

    if (in.has("/kernel")) {
        in.object("/kernel", {"separations", "durations", "slices", "residual_probe"});
        KernelConfig k;
        k.separations = in.numbers("/kernel/separations");
        for (std::size_t i = 0; i < k.separations.size(); ++i) {
            if (k.separations[i] < 0.0) in.fail("/kernel/separations/" + std::to_string(i), "separations must be non-negative");
        }
        k.durations = in.numbers("/kernel/durations");
        for (std::size_t i = 0; i < k.durations.size(); ++i) {
            if (!(k.durations[i] > 0.0)) in.fail("/kernel/durations/" + std::to_string(i), "durations must be positive");
        }
        k.slices = in.has("/kernel/slices") ? in.integers("/kernel/slices", 2) : std::vector<long>{};
        k.residual_probe = in.number("/kernel/residual_probe", 0.0);
        if (k.residual_probe < 0.0) in.fail("/kernel/residual_probe", "residual_probe must be non-negative");
        for (std::size_t i = 0; i < k.durations.size(); ++i) {
            if (k.residual_probe >= k.durations[i]) {
                in.fail("/kernel/residual_probe", "residual_probe must be shorter than every duration");
            }
        }
        cfg.kernel = k;
    }

    if (in.has("/verify")) {
        in.object("/verify", {"random_states", "parity_steps", "unitarity_steps", "dt"});
        VerifyConfig v;
        v.random_states = in.integer("/verify/random_states", 100, 1);
        v.parity_steps = in.integer("/verify/parity_steps", 1000, 1);
        v.unitarity_steps = in.integer("/verify/unitarity_steps", 10000, 1);
        v.dt = in.positive("/verify/dt", 0.01);
        cfg.verify = v;
    }

    if (in.has("/output")) {
        in.object("/output", {"directory"});
        cfg.output_directory = in.string("/output/directory", cfg.output_directory);
    }
    if (in.has("/seed")) {
        const json& seed = root.at("seed");
        if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
            in.fail("/seed", "seed must be a non-negative integer");
        }
        cfg.seed = seed.get<std::uint64_t>();
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw ConfigError(path, 0, "cannot open configuration file");
    std::ostringstream text;
    text << file.rdbuf();
    return parse_config(text.str(), path);
}

void require_block(const RunConfig& config, const std::string& subcommand) {
    const bool present = (subcommand == "evolve" && config.evolve) ||
                         (subcommand == "groundstate" && config.groundstate) ||
                         (subcommand == "spectrum" && config.spectrum) || (subcommand == "kernel" && config.kernel) ||
                         subcommand == "verify";
    if (!present) {
        throw ConfigError(config.source, 1, "missing required block '" + subcommand + "' for the " + subcommand +
                                                " subcommand");
    }
    if (subcommand == "evolve" && !config.initial_state) {
        throw ConfigError(config.source, 1, "missing required block 'initial_state' for the evolve subcommand");
    }
    if (subcommand == "kernel") {
        if (config.grid.dim == 2) {
            throw ConfigError(config.source, 1, "kernel tables support grid.dim 1 or 3");
        }
        if (config.grid.dim != 1 && !config.kernel->slices.empty()) {
            throw ConfigError(config.source, 1, "kernel.slices (composition) needs grid.dim 1");
        }
    }
}

}  // namespace fqm::cli
