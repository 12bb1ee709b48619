// config.hpp — Scenario configuration: INI-style parsing, serialization, sweeps
//
// Sections: [kernel], [control], [grid], [initial], [sweep], plus [output]
// for the destination path and [units] for the declared base rate. All
// frequencies are in units of base_rate and times in 1/base_rate.

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinbath/control.hpp"
#include "spinbath/csv.hpp"
#include "spinbath/grid.hpp"
#include "spinbath/kernels.hpp"
#include "spinbath/tcl.hpp"

namespace spinbath {

struct SweepAxis {
    std::string parameter; // "section.key", e.g. "kernel.gamma0"
    std::vector<double> values;
};

struct ScenarioConfig {
    KernelSpec kernel = ExponentialKernel{1.0, 1.0};
    PulseSequence control = PulseSequence::off();
    TimeGrid grid{1.0, 100};
    QubitState initial = QubitState::excited();
    std::string output_path;
    std::uint64_t seed = 0;
    double base_rate = 1.0;
    std::optional<SweepAxis> sweep;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

inline double parse_number(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad number for " + what + ": '" + text + "'");
    }
    if (used != text.size())
        throw std::invalid_argument("config: trailing characters in " + what + ": '" + text + "'");
    if (!std::isfinite(value))
        throw std::invalid_argument("config: " + what + " must be finite");
    return value;
}

inline std::vector<double> parse_number_list(std::string text, const std::string& what) {
    for (char& c : text)
        if (c == ',') c = ' ';
    std::istringstream in(text);
    std::vector<double> values;
    std::string token;
    while (in >> token) values.push_back(parse_number(token, what));
    return values;
}

// Raw section/key/value view of the file, with consumption tracking so
// unknown keys are reported instead of silently ignored.
class RawConfig {
  public:
    explicit RawConfig(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        std::string section;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto comment = line.find_first_of("#;");
            if (comment != std::string::npos) line.erase(comment);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw std::invalid_argument("config line " + std::to_string(line_no) +
                                                ": malformed section header");
                section = trim(line.substr(1, line.size() - 2));
                sections_.try_emplace(section);
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": expected key = value");
            if (section.empty())
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": key outside any section");
            const std::string key = trim(line.substr(0, eq));
            sections_[section][key] = trim(line.substr(eq + 1));
        }
    }

    bool has_section(const std::string& s) const { return sections_.count(s) != 0; }

    std::optional<std::string> get(const std::string& section, const std::string& key) {
        auto sec = sections_.find(section);
        if (sec == sections_.end()) return std::nullopt;
        auto it = sec->second.find(key);
        if (it == sec->second.end()) return std::nullopt;
        consumed_.insert(section + "." + key);
        return it->second;
    }

    std::string require(const std::string& section, const std::string& key) {
        auto v = get(section, key);
        if (!v)
            throw std::invalid_argument("config: missing required key '" + key +
                                        "' in section [" + section + "]");
        return *v;
    }

    void check_fully_consumed(const std::set<std::string>& known_sections) const {
        for (const auto& [section, keys] : sections_) {
            if (!known_sections.count(section))
                throw std::invalid_argument("config: unknown section [" + section + "]");
            for (const auto& [key, value] : keys)
                if (!consumed_.count(section + "." + key))
                    throw std::invalid_argument("config: unknown key '" + key +
                                                "' in section [" + section + "]");
        }
    }

  private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
    std::set<std::string> consumed_;
};

} // namespace detail

inline ScenarioConfig parse_config(const std::string& text) {
    detail::RawConfig raw(text);
    ScenarioConfig cfg;

    if (auto base = raw.get("units", "base_rate")) {
        cfg.base_rate = detail::parse_number(*base, "units.base_rate");
        if (!(cfg.base_rate > 0.0))
            throw std::invalid_argument("config: units.base_rate must be > 0");
    }

    const std::string type = raw.require("kernel", "type");
    if (type == "exponential") {
        cfg.kernel = ExponentialKernel{
            detail::parse_number(raw.require("kernel", "gamma"), "kernel.gamma"),
            detail::parse_number(raw.require("kernel", "gamma0"), "kernel.gamma0")};
    } else if (type == "box") {
        const double n = detail::parse_number(raw.require("kernel", "n"), "kernel.n");
        if (n < 1.0 || n != std::floor(n))
            throw std::invalid_argument("config: kernel.n must be a positive integer");
        cfg.kernel = BoxKernel{
            detail::parse_number(raw.require("kernel", "acal"), "kernel.acal"),
            static_cast<std::size_t>(n),
            detail::parse_number(raw.require("kernel", "omega"), "kernel.omega")};
    } else if (type == "gaussian-bath") {
        const double n = detail::parse_number(raw.require("kernel", "n"), "kernel.n");
        if (n < 1.0 || n != std::floor(n))
            throw std::invalid_argument("config: kernel.n must be a positive integer");
        cfg.kernel = GaussianBathKernel{
            detail::parse_number(raw.require("kernel", "acal"), "kernel.acal"),
            static_cast<std::size_t>(n),
            detail::parse_number(raw.require("kernel", "nu"), "kernel.nu")};
    } else if (type == "tabulated") {
        const auto re = detail::parse_number_list(raw.require("kernel", "values_re"),
                                                  "kernel.values_re");
        const auto im = detail::parse_number_list(raw.require("kernel", "values_im"),
                                                  "kernel.values_im");
        if (re.size() != im.size() || re.empty())
            throw std::invalid_argument(
                "config: kernel.values_re and values_im must be nonempty and equal length");
        TabulatedKernel tab;
        tab.dt = detail::parse_number(raw.require("kernel", "dt"), "kernel.dt");
        for (std::size_t i = 0; i < re.size(); ++i) tab.values.emplace_back(re[i], im[i]);
        cfg.kernel = std::move(tab);
    } else {
        throw std::invalid_argument("config: unknown kernel.type '" + type + "'");
    }
    validate_kernel(cfg.kernel);

    if (auto seed = raw.get("control", "seed")) {
        try {
            cfg.seed = std::stoull(*seed);
        } catch (const std::exception&) {
            throw std::invalid_argument("config: bad control.seed '" + *seed + "'");
        }
    }
    const std::string mode = raw.get("control", "mode").value_or("off");
    if (mode == "off") {
        cfg.control = PulseSequence::off();
    } else if (mode == "constant" || mode == "random-rectangular") {
        PulseSequence seq;
        seq.mode = (mode == "constant") ? PulseMode::constant : PulseMode::random_rectangular;
        seq.tau = detail::parse_number(raw.require("control", "tau"), "control.tau");
        seq.kappa = detail::parse_number(raw.require("control", "kappa"), "control.kappa");
        seq.psi = detail::parse_number(raw.require("control", "psi"), "control.psi");
        seq.seed = cfg.seed;
        seq.validate();
        cfg.control = seq;
    } else {
        throw std::invalid_argument("config: unknown control.mode '" + mode + "'");
    }

    const double t_max = detail::parse_number(raw.require("grid", "t_max"), "grid.t_max");
    const double n_steps = detail::parse_number(raw.require("grid", "n_steps"), "grid.n_steps");
    if (n_steps < 2.0 || n_steps != std::floor(n_steps))
        throw std::invalid_argument("config: grid.n_steps must be an integer >= 2");
    cfg.grid = TimeGrid(t_max, static_cast<std::size_t>(n_steps));

    auto initial_value = [&raw](const char* key, double fallback) {
        const auto v = raw.get("initial", key);
        return v ? detail::parse_number(*v, std::string("initial.") + key) : fallback;
    };
    cfg.initial = QubitState::from_elements(
        initial_value("rho11", 1.0),
        Complex(initial_value("re_rho10", 0.0), initial_value("im_rho10", 0.0)));

    if (auto path = raw.get("output", "path")) cfg.output_path = *path;

    if (raw.has_section("sweep")) {
        SweepAxis axis;
        axis.parameter = raw.require("sweep", "parameter");
        axis.values = detail::parse_number_list(raw.require("sweep", "values"), "sweep.values");
        if (axis.values.empty())
            throw std::invalid_argument("config: sweep.values must be nonempty");
        cfg.sweep = std::move(axis);
    }

    raw.check_fully_consumed(
        {"kernel", "control", "grid", "initial", "output", "units", "sweep"});
    return cfg;
}

inline ScenarioConfig load_config_file(const std::string& path) {
    return parse_config(read_file(path));
}

// Canonical serialization; numbers use %.17g so parse(serialize(cfg)) is
// value-identical and re-serialization is byte-stable.
inline std::string serialize_config(const ScenarioConfig& cfg) {
    auto num = [](double x) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        return std::string(buf);
    };
    std::ostringstream out;
    out << "[units]\nbase_rate = " << num(cfg.base_rate) << "\n\n[kernel]\n";
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, ExponentialKernel>) {
                out << "type = exponential\ngamma = " << num(k.Gamma)
                    << "\ngamma0 = " << num(k.gamma0) << "\n";
            } else if constexpr (std::is_same_v<T, BoxKernel>) {
                out << "type = box\nacal = " << num(k.Acal) << "\nn = " << k.N
                    << "\nomega = " << num(k.Omega) << "\n";
            } else if constexpr (std::is_same_v<T, GaussianBathKernel>) {
                out << "type = gaussian-bath\nacal = " << num(k.Acal) << "\nn = " << k.N
                    << "\nnu = " << num(k.nu) << "\n";
            } else {
                out << "type = tabulated\ndt = " << num(k.dt) << "\nvalues_re =";
                for (const Complex& v : k.values) out << " " << num(v.real());
                out << "\nvalues_im =";
                for (const Complex& v : k.values) out << " " << num(v.imag());
                out << "\n";
            }
        },
        cfg.kernel);
    out << "\n[control]\n";
    switch (cfg.control.mode) {
        case PulseMode::off: out << "mode = off\n"; break;
        case PulseMode::constant:
        case PulseMode::random_rectangular:
            out << "mode = "
                << (cfg.control.mode == PulseMode::constant ? "constant"
                                                            : "random-rectangular")
                << "\ntau = " << num(cfg.control.tau) << "\nkappa = " << num(cfg.control.kappa)
                << "\npsi = " << num(cfg.control.psi) << "\n";
            break;
    }
    out << "seed = " << cfg.seed << "\n";
    out << "\n[grid]\nt_max = " << num(cfg.grid.t_max) << "\nn_steps = " << cfg.grid.n_steps
        << "\n";
    out << "\n[initial]\nrho11 = " << num(cfg.initial.rho11().real())
        << "\nre_rho10 = " << num(cfg.initial.rho10().real())
        << "\nim_rho10 = " << num(cfg.initial.rho10().imag()) << "\n";
    if (!cfg.output_path.empty()) out << "\n[output]\npath = " << cfg.output_path << "\n";
    if (cfg.sweep) {
        out << "\n[sweep]\nparameter = " << cfg.sweep->parameter << "\nvalues =";
        for (double v : cfg.sweep->values) out << " " << num(v);
        out << "\n";
    }
    return out.str();
}

// Set one numeric parameter addressed as "section.key" (the sweep axis).
inline void apply_override(ScenarioConfig& cfg, const std::string& parameter, double value) {
    if (!std::isfinite(value))
        throw std::invalid_argument("apply_override: value must be finite");
    auto as_count = [&](const char* what) {
        if (value < 1.0 || value != std::floor(value))
            throw std::invalid_argument(std::string("apply_override: ") + what +
                                        " must be a positive integer");
        return static_cast<std::size_t>(value);
    };

    if (parameter == "kernel.gamma" || parameter == "kernel.gamma0") {
        auto* k = std::get_if<ExponentialKernel>(&cfg.kernel);
        if (!k)
            throw std::invalid_argument("apply_override: " + parameter +
                                        " requires an exponential kernel");
        (parameter == "kernel.gamma" ? k->Gamma : k->gamma0) = value;
    } else if (parameter == "kernel.acal" || parameter == "kernel.omega" ||
               parameter == "kernel.nu" || parameter == "kernel.n") {
        if (auto* box = std::get_if<BoxKernel>(&cfg.kernel)) {
            if (parameter == "kernel.acal") box->Acal = value;
            else if (parameter == "kernel.omega") box->Omega = value;
            else if (parameter == "kernel.n") box->N = as_count("kernel.n");
            else throw std::invalid_argument("apply_override: box kernel has no nu");
        } else if (auto* gauss = std::get_if<GaussianBathKernel>(&cfg.kernel)) {
            if (parameter == "kernel.acal") gauss->Acal = value;
            else if (parameter == "kernel.nu") gauss->nu = value;
            else if (parameter == "kernel.n") gauss->N = as_count("kernel.n");
            else throw std::invalid_argument("apply_override: gaussian kernel has no omega");
        } else {
            throw std::invalid_argument("apply_override: " + parameter +
                                        " requires a box or gaussian-bath kernel");
        }
    } else if (parameter == "control.tau" || parameter == "control.kappa" ||
               parameter == "control.psi") {
        if (cfg.control.mode == PulseMode::off)
            throw std::invalid_argument("apply_override: control is off");
        if (parameter == "control.tau") cfg.control.tau = value;
        else if (parameter == "control.kappa") cfg.control.kappa = value;
        else cfg.control.psi = value;
        cfg.control.validate();
    } else if (parameter == "grid.t_max") {
        cfg.grid = TimeGrid(value, cfg.grid.n_steps);
    } else if (parameter == "grid.n_steps") {
        cfg.grid = TimeGrid(cfg.grid.t_max, as_count("grid.n_steps"));
    } else if (parameter == "initial.rho11") {
        cfg.initial = QubitState::from_elements(value, cfg.initial.rho10());
    } else {
        throw std::invalid_argument("apply_override: unsupported parameter '" + parameter + "'");
    }
    validate_kernel(cfg.kernel);
}

} // namespace spinbath
