#include "eplab/model/params.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "eplab/errors.hpp"
#include "eplab/format.hpp"

namespace eplab::model {

namespace {

std::string_view trim(std::string_view s)
{
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

double parse_number(std::string_view key, std::string_view text)
{
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v))
        throw DomainError("config: malformed value for '" + std::string(key) + "': '" +
                          std::string(text) + "'");
    return v;
}

double* field_for(ModelParams& p, std::string_view key)
{
    if (key == "gamma_a") return &p.gamma_a;
    if (key == "gamma_ph") return &p.gamma_ph;
    if (key == "gamma_d") return &p.gamma_d;
    if (key == "gamma_p") return &p.gamma_p;
    if (key == "gamma_cor") return &p.gamma_cor;
    if (key == "omega_r") return &p.omega_r;
    if (key == "n_mol") return &p.n_mol;
    return nullptr;
}

}  // namespace

void ModelParams::validate() const
{
    const std::pair<const char*, double> rates[] = {
        {"gamma_a", gamma_a},     {"gamma_ph", gamma_ph}, {"gamma_d", gamma_d},
        {"gamma_p", gamma_p},     {"gamma_cor", gamma_cor}, {"omega_r", omega_r},
    };
    for (const auto& [name, value] : rates) {
        if (!std::isfinite(value) || value < 0.0)
            throw DomainError(std::string(name) + " must be finite and >= 0, got " +
                              format_double(value));
    }
    if (!std::isfinite(n_mol) || n_mol < 2.0 || std::floor(n_mol) != n_mol)
        throw DomainError("n_mol must be an integer >= 2, got " + format_double(n_mol));
}

double ModelParams::sqrt_n() const { return std::sqrt(n_mol); }

ModelParams paper_defaults()
{
    ModelParams p;
    p.gamma_a = 5e-5;
    p.gamma_ph = 5e-4;
    p.gamma_d = 2e-5;
    p.gamma_p = 0.0;
    p.gamma_cor = 0.0;
    p.omega_r = 1e-5;
    p.n_mol = 1e6;
    return p;
}

double gamma_sigma(const ModelParams& p)
{
    return p.gamma_ph + p.gamma_p / 2.0 + p.gamma_d / 2.0;
}

DerivedRates derive_rates(const ModelParams& p)
{
    const double total = p.gamma_p + p.gamma_d;
    if (total == 0.0)
        throw DegeneratePumpError("gamma_p + gamma_d = 0: field-free inversion undefined");
    return {gamma_sigma(p), (p.gamma_p - p.gamma_d) / total};
}

double pump_from_d0(const ModelParams& p, double d0)
{
    if (!(d0 >= -1.0) || !(d0 < 1.0))
        throw DomainError("d0 must lie in [-1, 1), got " + format_double(d0));
    return p.gamma_d * (1.0 + d0) / (1.0 - d0);
}

ModelParams with_d0(ModelParams p, double d0)
{
    p.gamma_p = pump_from_d0(p, d0);
    return p;
}

ModelParams parse_config(std::string_view text, ModelParams base)
{
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        if (line.empty() || line.front() == '#')
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw DomainError("config line " + std::to_string(line_no) + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        double* slot = field_for(base, key);
        if (!slot)
            throw DomainError("config line " + std::to_string(line_no) + ": unknown key '" +
                              std::string(key) + "'");
        *slot = parse_number(key, value);
    }
    base.validate();
    return base;
}

ModelParams load_config(const std::filesystem::path& path, ModelParams base)
{
    std::ifstream in(path);
    if (!in)
        throw DomainError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), base);
}

std::string format_config(const ModelParams& p)
{
    std::string out;
    auto put = [&](const char* key, double v) {
        out += key;
        out += " = ";
        out += format_double(v);
        out += '\n';
    };
    put("gamma_a", p.gamma_a);
    put("gamma_ph", p.gamma_ph);
    put("gamma_d", p.gamma_d);
    put("gamma_p", p.gamma_p);
    put("gamma_cor", p.gamma_cor);
    put("omega_r", p.omega_r);
    put("n_mol", p.n_mol);
    return out;
}

std::ostream& operator<<(std::ostream& os, const ModelParams& p)
{
    return os << "{gamma_a=" << p.gamma_a << ", gamma_ph=" << p.gamma_ph
              << ", gamma_d=" << p.gamma_d << ", gamma_p=" << p.gamma_p
              << ", gamma_cor=" << p.gamma_cor << ", omega_r=" << p.omega_r
              << ", n_mol=" << p.n_mol << '}';
}

}  // namespace eplab::model
