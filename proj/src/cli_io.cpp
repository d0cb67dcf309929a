#include "pfsi/cli_io.hpp"

#include "json.hpp"

#include <openssl/evp.h>
#include <sys/utsname.h>

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <variant>

namespace pfsi {

const char* const pfsi_version = "0.1.0";

namespace {

namespace fs = std::filesystem;

using Target = std::variant<double*, int*, bool*, std::string*, std::uint64_t*>;

struct Key {
    const char* section;
    const char* name;
    Target target;
};

std::vector<Key> config_keys(SimulationConfig& c)
{
    ScenarioConfig& s = c.scenario;
    return {
        {"grid", "length_L", &c.grid.length_L},
        {"grid", "height_M", &c.grid.height_M},
        {"grid", "nx", &c.grid.nx},
        {"grid", "nz", &c.grid.nz},
        {"physics", "mu", &c.phys.mu},
        {"physics", "lambda", &c.phys.lambda},
        {"physics", "gamma", &c.phys.gamma},
        {"scheme", "eps", &c.scheme.eps},
        {"scheme", "delta", &c.scheme.delta},
        {"scheme", "dt_window", &c.scheme.dt_window},
        {"scheme", "dt_inner", &c.scheme.dt_inner},
        {"scheme", "kappa_contact", &c.scheme.kappa_contact},
        {"scheme", "a_diff", &c.scheme.a_diff},
        {"scheme", "b_reg", &c.scheme.b_reg},
        {"scheme", "beta_reg", &c.scheme.beta_reg},
        {"scheme", "eta_floor", &c.scheme.eta_floor},
        {"scheme", "tol_penalty", &c.scheme.tol_penalty},
        {"scenario", "id", &s.id},
        {"scenario", "variant", &s.variant},
        {"scenario", "h_max", &s.contact.h_max},
        {"scenario", "mass", &s.contact.mass},
        {"scenario", "initial_gap", &s.contact.delta},
        {"scenario", "graph_bound_H", &s.contact.H},
        {"scenario", "force", &s.force},
        {"scenario", "decay_rate", &s.decay_rate},
        {"scenario", "kappa", &s.kappa},
        {"scenario", "alpha", &s.alpha},
        {"scenario", "C_holder", &s.C_holder},
        {"scenario", "eq_height", &s.eq_height},
        {"scenario", "eq_density", &s.eq_density},
        {"scenario", "v0", &s.v0},
        {"output", "T", &c.T},
        {"output", "output_every", &c.output_every},
        {"output", "checkpoint_every", &c.checkpoint_every},
        {"output", "stop_on_detachment", &c.stop_on_detachment},
        {"output", "energy_window_tol", &c.energy_window_tol},
        {"output", "seed", &c.seed},
    };
}

const std::set<std::string> sections = {"grid", "physics", "scheme", "scenario", "output"};

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <class T>
bool parse_number(const std::string& v, T& out)
{
    const char* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    return ec == std::errc() && p == end;
}

void assign(const Key& k, const std::string& v)
{
    auto fail = [&](const char* what) {
        throw InputError("[" + std::string(k.section) + "] " + k.name + ": expected " + what + ", got '" + v + "'");
    };
    std::visit(
        [&](auto* p) {
            using T = std::remove_pointer_t<decltype(p)>;
            if constexpr (std::is_same_v<T, std::string>) {
                if (v.empty())
                    fail("a non-empty word");
                *p = v;
            } else if constexpr (std::is_same_v<T, bool>) {
                if (v == "true")
                    *p = true;
                else if (v == "false")
                    *p = false;
                else
                    fail("true or false");
            } else if constexpr (std::is_same_v<T, double>) {
                if (!parse_number(v, *p) || !std::isfinite(*p))
                    fail("a finite number");
            } else {
                if (!parse_number(v, *p))
                    fail("an integer");
            }
        },
        k.target);
}

std::string value_text(const Target& t)
{
    return std::visit(
        [](auto* p) -> std::string {
            using T = std::remove_pointer_t<decltype(p)>;
            if constexpr (std::is_same_v<T, std::string>)
                return *p;
            else if constexpr (std::is_same_v<T, bool>)
                return *p ? "true" : "false";
            else if constexpr (std::is_same_v<T, double>) {
                char buf[64];
                auto [q, ec] = std::to_chars(buf, buf + sizeof buf, *p);  // shortest exact form
                (void)ec;
                return std::string(buf, q);
            }
            else
                return std::to_string(*p);
        },
        t);
}

void validate_all(const SimulationConfig& c)
{
    c.validate();
    const std::set<std::string> ids = {"equilibrium", "theorem2", "theorem3"};
    if (!ids.count(c.scenario.id))
        throw InputError("[scenario] id must be equilibrium, theorem2 or theorem3, got '" + c.scenario.id + "'");
    if (c.scenario.variant != "decaying_force" && c.scenario.variant != "constant_force")
        throw InputError("[scenario] variant must be decaying_force or constant_force");
    if (c.scenario.id == "theorem3" && !(c.scenario.kappa > 0 && c.scenario.kappa < 1))
        throw InputError("[scenario] kappa must lie in (0, 1)");
    if (c.scenario.id != "equilibrium" && !(c.scenario.contact.delta >= c.scheme.delta))
        throw InputError("[scenario] initial_gap must be at least [scheme] delta");
}

void put_u64(std::ostream& os, std::uint64_t v)
{
    char b[8];
    for (int k = 0; k < 8; ++k)
        b[k] = static_cast<char>((v >> (8 * k)) & 0xff);
    os.write(b, 8);
}

std::uint64_t get_u64(std::istream& is)
{
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8))
        throw IOError("checkpoint truncated");
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k)
        v |= std::uint64_t(b[k]) << (8 * k);
    return v;
}

void put_f64(std::ostream& os, double v)
{
    put_u64(os, std::bit_cast<std::uint64_t>(v));
}

double get_f64(std::istream& is)
{
    return std::bit_cast<double>(get_u64(is));
}

// Field2 is nx x nz column-major, i.e. nz rows of nx values already
template <class A>
void put_array(std::ostream& os, const A& a)
{
    for (Eigen::Index k = 0; k < a.size(); ++k)
        put_f64(os, a.data()[k]);
}

template <class A>
void get_array(std::istream& is, A& a)
{
    for (Eigen::Index k = 0; k < a.size(); ++k)
        a.data()[k] = get_f64(is);
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IOError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string csv_quote(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

SimulationConfig parse_config(std::string_view text)
{
    SimulationConfig c;
    const std::vector<Key> keys = config_keys(c);
    std::map<std::string, const Key*> index;
    for (const Key& k : keys)
        index[std::string(k.section) + "." + k.name] = &k;

    std::set<std::string> seen;
    std::string section;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(std::string_view(raw).substr(0, hash));
        if (line.empty())
            continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']')
                throw InputError(where + "malformed section header '" + line + "'");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!sections.count(section))
                throw InputError(where + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError(where + "expected 'key = value', got '" + line + "'");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (section.empty())
            throw InputError(where + "key '" + key + "' appears before any section header");
        const std::string dotted = section + "." + key;
        const auto it = index.find(dotted);
        if (it == index.end())
            throw InputError("[" + section + "] unknown key '" + key + "'");
        if (!seen.insert(dotted).second)
            throw InputError("[" + section + "] " + key + ": given twice");
        assign(*it->second, value);
    }
    if (!seen.count("scenario.id"))
        throw InputError("[scenario] id: required key missing");
    validate_all(c);
    return c;
}

SimulationConfig load_config(const fs::path& path)
{
    return parse_config(read_file(path));
}

std::string format_config(const SimulationConfig& cfg)
{
    SimulationConfig c = cfg;
    std::string out, section;
    for (const Key& k : config_keys(c)) {
        if (section != k.section) {
            section = k.section;
            out += (out.empty() ? "[" : "\n[") + section + "]\n";
        }
        out += std::string(k.name) + " = " + value_text(k.target) + "\n";
    }
    return out;
}

void apply_override(SimulationConfig& cfg, std::string_view dotted_key, std::string_view value)
{
    const std::string d(dotted_key);
    const auto dot = d.find('.');
    if (dot == std::string::npos)
        throw InputError("override key '" + d + "' must have the form section.key");
    for (const Key& k : config_keys(cfg))
        if (d == std::string(k.section) + "." + k.name) {
            assign(k, trim(value));
            validate_all(cfg);
            return;
        }
    throw InputError("[" + d.substr(0, dot) + "] unknown key '" + d.substr(dot + 1) + "'");
}

std::string format_double(double v)
{
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    (void)ec;
    return std::string(buf, p);
}

void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& records)
{
    for (std::size_t k = 0; k < diagnostics_columns.size(); ++k)
        os << (k ? "," : "") << diagnostics_columns[k];
    os << '\n';
    for (const auto& r : records) {
        const auto v = record_values(r);
        for (std::size_t k = 0; k < v.size(); ++k)
            os << (k ? "," : "") << format_double(v[k]);
        os << '\n';
    }
    if (!os)
        throw IOError("writing diagnostics CSV failed");
}

std::vector<DiagnosticsRecord> read_diagnostics_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line))
        throw IOError("diagnostics CSV has no header");
    std::string expected;
    for (std::size_t k = 0; k < diagnostics_columns.size(); ++k)
        expected += (k ? "," : "") + std::string(diagnostics_columns[k]);
    if (trim(line) != expected)
        throw IOError("diagnostics CSV header does not match the schema");
    std::vector<DiagnosticsRecord> out;
    int row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (trim(line).empty())
            continue;
        std::array<double, 18> v{};
        std::size_t pos = 0;
        for (std::size_t k = 0; k < v.size(); ++k) {
            const auto comma = line.find(',', pos);
            const bool last = k + 1 == v.size();
            if (last != (comma == std::string::npos))
                throw IOError("diagnostics CSV row " + std::to_string(row) + " has the wrong column count");
            std::string cell = trim(std::string_view(line).substr(pos, last ? std::string::npos : comma - pos));
            if (!parse_number(cell, v[k]))
                throw IOError("diagnostics CSV row " + std::to_string(row) + ": bad number '" + cell + "'");
            pos = comma + 1;
        }
        out.push_back(record_from_values(v));
    }
    return out;
}

void write_contact_csv(std::ostream& os, const Trajectory& tr, const SimulationConfig& cfg)
{
    os << "t,probe_eta,pressure_integral,pressure_bound,pressure_margin,pressure_pass,contact_lhs,contact_rhs,"
          "contact_residual,contact_tolerance,force_cum,press_over_eta_cum,vert_kin_over_eta_cum,ln_term,"
          "floor_activations";
    for (int k = 0; k < 8; ++k)
        os << ",group" << k;
    for (int k = 0; k < 8; ++k)
        os << ",cap" << k;
    os << '\n';
    for (std::size_t r = 0; r < tr.records.size(); ++r) {
        const double t = tr.records[r].t;
        const PressureBoundCheck& p = tr.pressure[r];
        const TermBreakdown& b = tr.contact[r];
        const double tol = contact_tolerance(b, cfg.scheme.dt_inner, cfg.grid.dx(), cfg.grid.dz(), t);
        os << format_double(t) << ',' << format_double(tr.probe_eta[r]) << ',' << format_double(p.integral) << ','
           << format_double(p.bound) << ',' << format_double(p.margin) << ',' << (p.pass ? 1 : 0) << ','
           << format_double(b.lhs()) << ',' << format_double(b.rhs()) << ',' << format_double(b.residual()) << ','
           << format_double(tol) << ',' << format_double(b.force_cum) << ',' << format_double(b.press_over_eta_cum)
           << ',' << format_double(b.vert_kin_over_eta_cum) << ',' << format_double(b.ln_term) << ','
           << b.floor_activations;
        for (double g : b.groups)
            os << ',' << format_double(g);
        for (double c : b.caps)
            os << ',' << (b.caps_valid ? format_double(c) : "nan");
        os << '\n';
    }
    if (!os)
        throw IOError("writing contact CSV failed");
}

void write_lemma_csv(std::ostream& os, const std::vector<LemmaTrial>& trials)
{
    os << "lemma,trial,lhs,rhs,constant,tolerance,margin,pass,descriptor\n";
    for (const auto& t : trials)
        os << t.lemma << ',' << t.trial << ',' << format_double(t.lhs) << ',' << format_double(t.rhs) << ','
           << format_double(t.constant) << ',' << format_double(t.tolerance) << ',' << format_double(t.margin())
           << ',' << (t.pass ? 1 : 0) << ',' << csv_quote(t.descriptor) << '\n';
    if (!os)
        throw IOError("writing lemma CSV failed");
}

void write_checkpoint(std::ostream& os, const Checkpoint& c)
{
    const auto nx = c.fluid.rho.rows(), nz = c.fluid.rho.cols();
    if (c.beam.eta.size() != nx || c.beam.eta_t.size() != nx || c.fluid.u1.rows() != nx ||
        c.fluid.u3.rows() != nx || c.fluid.u1.cols() != nz || c.fluid.u3.cols() != nz)
        throw InputError("checkpoint fields have inconsistent sizes");
    os.write("PFSI1", 5);
    put_u64(os, static_cast<std::uint64_t>(nx));
    put_u64(os, static_cast<std::uint64_t>(nz));
    put_u64(os, static_cast<std::uint64_t>(static_cast<std::int64_t>(c.window)));
    put_f64(os, c.t);
    put_array(os, c.beam.eta);
    put_array(os, c.beam.eta_t);
    put_array(os, c.fluid.rho);
    put_array(os, c.fluid.u1);
    put_array(os, c.fluid.u3);
    if (!os)
        throw IOError("writing checkpoint failed");
}

Checkpoint read_checkpoint(std::istream& is)
{
    char magic[5];
    if (!is.read(magic, 5) || std::string_view(magic, 5) != "PFSI1")
        throw IOError("not a PFSI1 checkpoint");
    const auto nx = static_cast<std::int64_t>(get_u64(is));
    const auto nz = static_cast<std::int64_t>(get_u64(is));
    if (nx <= 0 || nz <= 0 || nx > (1 << 20) || nz > (1 << 20))
        throw IOError("checkpoint has implausible dimensions");
    Checkpoint c;
    c.window = static_cast<int>(static_cast<std::int64_t>(get_u64(is)));
    c.t = get_f64(is);
    c.beam = BeamState(static_cast<int>(nx));
    c.fluid = FluidState(static_cast<int>(nx), static_cast<int>(nz));
    get_array(is, c.beam.eta);
    get_array(is, c.beam.eta_t);
    get_array(is, c.fluid.rho);
    get_array(is, c.fluid.u1);
    get_array(is, c.fluid.u3);
    return c;
}

void write_checkpoint(const fs::path& path, const Checkpoint& c)
{
    std::ostringstream ss(std::ios::binary);
    write_checkpoint(ss, c);
    write_file_atomic(path, ss.str());
}

Checkpoint read_checkpoint(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IOError("cannot open '" + path.string() + "'");
    try {
        return read_checkpoint(in);
    } catch (const IOError& e) {
        throw IOError(path.string() + ": " + e.what());
    }
}

std::string sha256_hex(std::string_view bytes)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw IOError("SHA-256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int k = 0; k < len; ++k) {
        out += hex[md[k] >> 4];
        out += hex[md[k] & 15];
    }
    return out;
}

std::string sha256_file(const fs::path& path)
{
    return sha256_hex(read_file(path));
}

void write_file_atomic(const fs::path& path, std::string_view content)
{
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IOError("cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out)
            throw IOError("cannot write '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec)
        throw IOError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

void write_manifest(const fs::path& dir, RunManifest m, const std::vector<std::string>& files)
{
    m.outputs.clear();
    for (const auto& f : files) {
        const fs::path p = dir / f;
        m.outputs.push_back({f, fs::file_size(p), sha256_file(p)});
    }
    nlohmann::ordered_json j;
    j["code_version"] = m.code_version;
    j["platform"] = m.platform;
    j["start_time"] = m.start_time;
    j["end_time"] = m.end_time;
    j["exit_status"] = m.exit_status;
    j["message"] = m.message;
    j["config"] = m.config;
    j["outputs"] = nlohmann::json::array();
    for (const auto& e : m.outputs)
        j["outputs"].push_back({{"path", e.path}, {"bytes", e.bytes}, {"sha256", e.sha256}});
    write_file_atomic(dir / "manifest.json", j.dump(2) + "\n");
}

RunManifest read_manifest(const fs::path& dir)
{
    const fs::path p = dir / "manifest.json";
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(p));
    } catch (const nlohmann::json::exception& e) {
        throw IOError(p.string() + ": " + e.what());
    }
    RunManifest m;
    m.code_version = j.value("code_version", "");
    m.platform = j.value("platform", "");
    m.start_time = j.value("start_time", "");
    m.end_time = j.value("end_time", "");
    m.exit_status = j.value("exit_status", -1);
    m.message = j.value("message", "");
    m.config = j.value("config", "");
    for (const auto& e : j.at("outputs"))
        m.outputs.push_back({e.at("path"), e.at("bytes"), e.at("sha256")});
    return m;
}

bool verify_manifest(const fs::path& dir)
{
    const RunManifest m = read_manifest(dir);
    for (const auto& e : m.outputs) {
        const fs::path p = dir / e.path;
        if (!fs::exists(p) || fs::file_size(p) != e.bytes || sha256_file(p) != e.sha256)
            return false;
    }
    return true;
}

std::string utc_now()
{
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string platform_fingerprint()
{
    utsname u{};
    std::string os = "unknown";
    if (uname(&u) == 0)
        os = std::string(u.sysname) + " " + u.release + " " + u.machine;
    std::string compiler;
#if defined(__clang__)
    compiler = "clang " __clang_version__;
#elif defined(__GNUC__)
    compiler = "gcc " __VERSION__;
#else
    compiler = "unknown compiler";
#endif
    const char* endian = std::endian::native == std::endian::little ? "little-endian" : "big-endian";
    return os + "; " + compiler + "; " + endian + "; eigen " + std::to_string(EIGEN_WORLD_VERSION) + "." +
           std::to_string(EIGEN_MAJOR_VERSION) + "." + std::to_string(EIGEN_MINOR_VERSION);
}

fs::path output_root(const fs::path& fallback)
{
    const char* env = std::getenv("PFSI_OUTPUT_DIR");
    return env && *env ? fs::path(env) : fallback;
}

std::string RunVerdict::summary() const
{
    std::string s;
    auto add = [&](const char* name, bool ok) { s += std::string(s.empty() ? "" : " ") + name + (ok ? "=ok" : "=FAIL"); };
    add("mass", mass_ok);
    add("energy", energy_ok);
    add("pressure", pressure_ok);
    add("penalty", penalty_ok);
    return s;
}

RunVerdict judge_run(const Trajectory& tr, const SimulationConfig& cfg)
{
    RunVerdict v;
    if (tr.records.empty())
        return v;
    const DiagnosticsRecord& first = tr.records.front();
    const double e0 = std::abs(first.energy());
    for (const auto& r : tr.records) {
        const double allowed = 1e-8 * first.mass + r.clipped_mass_cum;
        v.mass_ok = v.mass_ok && std::abs(r.mass - first.mass) <= allowed;
        v.energy_ok = v.energy_ok && r.energy_residual <= 1e-2 * e0;
    }
    for (const auto& p : tr.pressure)
        v.pressure_ok = v.pressure_ok && p.pass;
    v.penalty_ok = tr.penalty.sign_violations == 0 && tr.penalty.power_violations == 0 &&
                   tr.penalty.min_eta >= -cfg.scheme.tol_penalty;
    return v;
}

int run_to_directory(const SimulationConfig& cfg, const fs::path& dir, bool strict, std::ostream& log,
                     Trajectory* keep)
{
    RunManifest m;
    m.config = format_config(cfg);
    m.code_version = pfsi_version;
    m.platform = platform_fingerprint();
    m.start_time = utc_now();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw IOError("cannot create '" + dir.string() + "': " + ec.message());

    std::vector<std::string> files;
    Trajectory tr;
    try {
        tr = run_simulation(cfg);
    } catch (const InputError& e) {
        m.exit_status = exit_usage;
        m.message = e.what();
        m.end_time = utc_now();
        write_manifest(dir, m, files);
        log << "error: " << e.what() << '\n';
        return exit_usage;
    }

    {
        std::ostringstream ss;
        write_diagnostics_csv(ss, tr.records);
        write_file_atomic(dir / "diagnostics.csv", ss.str());
        files.push_back("diagnostics.csv");
    }
    {
        std::ostringstream ss;
        write_contact_csv(ss, tr, cfg);
        write_file_atomic(dir / "contact.csv", ss.str());
        files.push_back("contact.csv");
    }
    if (!tr.checkpoints.empty()) {
        fs::create_directories(dir / "checkpoints");
        for (const auto& c : tr.checkpoints) {
            char name[40];
            std::snprintf(name, sizeof name, "checkpoints/window_%07d.pfsi", c.window);
            write_checkpoint(dir / name, c);
            files.push_back(name);
        }
    }

    const RunVerdict verdict = judge_run(tr, cfg);
    int code = exit_ok;
    if (tr.aborted) {
        code = exit_numerical;
        m.message = tr.abort_message;
    } else if (strict && !verdict.ok()) {
        code = exit_check_failed;
        m.message = "strict checks failed: " + verdict.summary();
    } else {
        m.message = verdict.summary();
    }

    log << "scenario " << tr.scenario_id << (tr.tag.empty() ? "" : " [" + tr.tag + "]") << ": " << tr.windows_run
        << " windows, " << tr.records.size() << " records\n";
    if (tr.scenario_id != "equilibrium") {
        const auto td = tr.detachment_time();
        log << (td ? "detachment at t = " + format_double(*td) : std::string("no detachment observed")) << '\n';
    }
    log << "checks: " << verdict.summary() << '\n';
    if (tr.aborted)
        log << "aborted: " << tr.abort_message << '\n';

    m.exit_status = code;
    m.end_time = utc_now();
    write_manifest(dir, m, files);
    if (keep)
        *keep = std::move(tr);
    return code;
}

}  // namespace pfsi
