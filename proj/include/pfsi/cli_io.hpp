#ifndef PFSI_CLI_IO_HPP
#define PFSI_CLI_IO_HPP

#include "pfsi/lemma_suite.hpp"
#include "pfsi/splitting_driver.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pfsi {

// File system failures; the message carries the path.
class IOError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// `key = value` lines under [grid], [physics], [scheme], [scenario], [output];
// '#' starts a comment. Only [scenario] id is required. Throws InputError
// naming the section and key.
SimulationConfig parse_config(std::string_view text);
SimulationConfig load_config(const std::filesystem::path& path);

// Every key with its resolved value, in a form parse_config reads back.
std::string format_config(const SimulationConfig& cfg);

// Sets `section.key` from its text form and re-validates; errors as parse_config.
void apply_override(SimulationConfig& cfg, std::string_view dotted_key, std::string_view value);

// 17 significant digits; reads back to the same double.
std::string format_double(double v);

void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& records);
std::vector<DiagnosticsRecord> read_diagnostics_csv(std::istream& is);

// Per record: probe value, pressure bound check, contact balance with its
// tolerance, the eight term groups and their caps.
void write_contact_csv(std::ostream& os, const Trajectory& tr, const SimulationConfig& cfg);

// lemma, trial, lhs, rhs, constant, tolerance, margin, pass, descriptor
void write_lemma_csv(std::ostream& os, const std::vector<LemmaTrial>& trials);

// "PFSI1", then little-endian int64 nx, nz, window and float64 t, then
// float64 eta[nx], eta_t[nx], rho, u1, u3 with each field stored as nz rows
// of nx values (row j is the layer z_j).
void write_checkpoint(std::ostream& os, const Checkpoint& c);
Checkpoint read_checkpoint(std::istream& is);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint read_checkpoint(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Writes via a temporary file in the same directory and a rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

struct ManifestEntry {
    std::string path;  // relative to the run directory
    std::uintmax_t bytes = 0;
    std::string sha256;
};

struct RunManifest {
    std::string config;  // format_config of the run
    std::string code_version;
    std::string platform;
    std::string start_time;  // UTC, ISO 8601
    std::string end_time;
    int exit_status = 0;
    std::string message;
    std::vector<ManifestEntry> outputs;
};

// Checksums every listed file under dir and writes dir/manifest.json.
void write_manifest(const std::filesystem::path& dir, RunManifest m, const std::vector<std::string>& files);
RunManifest read_manifest(const std::filesystem::path& dir);
// true when every entry's size and checksum match the file on disk
bool verify_manifest(const std::filesystem::path& dir);

std::string utc_now();
std::string platform_fingerprint();
extern const char* const pfsi_version;

// Output root: $PFSI_OUTPUT_DIR if set, else `fallback`.
std::filesystem::path output_root(const std::filesystem::path& fallback);

enum ExitCode { exit_ok = 0, exit_usage = 1, exit_numerical = 2, exit_check_failed = 3 };

// Strict-mode verdict for a finished run: mass, energy inequality (1e-2 E(0)),
// pressure bound, penalty sign, power and eta >= -tol_penalty. The contact
// balance needs a second run at doubled resolution and is not judged here.
struct RunVerdict {
    bool mass_ok = true;
    bool energy_ok = true;
    bool pressure_ok = true;
    bool penalty_ok = true;
    bool ok() const { return mass_ok && energy_ok && pressure_ok && penalty_ok; }
    std::string summary() const;
};

RunVerdict judge_run(const Trajectory& tr, const SimulationConfig& cfg);

// Runs a config and writes diagnostics.csv, contact.csv, checkpoints and
// manifest.json into dir. Returns the exit code; the trajectory is copied to
// `keep` when given.
int run_to_directory(const SimulationConfig& cfg, const std::filesystem::path& dir, bool strict,
                     std::ostream& log, Trajectory* keep = nullptr);

// The CLI; argv[0] is the program name.
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace pfsi

#endif
