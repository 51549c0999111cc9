#pragma once

// Shared test scaffolding: an in-memory campus seeded with fixture F1, temp
// directories, and child-process control for the multi-process suites.

#include "campus/campus.hpp"
#include "campus/clock.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <sys/types.h>

namespace campus::testkit {

std::filesystem::path source_dir();
std::filesystem::path campus_binary();
nlohmann::json f1_json();
/// 2011-02-14 09:00 UTC: inside term 2011-T1's change window.
TimePoint f1_now();

/// In-memory store, manual clock and a Campus over them.
struct World {
    explicit World(bool load_f1 = true);
    explicit World(const Fixture& fixture);

    std::unique_ptr<Database> db;
    ManualClock clock{f1_now()};
    std::unique_ptr<Campus> campus;

    Caller admin{PersonId("A100"), Role::AdminStaff};
    Caller academic{PersonId("L200"), Role::AcademicStaff};
    Caller s001{PersonId("S001"), Role::Student};
    Caller s002{PersonId("S002"), Role::Student};

    /// Login credentials issued for `person`, returning a live session token.
    std::string login(const PersonId& person);

  private:
    void init(const Fixture* fixture);
};

ServiceConfig fast_config();

class TempDir {
  public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

/// A child process with its stdout+stderr captured.
class Process {
  public:
    Process(const std::vector<std::string>& args, const std::map<std::string, std::string>& env = {});
    ~Process();
    Process(const Process&) = delete;
    Process& operator=(const Process&) = delete;

    /// Reads output until a line contains `needle`; returns that line.
    std::optional<std::string> wait_for_line(const std::string& needle, std::chrono::milliseconds timeout);
    void signal(int sig);
    /// Waits for exit; returns the exit status, or 128+signal.
    int wait(std::chrono::milliseconds timeout = std::chrono::seconds(10));
    bool running();
    const std::string& output() const { return output_; }

  private:
    pid_t pid_ = -1;
    int out_fd_ = -1;
    std::string output_;
    std::size_t scanned_ = 0;
    std::optional<int> status_;
};

/// Runs `campus` to completion; returns exit code and captured output.
std::pair<int, std::string> run_cli(const std::vector<std::string>& args,
                                    const std::map<std::string, std::string>& env = {});

/// Both tiers as separate processes over a migrated store seeded with F1.
class Deployment {
  public:
    /// Migrates a fresh store and loads `fixture` (F1 when empty).
    explicit Deployment(int pbkdf2_iterations = 10000, const std::filesystem::path& fixture = {});
    ~Deployment();

    std::vector<std::string> cli_args() const;
    void start_app(const std::map<std::string, std::string>& env = {});
    void start_web();
    void kill_app(int sig = 9);
    void kill_web(int sig = 9);
    Process* app() { return app_.get(); }

    int app_port() const { return app_port_; }
    int web_port() const { return web_port_; }
    std::string reset_password(const std::string& person);
    const std::filesystem::path& data_dir() const { return data_; }

  private:
    TempDir dir_;
    std::filesystem::path data_;
    int pbkdf2_iterations_;
    std::unique_ptr<Process> app_, web_;
    int app_port_ = 0;
    int web_port_ = 0;
};

struct HttpResult {
    int status = 0;
    std::string body;
    std::string content_type;
    nlohmann::json json() const;
};

/// Minimal blocking HTTP client over cpp-httplib, one connection per call.
class Http {
  public:
    explicit Http(int port) : port_(port) {}
    HttpResult get(const std::string& path, const std::string& token = {}) const;
    HttpResult post(const std::string& path, const nlohmann::json& body, const std::string& token = {}) const;
    HttpResult post_raw(const std::string& path, const std::string& body, const std::string& content_type,
                        const std::string& token = {}) const;
    HttpResult patch(const std::string& path, const nlohmann::json& body, const std::string& token = {}) const;
    HttpResult del(const std::string& path, const std::string& token = {}) const;
    HttpResult request(const std::string& method, const std::string& path, const std::string& body,
                       const std::string& token) const;

  private:
    int port_;
};

/// Random single-program fixture: 3-10 required units (plus unrequired
/// extras) with acyclic prerequisites, a random history for S001, and random
/// active/inactive offerings at LTK and SUV for 2011-T1. Staff A100 and L200
/// as in F1.
nlohmann::json random_fixture(std::mt19937_64& gen);

/// Brute-force eligibility over the fixture document, independent of the
/// domain code: unit code -> prerequisites met.
std::map<std::string, bool> oracle_eligible(const nlohmann::json& fixture, const std::string& student,
                                            const std::string& campus, const std::string& term,
                                            const std::set<std::string>& live = {});

/// Deterministic generator seeded from $CAMPUS_TEST_SEED when set.
std::mt19937_64 rng(std::uint64_t salt = 0);

}  // namespace campus::testkit
