#include "support.hpp"

#include "campus/error.hpp"

#include <httplib.h>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

extern char** environ;

namespace campus::testkit {

std::filesystem::path source_dir() { return CAMPUS_SOURCE_DIR; }
std::filesystem::path campus_binary() { return CAMPUS_BINARY; }

nlohmann::json f1_json() {
    std::ifstream in(source_dir() / "fixtures" / "f1.json");
    return nlohmann::json::parse(in);
}

TimePoint f1_now() { return parse_timestamp("2011-02-14T09:00:00.000Z"); }

ServiceConfig fast_config() {
    ServiceConfig c;
    c.pbkdf2_iterations = 1000;
    return c;
}

World::World(bool load_f1) {
    if (load_f1) {
        auto f = Fixture::from_json(f1_json());
        init(&f);
    } else {
        init(nullptr);
    }
}

World::World(const Fixture& fixture) { init(&fixture); }

void World::init(const Fixture* fixture) {
    db = Database::open_in_memory();
    if (fixture) {
        auto tx = db->begin();
        load_fixture(tx, *fixture, clock);
        tx.commit();
    }
    campus = std::make_unique<Campus>(*db, clock, fast_config());
}

std::string World::login(const PersonId& person) {
    auto issued = campus->auth.reset_password(person);
    return campus->auth.login(issued.username, issued.password).token;
}

TempDir::TempDir() {
    auto base = std::filesystem::temp_directory_path();
    std::random_device rd;
    for (int i = 0; i < 100; ++i) {
        auto candidate = base / ("campus-test-" + std::to_string(rd()));
        if (std::filesystem::create_directory(candidate)) {
            path_ = candidate;
            return;
        }
    }
    throw std::runtime_error("cannot create temp dir");
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

Process::Process(const std::vector<std::string>& args, const std::map<std::string, std::string>& env) {
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0) throw std::runtime_error("pipe failed");
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, fds[1], 1);
    posix_spawn_file_actions_adddup2(&actions, fds[1], 2);

    std::vector<std::string> env_store;
    for (char** e = environ; *e; ++e) {
        std::string kv = *e;
        auto key = kv.substr(0, kv.find('='));
        if (!env.count(key)) env_store.push_back(kv);
    }
    for (const auto& [k, v] : env) env_store.push_back(k + "=" + v);
    std::vector<char*> envp, argv;
    for (auto& s : env_store) envp.push_back(s.data());
    envp.push_back(nullptr);
    std::vector<std::string> arg_store = args;
    for (auto& s : arg_store) argv.push_back(s.data());
    argv.push_back(nullptr);

    int rc = posix_spawn(&pid_, argv[0], &actions, nullptr, argv.data(), envp.data());
    posix_spawn_file_actions_destroy(&actions);
    ::close(fds[1]);
    out_fd_ = fds[0];
    if (rc != 0) {
        ::close(out_fd_);
        throw std::runtime_error("spawn failed: " + args[0]);
    }
}

Process::~Process() {
    if (running()) {
        signal(SIGKILL);
        wait();
    }
    if (out_fd_ >= 0) ::close(out_fd_);
}

std::optional<std::string> Process::wait_for_line(const std::string& needle, std::chrono::milliseconds timeout) {
    auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
        std::size_t pos;
        while ((pos = output_.find('\n', scanned_)) != std::string::npos) {
            auto line = output_.substr(scanned_, pos - scanned_);
            scanned_ = pos + 1;
            if (line.find(needle) != std::string::npos) return line;
        }
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) return std::nullopt;
        pollfd p{out_fd_, POLLIN, 0};
        if (::poll(&p, 1, static_cast<int>(left.count())) <= 0) continue;
        char buf[4096];
        auto n = ::read(out_fd_, buf, sizeof buf);
        if (n <= 0) return std::nullopt;
        output_.append(buf, static_cast<std::size_t>(n));
    }
}

void Process::signal(int sig) {
    if (pid_ > 0 && !status_) ::kill(pid_, sig);
}

bool Process::running() {
    if (status_ || pid_ <= 0) return false;
    int st = 0;
    auto r = ::waitpid(pid_, &st, WNOHANG);
    if (r == pid_) {
        status_ = WIFEXITED(st) ? WEXITSTATUS(st) : 128 + WTERMSIG(st);
        return false;
    }
    return true;
}

int Process::wait(std::chrono::milliseconds timeout) {
    auto deadline = std::chrono::steady_clock::now() + timeout;
    while (running()) {
        if (std::chrono::steady_clock::now() > deadline) {
            signal(SIGKILL);
            int st = 0;
            ::waitpid(pid_, &st, 0);
            status_ = 128 + SIGKILL;
            break;
        }
        // Drain output so the child never blocks on a full pipe.
        pollfd p{out_fd_, POLLIN, 0};
        if (::poll(&p, 1, 10) > 0) {
            char buf[4096];
            auto n = ::read(out_fd_, buf, sizeof buf);
            if (n > 0) output_.append(buf, static_cast<std::size_t>(n));
        }
    }
    char buf[4096];
    ssize_t n;
    pollfd p{out_fd_, POLLIN, 0};
    while (::poll(&p, 1, 0) > 0 && (n = ::read(out_fd_, buf, sizeof buf)) > 0) {
        output_.append(buf, static_cast<std::size_t>(n));
    }
    return *status_;
}

std::pair<int, std::string> run_cli(const std::vector<std::string>& args,
                                    const std::map<std::string, std::string>& env) {
    std::vector<std::string> full{campus_binary().string()};
    full.insert(full.end(), args.begin(), args.end());
    Process p(full, env);
    int code = p.wait(std::chrono::seconds(60));
    return {code, p.output()};
}

namespace {

int port_from(const std::optional<std::string>& line) {
    if (!line) throw std::runtime_error("server did not report a listening address");
    return std::stoi(line->substr(line->rfind(':') + 1));
}

}  // namespace

Deployment::Deployment(int pbkdf2_iterations, const std::filesystem::path& fixture)
    : data_(dir_.path() / "data"), pbkdf2_iterations_(pbkdf2_iterations) {
    auto args = cli_args();
    args.push_back("migrate");
    if (run_cli(args).first != 0) throw std::runtime_error("migrate failed");
    args = cli_args();
    args.push_back("load-fixture");
    args.push_back((fixture.empty() ? source_dir() / "fixtures" / "f1.json" : fixture).string());
    auto [code, out] = run_cli(args);
    if (code != 0) throw std::runtime_error("load-fixture failed: " + out);
}

Deployment::~Deployment() {
    if (web_) kill_web(SIGTERM);
    if (app_) kill_app(SIGTERM);
}

std::vector<std::string> Deployment::cli_args() const {
    return {"--set", "data.dir=" + data_.string(),
            "--set", "letters.dir=" + (source_dir() / "config" / "letters").string(),
            "--set", "clock.today=2011-02-14",
            "--set", "security.pbkdf2_iterations=" + std::to_string(pbkdf2_iterations_),
            "--set", "app_server.listen=127.0.0.1:" + std::to_string(app_port_),
            "--set", "web.listen=127.0.0.1:" + std::to_string(web_port_),
            "--set", "web.app_server_addr=127.0.0.1:" + std::to_string(app_port_)};
}

void Deployment::start_app(const std::map<std::string, std::string>& env) {
    std::vector<std::string> args{campus_binary().string()};
    auto rest = cli_args();
    args.insert(args.end(), rest.begin(), rest.end());
    args.push_back("serve-app");
    app_ = std::make_unique<Process>(args, env);
    app_port_ = port_from(app_->wait_for_line("listening on", std::chrono::seconds(10)));
}

void Deployment::start_web() {
    std::vector<std::string> args{campus_binary().string()};
    auto rest = cli_args();
    args.insert(args.end(), rest.begin(), rest.end());
    args.push_back("serve-web");
    web_ = std::make_unique<Process>(args);
    web_port_ = port_from(web_->wait_for_line("listening on", std::chrono::seconds(10)));
}

void Deployment::kill_app(int sig) {
    if (!app_) return;
    app_->signal(sig);
    app_->wait();
    app_.reset();
}

void Deployment::kill_web(int sig) {
    if (!web_) return;
    web_->signal(sig);
    web_->wait();
    web_.reset();
}

std::string Deployment::reset_password(const std::string& person) {
    auto args = cli_args();
    args.push_back("reset-password");
    args.push_back(person);
    auto [code, out] = run_cli(args);
    if (code != 0) throw std::runtime_error("reset-password failed: " + out);
    auto pos = out.find("password: ");
    return out.substr(pos + 10, out.find('\n', pos) - pos - 10);
}

nlohmann::json HttpResult::json() const { return nlohmann::json::parse(body); }

HttpResult Http::request(const std::string& method, const std::string& path, const std::string& body,
                         const std::string& token) const {
    httplib::Client cli("127.0.0.1", port_);
    cli.set_connection_timeout(5);
    cli.set_read_timeout(30);
    httplib::Headers headers;
    if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
    httplib::Result r;
    if (method == "GET") r = cli.Get(path, headers);
    else if (method == "DELETE") r = cli.Delete(path, headers);
    else if (method == "POST") r = cli.Post(path, headers, body, "application/json");
    else if (method == "PATCH") r = cli.Patch(path, headers, body, "application/json");
    else if (method == "PUT") r = cli.Put(path, headers, body, "application/json");
    if (!r) return HttpResult{0, httplib::to_string(r.error()), ""};
    return HttpResult{r->status, r->body, r->get_header_value("Content-Type")};
}

HttpResult Http::get(const std::string& path, const std::string& token) const { return request("GET", path, "", token); }

HttpResult Http::post(const std::string& path, const nlohmann::json& body, const std::string& token) const {
    return request("POST", path, body.dump(), token);
}

HttpResult Http::post_raw(const std::string& path, const std::string& body, const std::string& content_type,
                          const std::string& token) const {
    httplib::Client cli("127.0.0.1", port_);
    httplib::Headers headers;
    if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
    auto r = cli.Post(path, headers, body, content_type);
    if (!r) return HttpResult{0, httplib::to_string(r.error()), ""};
    return HttpResult{r->status, r->body, r->get_header_value("Content-Type")};
}

HttpResult Http::patch(const std::string& path, const nlohmann::json& body, const std::string& token) const {
    return request("PATCH", path, body.dump(), token);
}

HttpResult Http::del(const std::string& path, const std::string& token) const {
    return request("DELETE", path, "", token);
}

std::mt19937_64 rng(std::uint64_t salt) {
    std::uint64_t seed = 20110214;
    if (const char* s = std::getenv("CAMPUS_TEST_SEED")) seed = std::strtoull(s, nullptr, 10);
    return std::mt19937_64(seed ^ (salt * 0x9e3779b97f4a7c15ULL));
}

}  // namespace campus::testkit

namespace campus::testkit {

nlohmann::json random_fixture(std::mt19937_64& gen) {
    using nlohmann::json;
    auto coin = [&](double p) { return std::uniform_real_distribution<double>(0, 1)(gen) < p; };
    int required = std::uniform_int_distribution<int>(3, 10)(gen);
    int extras = std::uniform_int_distribution<int>(0, 3)(gen);
    int total = required + extras;

    std::vector<std::string> codes;
    for (int i = 0; i < total; ++i) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "U%03d", 100 + i);
        codes.emplace_back(buf);
    }
    json units = json::array();
    for (int i = 0; i < total; ++i) {
        json prereqs = json::array();
        for (int j = 0; j < i; ++j) {
            if (coin(0.25)) prereqs.push_back(codes[j]);
        }
        units.push_back({{"code", codes[i]}, {"name", "Unit " + codes[i]}, {"prerequisites", prereqs}});
    }
    std::vector<std::string> shuffled = codes;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    static const char* kCategories[] = {"Core", "Major", "Service"};
    json reqs = json::array();
    for (int i = 0; i < required; ++i) {
        reqs.push_back({{"unit_code", shuffled[i]}, {"category", kCategories[gen() % 3]}});
    }

    static const char* kGrades[] = {"A", "B+", "B", "C+", "C", "D", "F"};
    json history = json::array();
    for (const auto& c : codes) {
        if (coin(0.4)) history.push_back({{"unit_code", c}, {"grade", kGrades[gen() % 7]}, {"campus", "LTK"}, {"term", "2010-T2"}});
    }

    json offerings = json::array();
    for (const auto& campus : {"LTK", "SUV"}) {
        for (const auto& c : codes) {
            if (coin(0.6)) {
                offerings.push_back({{"unit_code", c}, {"campus", campus}, {"term", "2011-T1"}, {"active", coin(0.8)}});
            }
        }
    }
    json fees = json::array();
    for (const auto& c : codes) fees.push_back({{"unit_code", c}, {"amount", "100.00"}});

    return json{
        {"programs", json::array({{{"id", "P1"}, {"name", "Random Program"}, {"requirements", reqs}}})},
        {"units", units},
        {"terms", json::array({{{"year", 2010}, {"index", "T2"}, {"change_window_end", "2010-07-23"}},
                               {{"year", 2011}, {"index", "T1"}, {"change_window_end", "2011-03-15"}, {"is_current", true}},
                               {{"year", 2011}, {"index", "T2"}, {"change_window_end", "2011-07-22"}}})},
        {"offerings", offerings},
        {"students", json::array({{{"id", "S001"}, {"name", "Random Student"}, {"program_id", "P1"},
                                   {"citizenship", "Fiji"}, {"history", history}}})},
        {"staff", json::array({{{"id", "A100"}, {"name", "Admin"}, {"role", "AdminStaff"},
                                {"department", "Computing Science"}, {"campus", "LTK"}},
                               {{"id", "L200"}, {"name", "Lecturer"}, {"role", "AcademicStaff"},
                                {"department", "Computing Science"}, {"campus", "LTK"}}})},
        {"timetable", json::array()},
        {"fees", fees},
    };
}

std::map<std::string, bool> oracle_eligible(const nlohmann::json& fixture, const std::string& student,
                                            const std::string& campus, const std::string& term,
                                            const std::set<std::string>& live) {
    static const std::set<std::string> kPassing{"A", "B+", "B", "C+", "C"};
    std::set<std::string> passed;
    std::string program;
    for (const auto& s : fixture["students"]) {
        if (s["id"] != student) continue;
        program = s["program_id"];
        for (const auto& g : s["history"]) {
            if (kPassing.count(g["grade"].get<std::string>())) passed.insert(g["unit_code"].get<std::string>());
        }
    }
    std::set<std::string> required;
    for (const auto& p : fixture["programs"]) {
        if (p["id"] != program) continue;
        for (const auto& r : p["requirements"]) required.insert(r["unit_code"].get<std::string>());
    }
    std::set<std::string> offered;
    for (const auto& o : fixture["offerings"]) {
        if (o["campus"] == campus && o["term"] == term && o.value("active", true)) offered.insert(o["unit_code"].get<std::string>());
    }
    std::map<std::string, bool> out;
    for (const auto& u : fixture["units"]) {
        std::string code = u["code"];
        if (!required.count(code) || passed.count(code) || live.count(code) || !offered.count(code)) continue;
        bool met = true;
        for (const auto& p : u["prerequisites"]) met = met && passed.count(p.get<std::string>()) > 0;
        out[code] = met;
    }
    return out;
}

}  // namespace campus::testkit
