// Ops CLI: storage migration, fixture loading, the two server tiers,
// password resets and report export.

#include "campus/app_client.hpp"
#include "campus/app_server.hpp"
#include "campus/config.hpp"
#include "campus/dispatcher.hpp"
#include "campus/error.hpp"
#include "campus/web_api.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <sstream>

using namespace campus;

namespace {

// Blocks SIGINT/SIGTERM in every thread started after this call so the main
// thread can collect them with sigwait.
sigset_t block_shutdown_signals() {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    return set;
}

void wait_for_shutdown(const sigset_t& set) {
    int sig = 0;
    sigwait(&set, &sig);
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::ValidationError, "cannot read " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ValidationError, path + " is not valid JSON: " + e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"campus information system operations"};
    app.require_subcommand(1);
    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("-c,--config", config_path, "configuration file")->check(CLI::ExistingFile);
    app.add_option("--set", overrides, "override a config key: section.key=value");

    auto* migrate_cmd = app.add_subcommand("migrate", "create or upgrade the data store");

    std::string fixture_path;
    auto* load_cmd = app.add_subcommand("load-fixture", "load reference data from a fixture file");
    load_cmd->add_option("file", fixture_path)->required()->check(CLI::ExistingFile);

    auto* app_cmd = app.add_subcommand("serve-app", "run the application-server tier");
    auto* web_cmd = app.add_subcommand("serve-web", "run the web tier");

    std::string person;
    auto* reset_cmd = app.add_subcommand("reset-password", "issue a new one-time password");
    reset_cmd->add_option("person_id", person)->required();

    std::string kind;
    std::map<std::string, std::string> filters;
    auto* report_cmd = app.add_subcommand("report", "print a report as CSV");
    report_cmd->add_option("kind", kind, "EnrollmentByUnit, ApplicationsByStatus or GradeDistribution")->required();
    for (const char* f : {"campus", "term", "program"}) {
        report_cmd->add_option_function<std::string>(std::string("--") + f,
                                                     [&filters, f](const std::string& v) { filters[f] = v; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        Config config = config_path.empty() ? Config{} : Config::load(config_path);
        for (const auto& o : overrides) {
            auto eq = o.find('=');
            if (eq == std::string::npos) fail(ErrorCode::ValidationError, "--set expects key=value, got " + o);
            config.set(o.substr(0, eq), o.substr(eq + 1));
        }

        if (*migrate_cmd) {
            int v = migrate(config.data_dir);
            std::cout << "schema version " << v << " at " << config.data_dir << '\n';
            return 0;
        }

        if (*web_cmd) {
            auto signals = block_shutdown_signals();
            AppClient client(wire::Endpoint::parse(config.web_app_server_addr), config.web_pool_size);
            WebServer web(client, WebOptions{wire::Endpoint::parse(config.web_listen), config.web_threads,
                                             config.web_static_dir});
            web.start();
            std::cout << "web tier listening on " << wire::Endpoint::parse(config.web_listen).host << ':' << web.port()
                      << std::endl;
            wait_for_shutdown(signals);
            web.stop();
            return 0;
        }

        auto clock = make_clock(config);
        auto db = Database::open(config.data_dir);
        Campus campus(*db, *clock, service_config(config));

        if (*load_cmd) {
            auto fixture = Fixture::from_json(read_json_file(fixture_path));
            auto tx = db->begin();
            auto counts = load_fixture(tx, fixture, *clock);
            tx.commit();
            std::cout << nlohmann::json(counts).dump() << '\n';
            return 0;
        }

        if (*reset_cmd) {
            if (!PersonId::valid(person)) fail(ErrorCode::ValidationError, "not a person id: " + person);
            auto issued = campus.auth.reset_password(PersonId(person));
            std::cout << "username: " << issued.username << "\npassword: " << issued.password << '\n';
            return 0;
        }

        if (*report_cmd) {
            std::cout << campus.reporting.generate_unchecked(parse_report_kind(kind), filters);
            return 0;
        }

        if (*app_cmd) {
            auto signals = block_shutdown_signals();
            campus.ctx.faults.arm_from_environment();
            Dispatcher dispatcher(campus);
            AppServer server(dispatcher, AppServerOptions{wire::Endpoint::parse(config.app_listen),
                                                          config.worker_pool_size, config.queue_bound});
            server.start();
            std::cout << "app tier listening on " << wire::Endpoint::parse(config.app_listen).host << ':'
                      << server.port() << std::endl;
            wait_for_shutdown(signals);
            server.stop();
            return 0;
        }
    } catch (const CampusError& e) {
        std::cerr << "campus: " << error_code_name(e.code()) << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "campus: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
