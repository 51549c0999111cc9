#include "campus/web_api.hpp"

#include "campus/error.hpp"
#include "campus/records.hpp"

#include <httplib.h>

#include <regex>

namespace campus {

using nlohmann::json;

namespace {

constexpr char kJson[] = "application/json";

// clang-format off
const std::vector<RouteBinding> kRoutes = {
    {"POST",   "/api/v1/sessions",                              "login"},
    {"DELETE", "/api/v1/sessions",                              "logout"},
    {"POST",   "/api/v1/sessions/password",                     "change_password"},
    {"GET",    "/api/v1/access-matrix",                         "describe_access"},
    {"GET",    "/api/v1/links",                                 "external_links"},
    {"GET",    "/api/v1/terms",                                 "list_terms"},
    {"GET",    "/api/v1/offerings",                             "list_offerings"},
    {"POST",   "/api/v1/offerings",                             "activate_offering"},
    {"POST",   "/api/v1/applications",                          "submit_application", 201},
    {"GET",    "/api/v1/applications",                          "list_pending_applications"},
    {"POST",   "/api/v1/applications/{application_id}/decision", "decide_application"},
    {"GET",    "/api/v1/students/{student_id}",                 "student_lookup"},
    {"GET",    "/api/v1/students/{person_id}/profile",          "view_profile"},
    {"PATCH",  "/api/v1/students/{person_id}/profile",          "update_profile", 200, BodyMode::Fields},
    {"GET",    "/api/v1/students/{student_id}/transcript",      "view_transcript"},
    {"GET",    "/api/v1/students/{student_id}/program-details", "program_details"},
    {"GET",    "/api/v1/students/{student_id}/coursework",      "view_coursework"},
    {"GET",    "/api/v1/students/{student_id}/invoices",        "view_invoices"},
    {"POST",   "/api/v1/students/{student_id}/graduation",      "apply_graduation", 201},
    {"GET",    "/api/v1/students/{student_id}/eligible-units",  "eligible_units"},
    {"GET",    "/api/v1/students/{student_id}/enrollments",     "list_enrollments"},
    {"POST",   "/api/v1/enrollments",                           "enroll", 201},
    {"GET",    "/api/v1/enrollments/pending",                   "list_pending_enrollments"},
    {"POST",   "/api/v1/enrollments/{enrollment_id}/decision",  "decide_pending_enrollment"},
    {"POST",   "/api/v1/enrollments/{enrollment_id}/drop",      "drop_unit"},
    {"POST",   "/api/v1/enrollments/{enrollment_id}/grade",     "record_final_grade", 201},
    {"GET",    "/api/v1/program-changes",                       "list_program_change_requests"},
    {"POST",   "/api/v1/program-changes",                       "request_program_change", 201},
    {"POST",   "/api/v1/program-changes/{request_id}/decision", "decide_program_change"},
    {"GET",    "/api/v1/graduations",                           "list_graduation_requests"},
    {"POST",   "/api/v1/graduations/{request_id}/decision",     "decide_graduation"},
    {"GET",    "/api/v1/class-lists",                           "class_list"},
    {"GET",    "/api/v1/timetable",                             "view_timetable"},
    {"POST",   "/api/v1/coursework",                            "submit_coursework"},
    {"POST",   "/api/v1/coursework-imports",                    "import_coursework_csv", 200, BodyMode::RawContent},
    {"GET",    "/api/v1/reports",                               "generate_report", 200, BodyMode::Json, true},
    {"POST",   "/api/v1/payments",                              "pay_invoice", 201},
};
// clang-format on

struct CompiledPath {
    std::string regex;
    std::vector<std::string> params;
};

CompiledPath compile(std::string_view path) {
    CompiledPath out;
    std::size_t i = 0;
    while (i < path.size()) {
        if (path[i] == '{') {
            auto close = path.find('}', i);
            out.params.emplace_back(path.substr(i + 1, close - i - 1));
            out.regex += "([^/]+)";
            i = close + 1;
        } else {
            char c = path[i++];
            if (std::string_view(".+*?^$()[]|\\").find(c) != std::string_view::npos) out.regex += '\\';
            out.regex += c;
        }
    }
    return out;
}

void send_json(httplib::Response& res, int status, const std::string& body) {
    res.status = status;
    res.set_header("Cache-Control", "no-store");
    res.set_content(body, kJson);
}

void send_error(httplib::Response& res, std::string_view code, const std::string& message,
                const json& details = json::object()) {
    send_json(res, http_status_for(code),
              json{{"error_code", code}, {"error_message", message}, {"details", details}}.dump());
}

std::string bearer_token(const httplib::Request& req) {
    auto h = req.get_header_value("Authorization");
    constexpr std::string_view prefix = "Bearer ";
    if (h.size() > prefix.size() && std::string_view(h).substr(0, prefix.size()) == prefix) {
        return h.substr(prefix.size());
    }
    return {};
}

}  // namespace

const std::vector<RouteBinding>& route_table() { return kRoutes; }

int http_status_for(std::string_view code) {
    auto starts = [&](std::string_view p) { return code.substr(0, p.size()) == p; };
    if (code == "InvalidCredentials" || code == "UnknownSession" || code == "SessionExpired") return 401;
    if (code == "Forbidden") return 403;
    if (code == "AppTierUnavailable") return 502;
    if (code == "ServerBusy" || code == "StorageUnavailable") return 503;
    if (code == "InternalError") return 500;
    if (starts("Unknown")) return 404;
    if (code == "ValidationError" || starts("Malformed")) return 422;
    if (starts("Duplicate") || starts("Already")) return 409;
    return 400;
}

WebServer::WebServer(AppClient& client, WebOptions options)
    : client_(client), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {}

WebServer::~WebServer() { stop(); }

void WebServer::install_routes() {
    auto& svr = *server_;
    int threads = std::max(1, options_.threads);
    svr.new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };

    for (const auto& binding : kRoutes) {
        auto compiled = compile(binding.path);
        httplib::Server::Handler handler = [this, binding, params = compiled.params](const httplib::Request& req,
                                                                                      httplib::Response& res) {
            json payload = json::object();
            if (!req.body.empty()) {
                if (binding.body == BodyMode::RawContent) {
                    payload["content"] = req.body;
                } else {
                    json body;
                    try {
                        body = json::parse(req.body);
                    } catch (const json::exception&) {
                        return send_error(res, "MalformedPayload", "request body is not JSON");
                    }
                    if (!body.is_object()) return send_error(res, "MalformedPayload", "request body must be an object");
                    if (binding.body == BodyMode::Fields) {
                        payload["fields"] = std::move(body);
                    } else {
                        payload = std::move(body);
                    }
                }
            } else if (binding.body == BodyMode::RawContent) {
                payload["content"] = "";
            }
            for (const auto& [key, value] : req.params) {
                if (binding.operation == "generate_report" && key != "kind") {
                    payload["filters"][key] = value;
                } else {
                    payload[key] = value;
                }
            }
            for (std::size_t i = 0; i < params.size() && i + 1 < req.matches.size(); ++i) {
                payload[params[i]] = req.matches[i + 1].str();
            }

            json message{{"v", 1},
                         {"request_id", client_.next_request_id()},
                         {"operation", binding.operation},
                         {"payload", std::move(payload)}};
            if (auto token = bearer_token(req); !token.empty()) message["session_token"] = token;

            json reply;
            try {
                reply = client_.call(message);
            } catch (const CampusError& e) {
                return send_error(res, error_code_name(e.code()), e.what());
            }
            if (reply.value("status", "") != "Ok") {
                auto code = reply.value("error_code", std::string("InternalError"));
                return send_error(res, code, reply.value("error_message", std::string()),
                                  reply.value("payload", json::object()));
            }
            const auto& out = reply["payload"];
            if (binding.csv_response) {
                res.status = binding.success_status;
                res.set_header("Cache-Control", "no-store");
                res.set_content(out.value("csv", std::string()), "text/csv");
                return;
            }
            send_json(res, binding.success_status, out.dump());
        };
        std::string re = compiled.regex;
        if (binding.method == "GET") svr.Get(re, handler);
        else if (binding.method == "POST") svr.Post(re, handler);
        else if (binding.method == "PATCH") svr.Patch(re, handler);
        else if (binding.method == "DELETE") svr.Delete(re, handler);
        else if (binding.method == "PUT") svr.Put(re, handler);
    }

    svr.Get("/api/v1/health", [](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, R"({"status":"ok"})");
    });
    svr.Get("/api/v1/coursework-imports/template", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Cache-Control", "no-store");
        res.set_content(std::string(kCourseworkCsvHeader) + "\n", "text/csv");
    });
    if (!options_.static_dir.empty()) svr.set_mount_point("/", options_.static_dir);

    svr.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.status == 404 && res.body.empty()) send_error(res, "UnknownOperation", "no such route");
    });
    svr.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
        send_error(res, "InternalError", "internal error");
    });
}

void WebServer::start() {
    install_routes();
    auto& svr = *server_;
    if (options_.listen.port == 0) {
        port_ = svr.bind_to_any_port(options_.listen.host);
    } else {
        port_ = svr.bind_to_port(options_.listen.host, options_.listen.port) ? options_.listen.port : -1;
    }
    if (port_ <= 0) fail(ErrorCode::PortInUse, options_.listen.str() + " is already in use");
    thread_ = std::thread([this] { server_->listen_after_bind(); });
}

void WebServer::stop() {
    if (!thread_.joinable()) return;
    server_->stop();
    thread_.join();
}

}  // namespace campus
