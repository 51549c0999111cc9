#include "campus/dispatcher.hpp"

#include "campus/error.hpp"

#include <iostream>

namespace campus {

using nlohmann::json;

void to_json(json& j, const EligibleUnitView& v) {
    j = {{"unit_code", v.unit_code},
         {"unit_name", v.unit_name},
         {"category", to_string(v.category)},
         {"prerequisite_codes", v.prerequisite_codes},
         {"prerequisite_met", v.prerequisite_met}};
}

void to_json(json& j, const TranscriptRow& v) {
    j = v.grade;
    j["unit_name"] = v.unit_name;
}

void to_json(json& j, const ChecklistRow& v) {
    j = {{"unit_code", v.unit_code},
         {"unit_name", v.unit_name},
         {"category", to_string(v.category)},
         {"completed", v.completed}};
}

void to_json(json& j, const CourseworkImportReport& v) {
    json rejected = json::array();
    for (const auto& r : v.rejected) rejected.push_back({{"line", r.line}, {"reason", r.reason}});
    j = {{"accepted", v.accepted},
         {"rejected", rejected},
         {"idempotency_key", v.idempotency_key},
         {"updated", v.updated}};
}

void to_json(json& j, const ClassListEntry& v) { j = {{"student_id", v.student_id}, {"name", v.name}}; }

namespace {

Decision decision_of(const PayloadReader& p) { return parse_decision(p.str("decision")); }

OfferingKey offering_of(const PayloadReader& p) { return OfferingKey{p.str("unit_code"), p.str("campus"), p.term("term")}; }

/// class_list accepts either a full term id or a bare "T1" plus `year`.
OfferingKey class_list_offering(const PayloadReader& p) {
    auto term_text = p.str("term");
    TermId term;
    if (term_text.find('-') == std::string::npos) {
        term.year = p.integer("year");
        try {
            term.index = parse_term_index(term_text);
        } catch (const CampusError&) {
            fail(ErrorCode::MalformedPayload, "field 'term' is not a term id", {{"field", "term"}});
        }
    } else {
        term = p.term("term");
        if (p.has("year") && p.integer("year") != term.year) {
            fail(ErrorCode::ValidationError, "year does not match term", {{"fields", {"year", "term"}}});
        }
    }
    return OfferingKey{p.str("unit_code"), p.str("campus"), term};
}

std::vector<CourseworkRow> coursework_rows(const PayloadReader& p) {
    const auto& items = p.raw("items");
    if (!items.is_array()) fail(ErrorCode::MalformedPayload, "field 'items' must be a list", {{"field", "items"}});
    std::vector<CourseworkRow> rows;
    int line = 0;
    auto text = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.is_null() ? std::string() : v.dump(); };
    for (const auto& item : items) {
        ++line;
        if (!item.is_object()) fail(ErrorCode::MalformedPayload, "coursework items must be objects", {{"field", "items"}});
        rows.push_back(CourseworkRow{line, text(item.value("student_id", json())), text(item.value("assessment", json())),
                                     text(item.value("score", json())), text(item.value("max_score", json()))});
    }
    return rows;
}

const Caller& need(const Call& c) { return *c.caller; }

}  // namespace

json ok_response(const std::string& request_id, json payload) {
    return {{"v", kProtocolVersion}, {"request_id", request_id}, {"status", "Ok"}, {"payload", std::move(payload)}};
}

json error_response(const std::string& request_id, ErrorCode code, const std::string& message, json details) {
    return {{"v", kProtocolVersion},       {"request_id", request_id},   {"status", "Error"},
            {"error_code", error_code_name(code)}, {"error_message", message}, {"payload", std::move(details)}};
}

Dispatcher::Dispatcher(Campus& c) : campus_(c) {
    auto& h = handlers_;

    h["login"] = [this](Call c) {
        auto s = campus_.auth.login(c.payload.str("username"), c.payload.str("password"));
        return json{{"token", s.token},           {"person_id", s.person_id},   {"role", to_string(s.role)},
                    {"menu", menu_for(s.role)},   {"expires_at", s.expires_at}, {"must_change", s.must_change}};
    };
    h["logout"] = [this](Call c) {
        campus_.auth.logout(c.token);
        return json::object();
    };
    h["change_password"] = [this](Call c) {
        campus_.auth.change_password(need(c), c.payload.str("current_password"), c.payload.str("new_password"));
        return json::object();
    };
    h["describe_access"] = [](Call) { return AccessMatrix::instance().describe(); };
    h["view_profile"] = [this](Call c) { return campus_.auth.view_profile(need(c), c.payload.person("person_id")); };
    h["update_profile"] = [this](Call c) {
        const auto& fields = c.payload.raw("fields");
        if (!fields.is_object()) fail(ErrorCode::MalformedPayload, "field 'fields' must be an object", {{"field", "fields"}});
        return campus_.auth.update_profile(need(c), c.payload.person("person_id"), fields);
    };
    h["external_links"] = [this](Call) {
        json shares = json::array();
        auto tx = campus_.ctx.db.begin();
        for (const auto& [code, unit] : DataAccess(tx).units()) {
            if (unit.class_share_url) shares.push_back({{"unit_code", code}, {"url", *unit.class_share_url}});
        }
        return json{{"hr_url", campus_.ctx.config.hr_url}, {"class_shares", shares}};
    };
    h["list_terms"] = [this](Call) { return json(campus_.enrollment.list_terms()); };
    h["list_offerings"] = [this](Call c) {
        std::optional<TermId> term;
        if (c.payload.has("term")) term = c.payload.term("term");
        return json(campus_.enrollment.list_offerings(c.payload.opt_str("campus"), term));
    };

    h["submit_application"] = [this](Call c) {
        const auto& p = c.payload;
        ApplicationForm f;
        f.applicant_name = p.opt_str("applicant_name").value_or("");
        f.contact = p.opt_str("contact").value_or("");
        f.proposed_program = p.opt_str("proposed_program").value_or("");
        f.citizenship = p.opt_str("citizenship").value_or("");
        f.funding = p.opt_str("funding").value_or("");
        f.qualifications = p.opt_str("qualifications").value_or("");
        f.work_experience = p.opt_str("work_experience").value_or("");
        if (p.has("attachments")) {
            for (const auto& a : p.raw("attachments")) {
                f.attachments.push_back(AttachmentUpload{a.at("name").get<std::string>(), a.at("content").get<std::string>()});
            }
        }
        return json(campus_.admissions.submit_application(f));
    };
    h["list_pending_applications"] = [this](Call c) {
        return json(campus_.admissions.list_pending_applications(need(c)));
    };
    h["decide_application"] = [this](Call c) {
        auto d = campus_.admissions.decide_application(need(c), c.payload.str("application_id"), decision_of(c.payload),
                                                       c.payload.opt_str("reason"));
        json out{{"application", d.application}, {"letter", d.letter}};
        if (d.student_id) out["student_id"] = *d.student_id;
        if (d.username) out["username"] = *d.username;
        return out;
    };

    h["activate_offering"] = [this](Call c) {
        return json(campus_.enrollment.activate_offering(need(c), offering_of(c.payload)));
    };
    h["eligible_units"] = [this](Call c) {
        return json(campus_.enrollment.eligible_units(need(c), c.payload.person("student_id"), c.payload.str("campus"),
                                                      c.payload.term("term")));
    };
    h["enroll"] = [this](Call c) {
        return json(campus_.enrollment.enroll(need(c), c.payload.person("student_id"), offering_of(c.payload)));
    };
    h["list_enrollments"] = [this](Call c) {
        return json(campus_.enrollment.list_enrollments(need(c), c.payload.person("student_id")));
    };
    h["list_pending_enrollments"] = [this](Call c) {
        return json(campus_.enrollment.list_pending_enrollments(need(c)));
    };
    h["decide_pending_enrollment"] = [this](Call c) {
        return json(campus_.enrollment.decide_pending_enrollment(need(c), c.payload.str("enrollment_id"),
                                                                 decision_of(c.payload)));
    };
    h["drop_unit"] = [this](Call c) { return json(campus_.enrollment.drop_unit(need(c), c.payload.str("enrollment_id"))); };
    h["request_program_change"] = [this](Call c) {
        return json(campus_.enrollment.request_program_change(need(c), c.payload.person("student_id"),
                                                              c.payload.opt_str("new_program"),
                                                              c.payload.opt_str("new_major")));
    };
    h["list_program_change_requests"] = [this](Call c) {
        return json(campus_.enrollment.list_program_change_requests(need(c)));
    };
    h["decide_program_change"] = [this](Call c) {
        return json(
            campus_.enrollment.decide_program_change(need(c), c.payload.str("request_id"), decision_of(c.payload)));
    };

    h["view_transcript"] = [this](Call c) {
        return json(campus_.records.view_transcript(need(c), c.payload.person("student_id")));
    };
    h["program_details"] = [this](Call c) {
        return json(campus_.records.program_details(need(c), c.payload.person("student_id")));
    };
    h["record_final_grade"] = [this](Call c) {
        return json(campus_.records.record_final_grade(need(c), c.payload.str("enrollment_id"),
                                                       parse_grade(c.payload.str("grade"))));
    };
    h["submit_coursework"] = [this](Call c) {
        return json(campus_.records.submit_coursework(need(c), offering_of(c.payload), coursework_rows(c.payload)));
    };
    h["import_coursework_csv"] = [this](Call c) {
        return json(campus_.records.import_coursework_csv(need(c), offering_of(c.payload), c.payload.str("content")));
    };
    h["view_coursework"] = [this](Call c) {
        return json(campus_.records.view_coursework(need(c), c.payload.person("student_id"), c.payload.term("term")));
    };
    h["class_list"] = [this](Call c) {
        return json(campus_.records.class_list(need(c), class_list_offering(c.payload)));
    };
    h["student_lookup"] = [this](Call c) {
        return campus_.records.student_lookup(need(c), c.payload.person("student_id"));
    };
    h["view_timetable"] = [this](Call c) {
        auto kind = parse_timetable_kind(c.payload.opt_str("kind").value_or("Class"));
        return json(campus_.records.view_timetable(c.payload.str("campus"), c.payload.term("term"), kind));
    };
    h["apply_graduation"] = [this](Call c) {
        return json(campus_.records.apply_graduation(need(c), c.payload.person("student_id")));
    };
    h["list_graduation_requests"] = [this](Call c) {
        return json(campus_.records.list_graduation_requests(need(c)));
    };
    h["decide_graduation"] = [this](Call c) {
        return json(campus_.records.decide_graduation(need(c), c.payload.str("request_id"), decision_of(c.payload)));
    };

    h["view_invoices"] = [this](Call c) {
        return json(campus_.finance.view_invoices(need(c), c.payload.person("student_id")));
    };
    h["pay_invoice"] = [this](Call c) {
        const auto& card = c.payload.raw("card");
        if (!card.is_object()) fail(ErrorCode::MalformedPayload, "field 'card' must be an object", {{"field", "card"}});
        PayloadReader cr(card);
        CardDetails details{cr.str("number"), cr.opt_str("holder").value_or(""), cr.opt_str("expiry").value_or("")};
        Money amount = c.payload.raw("amount").get<Money>();
        return json(campus_.finance.pay_invoice(need(c), c.payload.str("invoice_id"), amount, details));
    };

    h["generate_report"] = [this](Call c) {
        auto kind = parse_report_kind(c.payload.str("kind"));
        ReportFilters filters;
        if (c.payload.has("filters")) {
            for (const auto& [k, v] : c.payload.raw("filters").items()) {
                if (!v.is_string()) {
                    fail(ErrorCode::MalformedPayload, "filter values must be text", {{"field", "filters"}});
                }
                filters[k] = v.get<std::string>();
            }
        }
        return json{{"kind", to_string(kind)},
                    {"content_type", "text/csv"},
                    {"csv", campus_.reporting.generate_report(need(c), kind, filters)}};
    };
}

std::vector<std::string> Dispatcher::operations() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : handlers_) out.push_back(name);
    return out;
}

json Dispatcher::dispatch(const json& message) {
    std::string request_id;
    try {
        if (!message.is_object()) fail(ErrorCode::MalformedPayload, "message must be an object");
        if (auto it = message.find("request_id"); it != message.end() && it->is_string()) {
            request_id = it->get<std::string>();
        } else {
            fail(ErrorCode::MalformedPayload, "request_id is required", {{"field", "request_id"}});
        }
        auto v = message.find("v");
        if (v == message.end() || !v->is_number_integer() || v->get<int>() != kProtocolVersion) {
            fail(ErrorCode::MalformedPayload, "unsupported protocol version", {{"field", "v"}});
        }
        auto op_it = message.find("operation");
        if (op_it == message.end() || !op_it->is_string()) {
            fail(ErrorCode::MalformedPayload, "operation is required", {{"field", "operation"}});
        }
        const auto op = op_it->get<std::string>();
        auto handler = handlers_.find(op);
        if (handler == handlers_.end() || !AccessMatrix::instance().knows(op)) {
            fail(ErrorCode::UnknownOperation, "unknown operation " + op, {{"operation", op}});
        }

        std::string token;
        if (auto t = message.find("session_token"); t != message.end() && t->is_string()) token = t->get<std::string>();
        std::optional<Caller> caller;
        if (!AccessMatrix::instance().is_public(op)) {
            if (token.empty()) fail(ErrorCode::UnknownSession, "a session is required for " + op);
            caller = campus_.auth.authorize(token, op);
        }

        static const json kEmpty = json::object();
        auto p = message.find("payload");
        const json& payload = (p == message.end() || p->is_null()) ? kEmpty : *p;
        PayloadReader reader(payload);
        return ok_response(request_id, handler->second(Call{caller ? &*caller : nullptr, token, reader}));
    } catch (const CampusError& e) {
        return error_response(request_id, e.code(), e.what(), e.details());
    } catch (const json::exception& e) {
        return error_response(request_id, ErrorCode::MalformedPayload, "payload does not match the operation");
    } catch (const std::exception& e) {
        std::cerr << "internal error in request " << request_id << ": " << e.what() << '\n';
        return error_response(request_id, ErrorCode::InternalError, "internal error");
    }
}

std::string Dispatcher::dispatch_text(std::string_view frame) {
    json message;
    try {
        message = json::parse(frame);
    } catch (const json::exception&) {
        return error_response("", ErrorCode::MalformedPayload, "frame is not a JSON document").dump();
    }
    return dispatch(message).dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace campus
