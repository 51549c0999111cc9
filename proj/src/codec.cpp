#include "campus/codec.hpp"

#include "campus/error.hpp"

#include <charconv>

namespace campus {

namespace {

std::string req_str(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
        fail(ErrorCode::ValidationError, std::string("missing or non-text field '") + key + "'", {{"field", key}});
    }
    return it->get<std::string>();
}

std::string opt_str_or(const json& j, const char* key, std::string fallback = {}) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (!it->is_string()) {
        fail(ErrorCode::ValidationError, std::string("field '") + key + "' must be text", {{"field", key}});
    }
    return it->get<std::string>();
}

std::optional<std::string> opt_field(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) {
        fail(ErrorCode::ValidationError, std::string("field '") + key + "' must be text", {{"field", key}});
    }
    return it->get<std::string>();
}

template <typename T>
json opt_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

}  // namespace

void to_json(json& j, const PersonId& v) { j = v.str(); }
void from_json(const json& j, PersonId& v) {
    if (!j.is_string()) fail(ErrorCode::ValidationError, "person id must be text");
    v = PersonId(j.get<std::string>());
}
void to_json(json& j, const TermId& v) { j = v.str(); }
void from_json(const json& j, TermId& v) {
    if (!j.is_string()) fail(ErrorCode::ValidationError, "term id must be text");
    v = TermId::parse(j.get<std::string>());
}
void to_json(json& j, const Money& v) { j = v.str(); }
void from_json(const json& j, Money& v) {
    if (j.is_string()) {
        v = Money::parse(j.get<std::string>());
    } else if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
        v = Money{j.get<std::int64_t>() * 100};
    } else {
        fail(ErrorCode::ValidationError, "amount must be a decimal string", {{"field", "amount"}});
    }
}

void to_json(json& j, const ContactFields& v) {
    j = json{{"postal_address", v.postal_address},
             {"residential_address", v.residential_address},
             {"home_phone", v.home_phone},
             {"mobile", v.mobile}};
}

void to_json(json& j, const Student& v) {
    j = json{{"id", v.id},
             {"name", v.name},
             {"postal_address", v.contact.postal_address},
             {"residential_address", v.contact.residential_address},
             {"home_phone", v.contact.home_phone},
             {"mobile", v.contact.mobile},
             {"program_id", v.program_id},
             {"major", opt_json(v.major)},
             {"citizenship", v.citizenship},
             {"status", to_string(v.status)}};
}

void from_json(const json& j, Student& v) {
    v.id = PersonId(req_str(j, "id"));
    v.name = req_str(j, "name");
    v.contact.postal_address = opt_str_or(j, "postal_address");
    v.contact.residential_address = opt_str_or(j, "residential_address");
    v.contact.home_phone = opt_str_or(j, "home_phone");
    v.contact.mobile = opt_str_or(j, "mobile");
    v.program_id = req_str(j, "program_id");
    v.major = opt_field(j, "major");
    v.citizenship = opt_str_or(j, "citizenship");
    v.status = parse_student_status(opt_str_or(j, "status", "Active"));
}

void to_json(json& j, const StaffMember& v) {
    j = json{{"id", v.id},
             {"name", v.name},
             {"role", to_string(v.role)},
             {"department", v.department},
             {"campus", v.campus},
             {"postal_address", v.contact.postal_address},
             {"residential_address", v.contact.residential_address},
             {"home_phone", v.contact.home_phone},
             {"mobile", v.contact.mobile}};
}

void from_json(const json& j, StaffMember& v) {
    v.id = PersonId(req_str(j, "id"));
    v.name = req_str(j, "name");
    v.role = parse_role(req_str(j, "role"));
    if (v.role == Role::Student) {
        fail(ErrorCode::ValidationError, "staff member " + v.id.str() + " cannot hold the Student role",
             {{"field", "role"}});
    }
    v.department = opt_str_or(j, "department");
    v.campus = opt_str_or(j, "campus");
    v.contact.postal_address = opt_str_or(j, "postal_address");
    v.contact.residential_address = opt_str_or(j, "residential_address");
    v.contact.home_phone = opt_str_or(j, "home_phone");
    v.contact.mobile = opt_str_or(j, "mobile");
}

void to_json(json& j, const Unit& v) {
    j = json{{"code", v.code}, {"name", v.name}, {"prerequisites", v.prerequisites}};
    if (v.class_share_url) j["class_share_url"] = *v.class_share_url;
}

void from_json(const json& j, Unit& v) {
    v.code = req_str(j, "code");
    v.name = req_str(j, "name");
    v.prerequisites.clear();
    if (auto it = j.find("prerequisites"); it != j.end() && !it->is_null()) {
        for (const auto& p : *it) v.prerequisites.insert(p.get<std::string>());
    }
    v.class_share_url = opt_field(j, "class_share_url");
}

void to_json(json& j, const ProgramRequirement& v) {
    j = json{{"unit_code", v.unit_code}, {"category", to_string(v.category)}};
}

void from_json(const json& j, ProgramRequirement& v) {
    v.unit_code = req_str(j, "unit_code");
    v.category = parse_category(req_str(j, "category"));
}

void to_json(json& j, const Program& v) {
    j = json{{"id", v.id}, {"name", v.name}, {"requirements", v.requirements}};
}

void from_json(const json& j, Program& v) {
    v.id = req_str(j, "id");
    v.name = req_str(j, "name");
    v.requirements = j.value("requirements", json::array()).get<std::vector<ProgramRequirement>>();
}

void to_json(json& j, const Term& v) {
    j = json{{"id", v.id.str()},
             {"year", v.id.year},
             {"index", to_string(v.id.index)},
             {"change_window_end", v.change_window_end},
             {"is_current", v.is_current}};
}

void from_json(const json& j, Term& v) {
    if (!j.contains("year") || !j["year"].is_number_integer()) {
        fail(ErrorCode::ValidationError, "term requires an integer year", {{"field", "year"}});
    }
    v.id.year = j["year"].get<int>();
    v.id.index = parse_term_index(req_str(j, "index"));
    if (auto id = opt_field(j, "id"); id && *id != v.id.str()) {
        fail(ErrorCode::ValidationError, "term id '" + *id + "' disagrees with year/index", {{"field", "id"}});
    }
    v.change_window_end = req_str(j, "change_window_end");
    v.is_current = j.value("is_current", false);
}

void to_json(json& j, const UnitOffering& v) {
    j = json{{"unit_code", v.key.unit_code}, {"campus", v.key.campus}, {"term", v.key.term}, {"active", v.active}};
}

void from_json(const json& j, UnitOffering& v) {
    v.key.unit_code = req_str(j, "unit_code");
    v.key.campus = req_str(j, "campus");
    v.key.term = TermId::parse(req_str(j, "term"));
    v.active = j.value("active", true);
}

void to_json(json& j, const Enrollment& v) {
    j = json{{"id", v.id},
             {"student_id", v.student_id},
             {"unit_code", v.offering.unit_code},
             {"campus", v.offering.campus},
             {"term", v.offering.term},
             {"status", to_string(v.status)},
             {"prerequisite_met", v.prerequisite_met},
             {"decided_by", opt_json(v.decided_by)},
             {"created_at", v.created_at}};
}

void to_json(json& j, const GradeRecord& v) {
    j = json{{"student_id", v.student_id}, {"unit_code", v.unit_code}, {"grade", to_string(v.grade)},
             {"campus", v.campus},         {"term", v.term},           {"year", v.year}};
}

void from_json(const json& j, GradeRecord& v) {
    if (j.contains("student_id")) v.student_id = PersonId(req_str(j, "student_id"));
    v.unit_code = req_str(j, "unit_code");
    v.grade = parse_grade(req_str(j, "grade"));
    v.campus = req_str(j, "campus");
    v.term = TermId::parse(req_str(j, "term"));
    v.year = j.value("year", v.term.year);
}

void to_json(json& j, const AttachmentRef& v) { j = json{{"name", v.name}, {"digest", v.digest}}; }

void to_json(json& j, const Application& v) {
    j = json{{"id", v.id},
             {"applicant_name", v.applicant_name},
             {"contact", v.contact},
             {"proposed_program", v.proposed_program},
             {"citizenship", v.citizenship},
             {"funding", v.funding},
             {"qualifications", v.qualifications},
             {"work_experience", v.work_experience},
             {"attachments", v.attachments},
             {"status", to_string(v.status)},
             {"decision_reason", opt_json(v.decision_reason)},
             {"decided_by", opt_json(v.decided_by)},
             {"student_id", opt_json(v.student_id)},
             {"created_at", v.created_at}};
}

void to_json(json& j, const GraduationRequest& v) {
    j = json{{"id", v.id},
             {"student_id", v.student_id},
             {"status", to_string(v.status)},
             {"decided_by", opt_json(v.decided_by)},
             {"created_at", v.created_at}};
}

void to_json(json& j, const ProgramChangeRequest& v) {
    j = json{{"id", v.id},
             {"student_id", v.student_id},
             {"new_program", opt_json(v.new_program)},
             {"new_major", opt_json(v.new_major)},
             {"status", to_string(v.status)},
             {"decided_by", opt_json(v.decided_by)},
             {"created_at", v.created_at}};
}

void to_json(json& j, const CourseworkItem& v) {
    j = json{{"student_id", v.student_id}, {"unit_code", v.unit_code}, {"term", v.term},
             {"assessment", v.assessment}, {"score", v.score},         {"max_score", v.max_score}};
}

void to_json(json& j, const InvoiceLine& v) { j = json{{"unit_code", v.unit_code}, {"amount", v.amount}}; }

void to_json(json& j, const Invoice& v) {
    j = json{{"id", v.id},
             {"student_id", v.student_id},
             {"term", v.term},
             {"line_items", v.line_items},
             {"total", v.total},
             {"paid", v.paid},
             {"balance", v.balance()},
             {"status", to_string(v.status)}};
}

void to_json(json& j, const Payment& v) {
    j = json{{"id", v.id},         {"invoice_id", v.invoice_id}, {"amount", v.amount},
             {"method", v.method}, {"card_last4", v.card_last4}, {"recorded_at", v.recorded_at}};
}

void to_json(json& j, const TimetableEntry& v) {
    j = json{{"unit_code", v.unit_code}, {"campus", v.campus}, {"term", v.term}, {"kind", to_string(v.kind)},
             {"day", v.day},             {"start", v.start},   {"end", v.end},   {"room", v.room}};
}

void from_json(const json& j, TimetableEntry& v) {
    v.unit_code = req_str(j, "unit_code");
    v.campus = req_str(j, "campus");
    v.term = TermId::parse(req_str(j, "term"));
    v.kind = parse_timetable_kind(req_str(j, "kind"));
    v.day = req_str(j, "day");
    v.start = req_str(j, "start");
    v.end = req_str(j, "end");
    v.room = opt_str_or(j, "room");
    if (!(v.start < v.end)) {
        fail(ErrorCode::ValidationError, "timetable entry for " + v.unit_code + " must start before it ends",
             {{"field", "start"}});
    }
}

void to_json(json& j, const Letter& v) {
    j = json{{"kind", to_string(v.kind)}, {"recipient", v.recipient}, {"body", v.body}, {"rendered_at", v.rendered_at}};
}

// ---------------------------------------------------------------------------

PayloadReader::PayloadReader(const json& doc) : doc_(doc) {
    if (!doc_.is_object()) fail(ErrorCode::MalformedPayload, "payload must be an object");
}

bool PayloadReader::has(const char* key) const {
    auto it = doc_.find(key);
    return it != doc_.end() && !it->is_null();
}

const json& PayloadReader::raw(const char* key) const {
    auto it = doc_.find(key);
    if (it == doc_.end() || it->is_null()) {
        fail(ErrorCode::MalformedPayload, std::string("missing field '") + key + "'", {{"field", key}});
    }
    return *it;
}

std::string PayloadReader::str(const char* key) const {
    const auto& v = raw(key);
    if (!v.is_string()) {
        fail(ErrorCode::MalformedPayload, std::string("field '") + key + "' must be text", {{"field", key}});
    }
    return v.get<std::string>();
}

std::optional<std::string> PayloadReader::opt_str(const char* key) const {
    if (!has(key)) return std::nullopt;
    return str(key);
}

int PayloadReader::integer(const char* key) const {
    const auto& v = raw(key);
    if (v.is_number_integer()) return v.get<int>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        int out = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        if (ec == std::errc{} && p == s.data() + s.size()) return out;
    }
    fail(ErrorCode::MalformedPayload, std::string("field '") + key + "' must be an integer", {{"field", key}});
}

std::optional<int> PayloadReader::opt_integer(const char* key) const {
    if (!has(key)) return std::nullopt;
    return integer(key);
}

double PayloadReader::number(const char* key) const {
    const auto& v = raw(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        double out = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        if (ec == std::errc{} && p == s.data() + s.size()) return out;
    }
    fail(ErrorCode::MalformedPayload, std::string("field '") + key + "' must be a number", {{"field", key}});
}

PersonId PayloadReader::person(const char* key) const {
    auto s = str(key);
    if (!PersonId::valid(s)) {
        fail(ErrorCode::MalformedPayload, std::string("field '") + key + "' is not a person id", {{"field", key}});
    }
    return PersonId(std::move(s));
}

TermId PayloadReader::term(const char* key) const {
    auto s = str(key);
    try {
        return TermId::parse(s);
    } catch (const CampusError&) {
        fail(ErrorCode::MalformedPayload, std::string("field '") + key + "' is not a term id", {{"field", key}});
    }
}

}  // namespace campus
