#pragma once

// JSON mapping for domain types. Field names match the domain model exactly;
// the same mapping is used for fixture files and wire payloads.

#include "campus/domain.hpp"

#include <nlohmann/json.hpp>

namespace campus {

using nlohmann::json;

void to_json(json& j, const PersonId& v);
void from_json(const json& j, PersonId& v);
void to_json(json& j, const TermId& v);
void from_json(const json& j, TermId& v);
void to_json(json& j, const Money& v);
void from_json(const json& j, Money& v);

void to_json(json& j, const ContactFields& v);
void to_json(json& j, const Student& v);
void from_json(const json& j, Student& v);
void to_json(json& j, const StaffMember& v);
void from_json(const json& j, StaffMember& v);
void to_json(json& j, const Unit& v);
void from_json(const json& j, Unit& v);
void to_json(json& j, const ProgramRequirement& v);
void from_json(const json& j, ProgramRequirement& v);
void to_json(json& j, const Program& v);
void from_json(const json& j, Program& v);
void to_json(json& j, const Term& v);
void from_json(const json& j, Term& v);
void to_json(json& j, const UnitOffering& v);
void from_json(const json& j, UnitOffering& v);
void to_json(json& j, const Enrollment& v);
void to_json(json& j, const GradeRecord& v);
void from_json(const json& j, GradeRecord& v);
void to_json(json& j, const AttachmentRef& v);
void to_json(json& j, const Application& v);
void to_json(json& j, const GraduationRequest& v);
void to_json(json& j, const ProgramChangeRequest& v);
void to_json(json& j, const CourseworkItem& v);
void to_json(json& j, const InvoiceLine& v);
void to_json(json& j, const Invoice& v);
void to_json(json& j, const Payment& v);
void to_json(json& j, const TimetableEntry& v);
void from_json(const json& j, TimetableEntry& v);
void to_json(json& j, const Letter& v);

/// Typed accessors over a request payload. Missing or mistyped fields raise
/// MalformedPayload naming the field.
class PayloadReader {
  public:
    explicit PayloadReader(const json& doc);

    std::string str(const char* key) const;
    std::optional<std::string> opt_str(const char* key) const;
    int integer(const char* key) const;
    std::optional<int> opt_integer(const char* key) const;
    double number(const char* key) const;
    bool has(const char* key) const;
    const json& raw(const char* key) const;
    const json& doc() const { return doc_; }

    PersonId person(const char* key) const;
    TermId term(const char* key) const;

  private:
    const json& doc_;
};

}  // namespace campus
