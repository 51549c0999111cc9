#pragma once

#include "campus/auth.hpp"
#include "campus/context.hpp"

#include <optional>
#include <string>
#include <vector>

namespace campus {

struct AttachmentUpload {
    std::string name;
    std::string content;  // raw bytes; only the digest is kept
};

struct ApplicationForm {
    std::string applicant_name;
    std::string contact;
    std::string proposed_program;
    std::string citizenship;
    std::string funding;
    std::string qualifications;
    std::string work_experience;
    std::vector<AttachmentUpload> attachments;
};

struct ApplicationDecision {
    Application application;
    Letter letter;
    std::optional<PersonId> student_id;
    std::optional<std::string> username;
};

/// Application intake and the approve/reject workflow. Approval creates the
/// student, issues credentials and renders the offer letter in one
/// transaction.
class Admissions {
  public:
    explicit Admissions(Context& ctx) : ctx_(ctx) {}

    Application submit_application(const ApplicationForm& form);
    std::vector<Application> list_pending_applications(const Caller& caller);
    ApplicationDecision decide_application(const Caller& caller, const std::string& application_id, Decision decision,
                                           const std::optional<std::string>& reason);

  private:
    Context& ctx_;
};

}  // namespace campus
