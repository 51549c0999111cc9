#include "campus/admissions.hpp"

#include "campus/crypto.hpp"
#include "campus/error.hpp"

#include <cstdio>

namespace campus {

namespace {

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

// New ids follow the width already in use, six digits in an empty store.
std::string student_id_for(int number, int digits) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "S%0*d", digits > 0 ? digits : 6, number);
    return buf;
}

}  // namespace

Application Admissions::submit_application(const ApplicationForm& form) {
    std::vector<std::string> missing;
    if (blank(form.applicant_name)) missing.emplace_back("applicant_name");
    if (blank(form.proposed_program)) missing.emplace_back("proposed_program");
    if (blank(form.citizenship)) missing.emplace_back("citizenship");
    if (!missing.empty()) fail(ErrorCode::ValidationError, "required fields missing", {{"fields", missing}});

    Application a;
    a.applicant_name = form.applicant_name;
    a.contact = form.contact;
    a.proposed_program = form.proposed_program;
    a.citizenship = form.citizenship;
    a.funding = form.funding;
    a.qualifications = form.qualifications;
    a.work_experience = form.work_experience;
    for (const auto& att : form.attachments) {
        a.attachments.push_back(AttachmentRef{att.name, crypto::sha256_hex(att.content)});
    }
    a.status = RequestStatus::Submitted;

    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    if (!da.program(form.proposed_program)) {
        fail(ErrorCode::UnknownProgram, "no program " + form.proposed_program, {{"program", form.proposed_program}});
    }
    a.id = ctx_.new_id();
    a.created_at = ctx_.now_stamp();
    da.insert_application(a);
    tx.commit();
    return a;
}

std::vector<Application> Admissions::list_pending_applications(const Caller& caller) {
    require_role(caller, {Role::AdminStaff}, "review applications");
    auto tx = ctx_.db.begin();
    std::vector<Application> out;
    for (auto& a : DataAccess(tx).applications()) {
        if (a.status == RequestStatus::Submitted) out.push_back(std::move(a));
    }
    return out;
}

ApplicationDecision Admissions::decide_application(const Caller& caller, const std::string& application_id,
                                                   Decision decision, const std::optional<std::string>& reason) {
    require_role(caller, {Role::AdminStaff}, "decide applications");
    if (decision == Decision::Reject && (!reason || blank(*reason))) {
        fail(ErrorCode::MissingReason, "a rejection needs a reason");
    }

    // Hash outside the store lock; discarded if the decision is a rejection.
    std::string password, password_hash;
    if (decision == Decision::Approve) {
        password = crypto::generate_password();
        password_hash = crypto::hash_password(password, ctx_.config.pbkdf2_iterations);
    }

    auto tx = ctx_.db.begin();
    DataAccess da(tx);
    auto app = da.application(application_id);
    if (!app) fail(ErrorCode::UnknownApplication, "no application " + application_id);
    if (app->status != RequestStatus::Submitted) {
        fail(ErrorCode::AlreadyDecided, "application " + application_id + " was already decided",
             {{"status", to_string(app->status)}});
    }

    ApplicationDecision out;
    app->decided_by = caller.id;
    if (decision == Decision::Approve) {
        Student s;
        s.id = PersonId(student_id_for(da.max_student_number() + 1, da.student_id_digits()));
        s.name = app->applicant_name;
        s.contact.postal_address = app->contact;
        s.program_id = app->proposed_program;
        s.citizenship = app->citizenship;
        s.status = StudentStatus::Active;
        da.insert_student(s);
        ctx_.faults.hit("decide_application.after_student_insert");

        auto issued = AuthService::issue_credentials(da, s.id, password, password_hash);
        app->status = RequestStatus::Approved;
        app->student_id = s.id;
        out.letter = Letter{LetterKind::Offer, app->applicant_name,
                            render_template(ctx_.config.letters.offer, {{"name", app->applicant_name},
                                                                        {"username", issued.username},
                                                                        {"password", issued.password}}),
                            ctx_.now_stamp()};
        out.student_id = s.id;
        out.username = issued.username;
        // The stored copy never carries the plaintext password.
        Letter stored = out.letter;
        stored.body = render_template(ctx_.config.letters.offer, {{"name", app->applicant_name},
                                                                  {"username", issued.username},
                                                                  {"password", "(issued separately)"}});
        da.insert_letter(app->id, stored);
    } else {
        app->status = RequestStatus::Rejected;
        app->decision_reason = *reason;
        out.letter = Letter{LetterKind::Decline, app->applicant_name,
                            render_template(ctx_.config.letters.decline,
                                            {{"name", app->applicant_name}, {"reason", *reason}}),
                            ctx_.now_stamp()};
        da.insert_letter(app->id, out.letter);
    }
    da.update_application(*app);
    tx.commit();
    out.application = *app;
    return out;
}

}  // namespace campus
