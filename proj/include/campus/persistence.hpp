#pragma once

// Embedded relational storage owned by the application-server tier.
//
// A Database is a single SQLite file under a storage directory. All access
// happens inside a Transaction; transactions on one Database are mutually
// exclusive, which makes every interleaving trivially serializable. Other
// processes touching the same file (the ops CLI) are serialized by SQLite's
// own write lock.

#include "campus/clock.hpp"
#include "campus/domain.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

struct sqlite3;
struct sqlite3_stmt;

namespace campus {

inline constexpr int kLatestSchemaVersion = 1;

/// Bring the store under `storage_dir` to the latest schema. Creates the
/// directory on first use. Re-running on a migrated store changes nothing.
/// Layout: `<dir>/campus.db`, `<dir>/schema_version`.
int migrate(const std::filesystem::path& storage_dir);

class Statement {
  public:
    Statement(sqlite3* db, std::string_view sql);
    ~Statement();
    Statement(const Statement&) = delete;
    Statement& operator=(const Statement&) = delete;

    Statement& bind(int idx, std::string_view v);
    Statement& bind(int idx, const char* v) { return bind(idx, std::string_view(v)); }
    Statement& bind(int idx, const std::string& v) { return bind(idx, std::string_view(v)); }
    Statement& bind(int idx, std::int64_t v);
    Statement& bind(int idx, int v) { return bind(idx, static_cast<std::int64_t>(v)); }
    Statement& bind(int idx, bool v) { return bind(idx, static_cast<std::int64_t>(v ? 1 : 0)); }
    Statement& bind(int idx, double v);
    Statement& bind(int idx, std::nullptr_t);
    template <typename T>
    Statement& bind(int idx, const std::optional<T>& v) {
        return v ? bind(idx, *v) : bind(idx, nullptr);
    }

    /// Advances the cursor; false once the result set is exhausted.
    bool step();
    void run();  // step to completion, for statements without results

    std::string text(int col) const;
    std::optional<std::string> opt_text(int col) const;
    std::int64_t integer(int col) const;
    double real(int col) const;
    bool is_null(int col) const;

  private:
    sqlite3* db_;
    sqlite3_stmt* stmt_ = nullptr;
};

class Database;

/// Handle for one serializable unit of work. Commits or rolls back exactly
/// once; a handle destroyed without commit rolls back.
class Transaction {
  public:
    Transaction(Transaction&&) noexcept;
    Transaction& operator=(Transaction&&) = delete;
    ~Transaction();

    void commit();
    void rollback();
    bool active() const noexcept { return active_; }
    const std::string& id() const noexcept { return id_; }

    Statement prepare(std::string_view sql) const;
    void exec(std::string_view sql) const;

  private:
    friend class Database;
    Transaction(Database& db, std::unique_lock<std::mutex> lock);

    Database* db_;
    std::unique_lock<std::mutex> lock_;
    std::string id_;
    bool active_ = true;
};

class Database {
  public:
    /// Opens a migrated store. Throws StorageUnavailable when the directory or
    /// file cannot be opened, CorruptSchema when the schema is not current.
    static std::unique_ptr<Database> open(const std::filesystem::path& storage_dir);
    /// Private in-memory store with the latest schema applied.
    static std::unique_ptr<Database> open_in_memory();

    ~Database();
    Database(const Database&) = delete;
    Database& operator=(const Database&) = delete;

    Transaction begin();

  private:
    friend class Transaction;
    explicit Database(sqlite3* db) : db_(db) {}

    sqlite3* db_;
    std::mutex mu_;
};

struct FeeRow {
    std::string unit_code;
    Money amount;
};

struct FixtureStudent {
    Student student;
    std::vector<GradeRecord> history;
};

/// One deployment's reference data, as read from the fixture JSON document.
struct Fixture {
    std::vector<Program> programs;
    std::vector<Unit> units;
    std::vector<UnitOffering> offerings;
    std::vector<FixtureStudent> students;
    std::vector<StaffMember> staff;
    std::vector<Term> terms;
    std::vector<TimetableEntry> timetable;
    std::vector<FeeRow> fees;

    /// Parses the fixture document; ValidationError on structural problems.
    static Fixture from_json(const nlohmann::json& doc);
};

using EntityCounts = std::map<std::string, int>;

/// Persists every fixture row inside `tx`. Throws ReferentialViolation naming
/// the first dangling reference, DuplicateKey on a repeated key, and
/// ValidationError when a domain invariant fails. Nothing is written unless
/// the caller commits.
EntityCounts load_fixture(Transaction& tx, const Fixture& fixture, const Clock& clock);

/// Inserts `enrollment` iff the student exists, the offering is active and no
/// PendingApproval/Approved enrollment holds (student, unit_code, term).
Enrollment atomic_check_and_insert_enrollment(Transaction& tx, const Enrollment& enrollment);

struct StoredCredential {
    PersonId person_id;
    std::string username;
    std::string password_hash;
    bool must_change = false;
};

struct StoredSession {
    std::string token_hash;
    PersonId person_id;
    Role role = Role::Student;
    std::string created_at;
    std::string expires_at;
};

struct CourseworkKey {
    PersonId student_id;
    std::string unit_code;
    TermId term;
    std::string assessment;
};

/// Typed queries over one transaction (the data-access layer). Each method is
/// a thin wrapper around one or two SQL statements.
class DataAccess {
  public:
    explicit DataAccess(Transaction& tx) : tx_(tx) {}

    Transaction& tx() { return tx_; }

    // curriculum
    std::optional<Unit> unit(const std::string& code);
    UnitCatalog units();
    void insert_unit(const Unit& u);
    std::optional<Program> program(const std::string& id);
    void insert_program(const Program& p);
    std::optional<Term> term(const TermId& id);
    std::vector<Term> terms();  // ordered by (year, index)
    void insert_term(const Term& t);
    std::optional<UnitOffering> offering(const OfferingKey& key);
    void upsert_offering(const UnitOffering& o);
    std::vector<OfferingKey> active_offerings(const std::string& campus, const TermId& term);
    std::vector<UnitOffering> offerings();
    bool campus_exists(const std::string& campus);

    // people
    std::optional<Student> student(const PersonId& id);
    void insert_student(const Student& s);
    void update_student(const Student& s);
    int max_student_number();
    /// Digits after the letter in the longest student id; 0 when there are none.
    int student_id_digits();
    std::optional<StaffMember> staff(const PersonId& id);
    void insert_staff(const StaffMember& s);
    void update_staff_contact(const PersonId& id, const ContactFields& c);
    bool person_exists(const PersonId& id);

    // credentials & sessions
    std::optional<StoredCredential> credential_by_username(const std::string& username);
    std::optional<StoredCredential> credential(const PersonId& id);
    void insert_credential(const StoredCredential& c);
    void update_password(const PersonId& id, const std::string& hash, bool must_change);
    void insert_session(const StoredSession& s);
    std::optional<StoredSession> session(const std::string& token_hash);
    void update_session_expiry(const std::string& token_hash, const std::string& expires_at);
    void delete_session(const std::string& token_hash);

    // enrollments & grades
    std::optional<Enrollment> enrollment(const std::string& id);
    void insert_enrollment(const Enrollment& e);
    void update_enrollment(const Enrollment& e);
    std::optional<Enrollment> nonterminal_enrollment(const PersonId& student, const std::string& unit_code,
                                                     const TermId& term);
    std::vector<Enrollment> enrollments_for_student(const PersonId& student);
    std::vector<Enrollment> enrollments_for_offering(const OfferingKey& key);
    std::vector<Enrollment> enrollments_with_status(EnrollmentStatus status);
    std::vector<Enrollment> all_enrollments();
    int count_enrollments(const PersonId& student, const std::string& unit_code, const TermId& term);

    void insert_grade(const GradeRecord& g);
    bool grade_exists(const PersonId& student, const std::string& unit_code, const TermId& term);
    std::vector<GradeRecord> grades_for_student(const PersonId& student);
    std::vector<GradeRecord> all_grades();

    // admissions
    void insert_application(const Application& a);
    std::optional<Application> application(const std::string& id);
    void update_application(const Application& a);
    std::vector<Application> applications();  // oldest first
    void insert_letter(const std::string& application_id, const Letter& letter);
    std::vector<Letter> letters_for_application(const std::string& application_id);

    // requests
    void insert_graduation_request(const GraduationRequest& r);
    std::optional<GraduationRequest> graduation_request(const std::string& id);
    void update_graduation_request(const GraduationRequest& r);
    std::vector<GraduationRequest> graduation_requests();
    void insert_program_change(const ProgramChangeRequest& r);
    std::optional<ProgramChangeRequest> program_change(const std::string& id);
    void update_program_change(const ProgramChangeRequest& r);
    std::vector<ProgramChangeRequest> program_changes();

    // coursework
    std::optional<CourseworkItem> coursework(const CourseworkKey& key);
    void upsert_coursework(const CourseworkItem& item);
    std::vector<CourseworkItem> coursework_for(const PersonId& student, const TermId& term);

    // finance
    std::optional<Money> fee(const std::string& unit_code);
    void insert_fee(const FeeRow& f);
    std::optional<Invoice> invoice(const std::string& id);
    std::optional<Invoice> open_invoice(const PersonId& student, const TermId& term);
    void insert_invoice(const Invoice& inv, const std::string& created_at);
    void set_invoice_status(const std::string& id, InvoiceStatus status);
    void delete_invoice(const std::string& id);
    void insert_invoice_line(const std::string& invoice_id, const std::string& enrollment_id, const InvoiceLine& line);
    /// Removes the line generated for `enrollment_id` from an Open invoice;
    /// returns that invoice id and the removed amount.
    std::optional<std::pair<std::string, Money>> remove_open_invoice_line(const std::string& enrollment_id);
    std::vector<Invoice> invoices_for_student(const PersonId& student);
    void insert_payment(const Payment& p);
    std::vector<Payment> payments_for_invoice(const std::string& invoice_id);

    // timetable
    void insert_timetable_entry(const TimetableEntry& e);
    std::vector<TimetableEntry> timetable(const std::string& campus, const TermId& term, TimetableKind kind);

    // ops
    void flag(const std::string& kind, const std::string& detail, const std::string& at);
    std::vector<std::pair<std::string, std::string>> flags();

    bool coursework_import_seen(const std::string& key);
    void record_coursework_import(const std::string& key, const std::string& at);

  private:
    Enrollment read_enrollment(const Statement& st);
    Invoice load_invoice_details(Invoice inv);

    Transaction& tx_;
};

}  // namespace campus
