#include "campus/persistence.hpp"

#include "campus/codec.hpp"
#include "campus/crypto.hpp"
#include "campus/error.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace campus {

namespace {

constexpr const char* kSchemaV1 = R"sql(
CREATE TABLE units (
    code TEXT PRIMARY KEY,
    name TEXT NOT NULL,
    class_share_url TEXT
);
CREATE TABLE unit_prereqs (
    unit_code TEXT NOT NULL REFERENCES units(code),
    prereq_code TEXT NOT NULL REFERENCES units(code),
    PRIMARY KEY (unit_code, prereq_code)
);
CREATE TABLE programs (
    id TEXT PRIMARY KEY,
    name TEXT NOT NULL
);
CREATE TABLE program_requirements (
    program_id TEXT NOT NULL REFERENCES programs(id),
    unit_code TEXT NOT NULL REFERENCES units(code),
    category TEXT NOT NULL,
    position INTEGER NOT NULL,
    PRIMARY KEY (program_id, unit_code)
);
CREATE TABLE terms (
    id TEXT PRIMARY KEY,
    year INTEGER NOT NULL,
    idx INTEGER NOT NULL,
    change_window_end TEXT NOT NULL,
    is_current INTEGER NOT NULL
);
CREATE TABLE offerings (
    unit_code TEXT NOT NULL REFERENCES units(code),
    campus TEXT NOT NULL,
    term TEXT NOT NULL REFERENCES terms(id),
    active INTEGER NOT NULL,
    PRIMARY KEY (unit_code, campus, term)
);
CREATE TABLE students (
    id TEXT PRIMARY KEY,
    name TEXT NOT NULL,
    postal_address TEXT NOT NULL,
    residential_address TEXT NOT NULL,
    home_phone TEXT NOT NULL,
    mobile TEXT NOT NULL,
    program_id TEXT NOT NULL REFERENCES programs(id),
    major TEXT,
    citizenship TEXT NOT NULL,
    status TEXT NOT NULL
);
CREATE TABLE staff (
    id TEXT PRIMARY KEY,
    name TEXT NOT NULL,
    role TEXT NOT NULL,
    department TEXT NOT NULL,
    campus TEXT NOT NULL,
    postal_address TEXT NOT NULL,
    residential_address TEXT NOT NULL,
    home_phone TEXT NOT NULL,
    mobile TEXT NOT NULL
);
CREATE TABLE credentials (
    person_id TEXT PRIMARY KEY,
    username TEXT NOT NULL UNIQUE,
    password_hash TEXT NOT NULL,
    must_change INTEGER NOT NULL
);
CREATE TABLE sessions (
    token_hash TEXT PRIMARY KEY,
    person_id TEXT NOT NULL,
    role TEXT NOT NULL,
    created_at TEXT NOT NULL,
    expires_at TEXT NOT NULL
);
CREATE TABLE enrollments (
    id TEXT PRIMARY KEY,
    student_id TEXT NOT NULL REFERENCES students(id),
    unit_code TEXT NOT NULL,
    campus TEXT NOT NULL,
    term TEXT NOT NULL,
    status TEXT NOT NULL,
    prerequisite_met INTEGER NOT NULL,
    decided_by TEXT,
    created_at TEXT NOT NULL
);
CREATE UNIQUE INDEX enrollments_one_active
    ON enrollments(student_id, unit_code, term)
    WHERE status IN ('PendingApproval', 'Approved');
CREATE INDEX enrollments_by_offering ON enrollments(unit_code, campus, term);
CREATE TABLE grades (
    student_id TEXT NOT NULL REFERENCES students(id),
    unit_code TEXT NOT NULL,
    term TEXT NOT NULL,
    grade TEXT NOT NULL,
    campus TEXT NOT NULL,
    year INTEGER NOT NULL,
    PRIMARY KEY (student_id, unit_code, term)
);
CREATE TABLE applications (
    id TEXT PRIMARY KEY,
    applicant_name TEXT NOT NULL,
    contact TEXT NOT NULL,
    proposed_program TEXT NOT NULL,
    citizenship TEXT NOT NULL,
    funding TEXT NOT NULL,
    qualifications TEXT NOT NULL,
    work_experience TEXT NOT NULL,
    attachments TEXT NOT NULL,
    status TEXT NOT NULL,
    decision_reason TEXT,
    decided_by TEXT,
    student_id TEXT,
    created_at TEXT NOT NULL
);
CREATE TABLE letters (
    application_id TEXT NOT NULL REFERENCES applications(id),
    kind TEXT NOT NULL,
    recipient TEXT NOT NULL,
    body TEXT NOT NULL,
    rendered_at TEXT NOT NULL
);
CREATE TABLE graduation_requests (
    id TEXT PRIMARY KEY,
    student_id TEXT NOT NULL REFERENCES students(id),
    status TEXT NOT NULL,
    decided_by TEXT,
    created_at TEXT NOT NULL
);
CREATE TABLE program_changes (
    id TEXT PRIMARY KEY,
    student_id TEXT NOT NULL REFERENCES students(id),
    new_program TEXT,
    new_major TEXT,
    status TEXT NOT NULL,
    decided_by TEXT,
    created_at TEXT NOT NULL
);
CREATE TABLE coursework (
    student_id TEXT NOT NULL,
    unit_code TEXT NOT NULL,
    term TEXT NOT NULL,
    assessment TEXT NOT NULL,
    score REAL NOT NULL,
    max_score REAL NOT NULL,
    PRIMARY KEY (student_id, unit_code, term, assessment)
);
CREATE TABLE coursework_imports (
    idempotency_key TEXT PRIMARY KEY,
    imported_at TEXT NOT NULL
);
CREATE TABLE fees (
    unit_code TEXT PRIMARY KEY REFERENCES units(code),
    amount_cents INTEGER NOT NULL CHECK (amount_cents >= 0)
);
CREATE TABLE invoices (
    id TEXT PRIMARY KEY,
    student_id TEXT NOT NULL REFERENCES students(id),
    term TEXT NOT NULL,
    status TEXT NOT NULL,
    created_at TEXT NOT NULL
);
CREATE TABLE invoice_lines (
    invoice_id TEXT NOT NULL REFERENCES invoices(id),
    enrollment_id TEXT NOT NULL,
    unit_code TEXT NOT NULL,
    amount_cents INTEGER NOT NULL
);
CREATE TABLE payments (
    id TEXT PRIMARY KEY,
    invoice_id TEXT NOT NULL REFERENCES invoices(id),
    amount_cents INTEGER NOT NULL CHECK (amount_cents > 0),
    method TEXT NOT NULL,
    card_last4 TEXT NOT NULL,
    recorded_at TEXT NOT NULL
);
CREATE TABLE timetable (
    unit_code TEXT NOT NULL,
    campus TEXT NOT NULL,
    term TEXT NOT NULL,
    kind TEXT NOT NULL,
    day TEXT NOT NULL,
    start TEXT NOT NULL,
    "end" TEXT NOT NULL,
    room TEXT NOT NULL
);
CREATE TABLE ops_flags (
    kind TEXT NOT NULL,
    detail TEXT NOT NULL,
    raised_at TEXT NOT NULL
);
)sql";

[[noreturn]] void storage_error(sqlite3* db, int rc, std::string_view what) {
    std::string msg = std::string(what) + ": " + (db ? sqlite3_errmsg(db) : sqlite3_errstr(rc));
    switch (rc & 0xff) {
        case SQLITE_CONSTRAINT:
            fail(ErrorCode::DuplicateKey, msg);
        case SQLITE_NOTADB:
        case SQLITE_CORRUPT:
            fail(ErrorCode::CorruptSchema, msg);
        default:
            fail(ErrorCode::StorageUnavailable, msg);
    }
}

void exec_raw(sqlite3* db, std::string_view sql) {
    char* err = nullptr;
    int rc = sqlite3_exec(db, std::string(sql).c_str(), nullptr, nullptr, &err);
    if (rc != SQLITE_OK) {
        std::string msg = err ? err : "sqlite error";
        sqlite3_free(err);
        storage_error(nullptr, rc, msg);
    }
}

int user_version(sqlite3* db) {
    sqlite3_stmt* st = nullptr;
    int rc = sqlite3_prepare_v2(db, "PRAGMA user_version", -1, &st, nullptr);
    if (rc != SQLITE_OK) storage_error(db, rc, "reading schema version");
    rc = sqlite3_step(st);
    int v = rc == SQLITE_ROW ? sqlite3_column_int(st, 0) : -1;
    sqlite3_finalize(st);
    if (v < 0) storage_error(db, rc, "reading schema version");
    return v;
}

void configure(sqlite3* db) {
    sqlite3_busy_timeout(db, 10000);
    exec_raw(db, "PRAGMA foreign_keys = ON; PRAGMA synchronous = NORMAL;");
}

void apply_migrations(sqlite3* db, int from) {
    exec_raw(db, "BEGIN IMMEDIATE");
    try {
        if (from < 1) exec_raw(db, kSchemaV1);
        exec_raw(db, "PRAGMA user_version = " + std::to_string(kLatestSchemaVersion));
        exec_raw(db, "COMMIT");
    } catch (...) {
        sqlite3_exec(db, "ROLLBACK", nullptr, nullptr, nullptr);
        throw;
    }
}

std::optional<int> read_version_file(const fs::path& p) {
    std::error_code ec;
    if (!fs::exists(p, ec)) return std::nullopt;
    std::ifstream in(p);
    if (!in) fail(ErrorCode::StorageUnavailable, "cannot read " + p.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r' || text.back() == ' ')) text.pop_back();
    if (text.empty() || !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
        text.size() > 6) {
        fail(ErrorCode::CorruptSchema, "schema_version file is not a version number");
    }
    return std::stoi(text);
}

void write_version_file(const fs::path& p, int version) {
    auto tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << version << '\n';
        if (!out) fail(ErrorCode::StorageUnavailable, "cannot write " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, p, ec);
    if (ec) fail(ErrorCode::StorageUnavailable, "cannot write " + p.string() + ": " + ec.message());
}

struct SqliteHandle {
    sqlite3* db = nullptr;
    ~SqliteHandle() {
        if (db) sqlite3_close_v2(db);
    }
    sqlite3* release() { return std::exchange(db, nullptr); }
};

std::atomic<std::uint64_t> g_tx_counter{0};

}  // namespace

int migrate(const fs::path& storage_dir) {
    std::error_code ec;
    fs::create_directories(storage_dir, ec);
    if (ec || !fs::is_directory(storage_dir)) {
        fail(ErrorCode::StorageUnavailable,
             "storage location " + storage_dir.string() + " is not writable" + (ec ? ": " + ec.message() : ""));
    }
    const auto version_path = storage_dir / "schema_version";
    const auto file_version = read_version_file(version_path);

    SqliteHandle h;
    int rc = sqlite3_open_v2((storage_dir / "campus.db").c_str(), &h.db, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE,
                             nullptr);
    if (rc != SQLITE_OK) storage_error(h.db, rc, "opening " + (storage_dir / "campus.db").string());
    sqlite3_busy_timeout(h.db, 10000);

    const int db_version = user_version(h.db);
    if (db_version > kLatestSchemaVersion) {
        fail(ErrorCode::CorruptSchema, "store schema version " + std::to_string(db_version) + " is newer than " +
                                           std::to_string(kLatestSchemaVersion));
    }
    if (file_version && *file_version != db_version) {
        fail(ErrorCode::CorruptSchema, "schema_version file says " + std::to_string(*file_version) +
                                           " but the store is at " + std::to_string(db_version));
    }
    if (db_version == kLatestSchemaVersion && file_version) return db_version;

    if (db_version < kLatestSchemaVersion) {
        exec_raw(h.db, "PRAGMA journal_mode = WAL");
        apply_migrations(h.db, db_version);
    }
    write_version_file(version_path, kLatestSchemaVersion);
    return kLatestSchemaVersion;
}

// ---------------------------------------------------------------------------

Statement::Statement(sqlite3* db, std::string_view sql) : db_(db) {
    int rc = sqlite3_prepare_v2(db, sql.data(), static_cast<int>(sql.size()), &stmt_, nullptr);
    if (rc != SQLITE_OK) storage_error(db, rc, "preparing statement");
}

Statement::~Statement() { sqlite3_finalize(stmt_); }

Statement& Statement::bind(int idx, std::string_view v) {
    sqlite3_bind_text(stmt_, idx, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    return *this;
}
Statement& Statement::bind(int idx, std::int64_t v) {
    sqlite3_bind_int64(stmt_, idx, v);
    return *this;
}
Statement& Statement::bind(int idx, double v) {
    sqlite3_bind_double(stmt_, idx, v);
    return *this;
}
Statement& Statement::bind(int idx, std::nullptr_t) {
    sqlite3_bind_null(stmt_, idx);
    return *this;
}

bool Statement::step() {
    int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    storage_error(db_, rc, "executing statement");
}

void Statement::run() {
    while (step()) {
    }
}

std::string Statement::text(int col) const {
    auto p = sqlite3_column_text(stmt_, col);
    return p ? std::string(reinterpret_cast<const char*>(p), sqlite3_column_bytes(stmt_, col)) : std::string{};
}

std::optional<std::string> Statement::opt_text(int col) const {
    if (is_null(col)) return std::nullopt;
    return text(col);
}

std::int64_t Statement::integer(int col) const { return sqlite3_column_int64(stmt_, col); }
double Statement::real(int col) const { return sqlite3_column_double(stmt_, col); }
bool Statement::is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }

// ---------------------------------------------------------------------------

Transaction::Transaction(Database& db, std::unique_lock<std::mutex> lock)
    : db_(&db), lock_(std::move(lock)), id_("tx-" + std::to_string(++g_tx_counter)) {
    exec_raw(db_->db_, "BEGIN IMMEDIATE");
}

Transaction::Transaction(Transaction&& o) noexcept
    : db_(o.db_), lock_(std::move(o.lock_)), id_(std::move(o.id_)), active_(std::exchange(o.active_, false)) {}

Transaction::~Transaction() {
    if (active_) sqlite3_exec(db_->db_, "ROLLBACK", nullptr, nullptr, nullptr);
}

void Transaction::commit() {
    if (!active_) fail(ErrorCode::InternalError, "transaction " + id_ + " already finished");
    active_ = false;
    int rc = sqlite3_exec(db_->db_, "COMMIT", nullptr, nullptr, nullptr);
    if (rc != SQLITE_OK) {
        sqlite3_exec(db_->db_, "ROLLBACK", nullptr, nullptr, nullptr);
        lock_.unlock();
        storage_error(nullptr, rc, "commit");
    }
    lock_.unlock();
}

void Transaction::rollback() {
    if (!active_) fail(ErrorCode::InternalError, "transaction " + id_ + " already finished");
    active_ = false;
    sqlite3_exec(db_->db_, "ROLLBACK", nullptr, nullptr, nullptr);
    lock_.unlock();
}

Statement Transaction::prepare(std::string_view sql) const { return Statement(db_->db_, sql); }

void Transaction::exec(std::string_view sql) const { exec_raw(db_->db_, sql); }

std::unique_ptr<Database> Database::open(const fs::path& storage_dir) {
    const auto path = storage_dir / "campus.db";
    std::error_code ec;
    if (!fs::exists(path, ec)) fail(ErrorCode::StorageUnavailable, "no store at " + path.string() + "; run migrate");
    const auto file_version = read_version_file(storage_dir / "schema_version");
    SqliteHandle h;
    int rc = sqlite3_open_v2(path.c_str(), &h.db, SQLITE_OPEN_READWRITE | SQLITE_OPEN_FULLMUTEX, nullptr);
    if (rc != SQLITE_OK) storage_error(h.db, rc, "opening " + path.string());
    configure(h.db);
    const int v = user_version(h.db);
    if (v != kLatestSchemaVersion || file_version != v) {
        fail(ErrorCode::CorruptSchema, "store at " + path.string() + " is at schema " + std::to_string(v) +
                                           ", expected " + std::to_string(kLatestSchemaVersion));
    }
    return std::unique_ptr<Database>(new Database(h.release()));
}

std::unique_ptr<Database> Database::open_in_memory() {
    SqliteHandle h;
    int rc = sqlite3_open_v2(":memory:", &h.db, SQLITE_OPEN_READWRITE | SQLITE_OPEN_FULLMUTEX, nullptr);
    if (rc != SQLITE_OK) storage_error(h.db, rc, "opening in-memory store");
    configure(h.db);
    apply_migrations(h.db, 0);
    return std::unique_ptr<Database>(new Database(h.release()));
}

Database::~Database() { sqlite3_close_v2(db_); }

Transaction Database::begin() { return Transaction(*this, std::unique_lock<std::mutex>(mu_)); }

// ---------------------------------------------------------------------------
// Fixture

Fixture Fixture::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) fail(ErrorCode::ValidationError, "fixture must be a JSON object");
    static const std::set<std::string> kKeys{"programs", "units", "offerings", "students",
                                             "staff",    "terms", "timetable", "fees"};
    for (const auto& [k, _] : doc.items()) {
        if (!kKeys.contains(k)) fail(ErrorCode::ValidationError, "unknown fixture key '" + k + "'", {{"field", k}});
    }
    auto arr = [&](const char* key) -> const nlohmann::json& {
        static const nlohmann::json empty = nlohmann::json::array();
        auto it = doc.find(key);
        if (it == doc.end()) return empty;
        if (!it->is_array()) fail(ErrorCode::ValidationError, std::string("fixture key '") + key + "' must be a list");
        return *it;
    };
    Fixture f;
    try {
        for (const auto& j : arr("programs")) f.programs.push_back(j.get<Program>());
        for (const auto& j : arr("units")) f.units.push_back(j.get<Unit>());
        for (const auto& j : arr("offerings")) f.offerings.push_back(j.get<UnitOffering>());
        for (const auto& j : arr("terms")) f.terms.push_back(j.get<Term>());
        for (const auto& j : arr("staff")) f.staff.push_back(j.get<StaffMember>());
        for (const auto& j : arr("timetable")) f.timetable.push_back(j.get<TimetableEntry>());
        for (const auto& j : arr("fees")) {
            if (!j.is_object() || !j.contains("unit_code") || !j.contains("amount")) {
                fail(ErrorCode::ValidationError, "fee rows need unit_code and amount");
            }
            f.fees.push_back(FeeRow{j["unit_code"].get<std::string>(), j["amount"].get<Money>()});
        }
        for (const auto& j : arr("students")) {
            FixtureStudent fs;
            fs.student = j.get<Student>();
            if (auto it = j.find("history"); it != j.end()) {
                for (const auto& g : *it) {
                    auto rec = g.get<GradeRecord>();
                    rec.student_id = fs.student.id;
                    fs.history.push_back(std::move(rec));
                }
            }
            f.students.push_back(std::move(fs));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ValidationError, std::string("fixture does not match the domain model: ") + e.what());
    }
    return f;
}

namespace {

[[noreturn]] void dangling(const std::string& ref, const std::string& where) {
    fail(ErrorCode::ReferentialViolation, ref, {{"reference", ref}, {"referenced_from", where}});
}

}  // namespace

EntityCounts load_fixture(Transaction& tx, const Fixture& f, const Clock& clock) {
    DataAccess da(tx);
    const auto now = format_timestamp(clock.now());

    // Units first, as a whole, so prerequisite edges may point forward.
    {
        std::set<std::string> seen;
        for (const auto& u : f.units) {
            if (!seen.insert(u.code).second || da.unit(u.code)) {
                fail(ErrorCode::DuplicateKey, "duplicate unit " + u.code, {{"key", u.code}});
            }
        }
        auto catalog = da.units();
        for (const auto& u : f.units) catalog[u.code] = u;
        for (const auto& u : f.units) {
            for (const auto& p : u.prerequisites) {
                if (!catalog.contains(p)) dangling(p, "units[" + u.code + "].prerequisites");
            }
        }
        prerequisite_order(catalog);
        for (const auto& u : f.units) {
            Unit bare = u;
            bare.prerequisites.clear();
            da.insert_unit(bare);
        }
        for (const auto& u : f.units) {
            for (const auto& p : u.prerequisites) {
                tx.prepare("INSERT INTO unit_prereqs(unit_code, prereq_code) VALUES (?1, ?2)")
                    .bind(1, u.code)
                    .bind(2, p)
                    .run();
            }
        }
    }

    for (const auto& p : f.programs) {
        if (da.program(p.id)) fail(ErrorCode::DuplicateKey, "duplicate program " + p.id, {{"key", p.id}});
        std::set<std::string> codes;
        for (const auto& r : p.requirements) {
            if (!da.unit(r.unit_code)) dangling(r.unit_code, "programs[" + p.id + "].requirements");
            if (!codes.insert(r.unit_code).second) {
                fail(ErrorCode::DuplicateKey, "program " + p.id + " lists " + r.unit_code + " twice",
                     {{"key", r.unit_code}});
            }
        }
        da.insert_program(p);
    }

    {
        int current = 0;
        for (const auto& t : da.terms()) current += t.is_current ? 1 : 0;
        for (const auto& t : f.terms) {
            if (da.term(t.id)) fail(ErrorCode::DuplicateKey, "duplicate term " + t.id.str(), {{"key", t.id.str()}});
            if (!valid_date(t.change_window_end) || std::stoi(t.change_window_end.substr(0, 4)) != t.id.year) {
                fail(ErrorCode::ValidationError,
                     "term " + t.id.str() + " change_window_end must be a date within the term's year",
                     {{"field", "change_window_end"}});
            }
            current += t.is_current ? 1 : 0;
            da.insert_term(t);
        }
        if (current > 1) fail(ErrorCode::ValidationError, "more than one term is marked current");
    }

    for (const auto& o : f.offerings) {
        if (!da.unit(o.key.unit_code)) dangling(o.key.unit_code, "offerings");
        if (!da.term(o.key.term)) dangling(o.key.term.str(), "offerings");
        if (da.offering(o.key)) {
            fail(ErrorCode::DuplicateKey, "duplicate offering " + o.key.unit_code + "@" + o.key.campus + "/" +
                                              o.key.term.str());
        }
        da.upsert_offering(o);
    }

    for (const auto& fee : f.fees) {
        if (!da.unit(fee.unit_code)) dangling(fee.unit_code, "fees");
        if (da.fee(fee.unit_code)) fail(ErrorCode::DuplicateKey, "duplicate fee for " + fee.unit_code);
        da.insert_fee(fee);
    }

    int grades = 0;
    for (const auto& fs : f.students) {
        const auto& s = fs.student;
        if (da.person_exists(s.id)) fail(ErrorCode::DuplicateKey, "duplicate person " + s.id.str(), {{"key", s.id.str()}});
        if (!da.program(s.program_id)) dangling(s.program_id, "students[" + s.id.str() + "].program_id");
        da.insert_student(s);
        for (const auto& g : fs.history) {
            if (!da.unit(g.unit_code)) dangling(g.unit_code, "students[" + s.id.str() + "].history");
            if (!da.term(g.term)) dangling(g.term.str(), "students[" + s.id.str() + "].history");
            if (da.grade_exists(s.id, g.unit_code, g.term)) {
                fail(ErrorCode::DuplicateKey, "duplicate grade for " + s.id.str() + "/" + g.unit_code);
            }
            // Grades only exist for completed enrollments.
            Enrollment e;
            e.id = crypto::ulid(static_cast<std::uint64_t>(
                std::chrono::duration_cast<std::chrono::milliseconds>(clock.now().time_since_epoch()).count()));
            e.student_id = s.id;
            e.offering = OfferingKey{g.unit_code, g.campus, g.term};
            e.status = EnrollmentStatus::Completed;
            e.prerequisite_met = true;
            e.created_at = now;
            da.insert_enrollment(e);
            da.insert_grade(g);
            ++grades;
        }
    }

    for (const auto& s : f.staff) {
        if (da.person_exists(s.id)) fail(ErrorCode::DuplicateKey, "duplicate person " + s.id.str(), {{"key", s.id.str()}});
        da.insert_staff(s);
    }

    for (const auto& e : f.timetable) {
        if (!da.unit(e.unit_code)) dangling(e.unit_code, "timetable");
        if (!da.term(e.term)) dangling(e.term.str(), "timetable");
        da.insert_timetable_entry(e);
    }

    return EntityCounts{
        {"programs", static_cast<int>(f.programs.size())},  {"units", static_cast<int>(f.units.size())},
        {"offerings", static_cast<int>(f.offerings.size())}, {"students", static_cast<int>(f.students.size())},
        {"staff", static_cast<int>(f.staff.size())},         {"terms", static_cast<int>(f.terms.size())},
        {"timetable", static_cast<int>(f.timetable.size())}, {"fees", static_cast<int>(f.fees.size())},
        {"grades", grades},
    };
}

Enrollment atomic_check_and_insert_enrollment(Transaction& tx, const Enrollment& enrollment) {
    DataAccess da(tx);
    if (!da.student(enrollment.student_id)) {
        fail(ErrorCode::UnknownStudent, "no student " + enrollment.student_id.str());
    }
    auto off = da.offering(enrollment.offering);
    if (!off || !off->active) {
        fail(ErrorCode::InactiveOffering, enrollment.offering.unit_code + " is not offered at " +
                                              enrollment.offering.campus + " in " + enrollment.offering.term.str());
    }
    if (da.nonterminal_enrollment(enrollment.student_id, enrollment.offering.unit_code, enrollment.offering.term)) {
        fail(ErrorCode::DuplicateEnrollment, enrollment.student_id.str() + " already holds an enrollment in " +
                                                 enrollment.offering.unit_code + " for " +
                                                 enrollment.offering.term.str());
    }
    da.insert_enrollment(enrollment);
    return enrollment;
}

// ---------------------------------------------------------------------------
// DataAccess

namespace {

ContactFields read_contact(const Statement& st, int first) {
    return ContactFields{st.text(first), st.text(first + 1), st.text(first + 2), st.text(first + 3)};
}

std::optional<PersonId> opt_person(const Statement& st, int col) {
    auto t = st.opt_text(col);
    if (!t) return std::nullopt;
    return PersonId(*t);
}

}  // namespace

std::optional<Unit> DataAccess::unit(const std::string& code) {
    auto st = tx_.prepare("SELECT code, name, class_share_url FROM units WHERE code = ?1");
    st.bind(1, code);
    if (!st.step()) return std::nullopt;
    Unit u{st.text(0), st.text(1), {}, st.opt_text(2)};
    auto pre = tx_.prepare("SELECT prereq_code FROM unit_prereqs WHERE unit_code = ?1");
    pre.bind(1, code);
    while (pre.step()) u.prerequisites.insert(pre.text(0));
    return u;
}

UnitCatalog DataAccess::units() {
    UnitCatalog out;
    auto st = tx_.prepare("SELECT code, name, class_share_url FROM units");
    while (st.step()) out[st.text(0)] = Unit{st.text(0), st.text(1), {}, st.opt_text(2)};
    auto pre = tx_.prepare("SELECT unit_code, prereq_code FROM unit_prereqs");
    while (pre.step()) out[pre.text(0)].prerequisites.insert(pre.text(1));
    return out;
}

void DataAccess::insert_unit(const Unit& u) {
    tx_.prepare("INSERT INTO units(code, name, class_share_url) VALUES (?1, ?2, ?3)")
        .bind(1, u.code)
        .bind(2, u.name)
        .bind(3, u.class_share_url)
        .run();
    for (const auto& p : u.prerequisites) {
        tx_.prepare("INSERT INTO unit_prereqs(unit_code, prereq_code) VALUES (?1, ?2)").bind(1, u.code).bind(2, p).run();
    }
}

std::optional<Program> DataAccess::program(const std::string& id) {
    auto st = tx_.prepare("SELECT id, name FROM programs WHERE id = ?1");
    st.bind(1, id);
    if (!st.step()) return std::nullopt;
    Program p{st.text(0), st.text(1), {}};
    auto rq = tx_.prepare("SELECT unit_code, category FROM program_requirements WHERE program_id = ?1 ORDER BY position");
    rq.bind(1, id);
    while (rq.step()) p.requirements.push_back({rq.text(0), parse_category(rq.text(1))});
    return p;
}

void DataAccess::insert_program(const Program& p) {
    tx_.prepare("INSERT INTO programs(id, name) VALUES (?1, ?2)").bind(1, p.id).bind(2, p.name).run();
    int pos = 0;
    for (const auto& r : p.requirements) {
        tx_.prepare("INSERT INTO program_requirements(program_id, unit_code, category, position) VALUES (?1,?2,?3,?4)")
            .bind(1, p.id)
            .bind(2, r.unit_code)
            .bind(3, to_string(r.category))
            .bind(4, pos++)
            .run();
    }
}

std::optional<Term> DataAccess::term(const TermId& id) {
    auto st = tx_.prepare("SELECT change_window_end, is_current FROM terms WHERE id = ?1");
    st.bind(1, id.str());
    if (!st.step()) return std::nullopt;
    return Term{id, st.text(0), st.integer(1) != 0};
}

std::vector<Term> DataAccess::terms() {
    std::vector<Term> out;
    auto st = tx_.prepare("SELECT id, change_window_end, is_current FROM terms ORDER BY year, idx");
    while (st.step()) out.push_back(Term{TermId::parse(st.text(0)), st.text(1), st.integer(2) != 0});
    return out;
}

void DataAccess::insert_term(const Term& t) {
    tx_.prepare("INSERT INTO terms(id, year, idx, change_window_end, is_current) VALUES (?1,?2,?3,?4,?5)")
        .bind(1, t.id.str())
        .bind(2, t.id.year)
        .bind(3, static_cast<int>(t.id.index))
        .bind(4, t.change_window_end)
        .bind(5, t.is_current)
        .run();
}

std::optional<UnitOffering> DataAccess::offering(const OfferingKey& key) {
    auto st = tx_.prepare("SELECT active FROM offerings WHERE unit_code = ?1 AND campus = ?2 AND term = ?3");
    st.bind(1, key.unit_code).bind(2, key.campus).bind(3, key.term.str());
    if (!st.step()) return std::nullopt;
    return UnitOffering{key, st.integer(0) != 0};
}

void DataAccess::upsert_offering(const UnitOffering& o) {
    tx_.prepare(
           "INSERT INTO offerings(unit_code, campus, term, active) VALUES (?1,?2,?3,?4) "
           "ON CONFLICT(unit_code, campus, term) DO UPDATE SET active = excluded.active")
        .bind(1, o.key.unit_code)
        .bind(2, o.key.campus)
        .bind(3, o.key.term.str())
        .bind(4, o.active)
        .run();
}

std::vector<OfferingKey> DataAccess::active_offerings(const std::string& campus, const TermId& term) {
    std::vector<OfferingKey> out;
    auto st = tx_.prepare(
        "SELECT unit_code FROM offerings WHERE campus = ?1 AND term = ?2 AND active = 1 ORDER BY unit_code");
    st.bind(1, campus).bind(2, term.str());
    while (st.step()) out.push_back(OfferingKey{st.text(0), campus, term});
    return out;
}

std::vector<UnitOffering> DataAccess::offerings() {
    std::vector<UnitOffering> out;
    auto st = tx_.prepare("SELECT unit_code, campus, term, active FROM offerings ORDER BY unit_code, campus, term");
    while (st.step()) {
        out.push_back(UnitOffering{OfferingKey{st.text(0), st.text(1), TermId::parse(st.text(2))}, st.integer(3) != 0});
    }
    return out;
}

bool DataAccess::campus_exists(const std::string& campus) {
    auto st = tx_.prepare(
        "SELECT 1 FROM offerings WHERE campus = ?1 UNION SELECT 1 FROM staff WHERE campus = ?1 "
        "UNION SELECT 1 FROM timetable WHERE campus = ?1 LIMIT 1");
    st.bind(1, campus);
    return st.step();
}

std::optional<Student> DataAccess::student(const PersonId& id) {
    auto st = tx_.prepare(
        "SELECT id, name, postal_address, residential_address, home_phone, mobile, program_id, major, citizenship, "
        "status FROM students WHERE id = ?1");
    st.bind(1, id.str());
    if (!st.step()) return std::nullopt;
    return Student{PersonId(st.text(0)), st.text(1),   read_contact(st, 2),
                   st.text(6),           st.opt_text(7), st.text(8),
                   parse_student_status(st.text(9))};
}

void DataAccess::insert_student(const Student& s) {
    tx_.prepare(
           "INSERT INTO students(id, name, postal_address, residential_address, home_phone, mobile, program_id, "
           "major, citizenship, status) VALUES (?1,?2,?3,?4,?5,?6,?7,?8,?9,?10)")
        .bind(1, s.id.str())
        .bind(2, s.name)
        .bind(3, s.contact.postal_address)
        .bind(4, s.contact.residential_address)
        .bind(5, s.contact.home_phone)
        .bind(6, s.contact.mobile)
        .bind(7, s.program_id)
        .bind(8, s.major)
        .bind(9, s.citizenship)
        .bind(10, to_string(s.status))
        .run();
}

void DataAccess::update_student(const Student& s) {
    tx_.prepare(
           "UPDATE students SET name = ?2, postal_address = ?3, residential_address = ?4, home_phone = ?5, "
           "mobile = ?6, program_id = ?7, major = ?8, citizenship = ?9, status = ?10 WHERE id = ?1")
        .bind(1, s.id.str())
        .bind(2, s.name)
        .bind(3, s.contact.postal_address)
        .bind(4, s.contact.residential_address)
        .bind(5, s.contact.home_phone)
        .bind(6, s.contact.mobile)
        .bind(7, s.program_id)
        .bind(8, s.major)
        .bind(9, s.citizenship)
        .bind(10, to_string(s.status))
        .run();
}

int DataAccess::max_student_number() {
    auto st = tx_.prepare("SELECT MAX(CAST(substr(id, 2) AS INTEGER)) FROM students WHERE id LIKE 'S%'");
    st.step();
    return st.is_null(0) ? 0 : static_cast<int>(st.integer(0));
}

int DataAccess::student_id_digits() {
    auto st = tx_.prepare("SELECT MAX(length(id)) - 1 FROM students WHERE id LIKE 'S%'");
    st.step();
    return st.is_null(0) ? 0 : static_cast<int>(st.integer(0));
}

std::optional<StaffMember> DataAccess::staff(const PersonId& id) {
    auto st = tx_.prepare(
        "SELECT id, name, role, department, campus, postal_address, residential_address, home_phone, mobile "
        "FROM staff WHERE id = ?1");
    st.bind(1, id.str());
    if (!st.step()) return std::nullopt;
    return StaffMember{PersonId(st.text(0)), st.text(1), parse_role(st.text(2)), st.text(3), st.text(4),
                       read_contact(st, 5)};
}

void DataAccess::insert_staff(const StaffMember& s) {
    tx_.prepare(
           "INSERT INTO staff(id, name, role, department, campus, postal_address, residential_address, home_phone, "
           "mobile) VALUES (?1,?2,?3,?4,?5,?6,?7,?8,?9)")
        .bind(1, s.id.str())
        .bind(2, s.name)
        .bind(3, to_string(s.role))
        .bind(4, s.department)
        .bind(5, s.campus)
        .bind(6, s.contact.postal_address)
        .bind(7, s.contact.residential_address)
        .bind(8, s.contact.home_phone)
        .bind(9, s.contact.mobile)
        .run();
}

void DataAccess::update_staff_contact(const PersonId& id, const ContactFields& c) {
    tx_.prepare(
           "UPDATE staff SET postal_address = ?2, residential_address = ?3, home_phone = ?4, mobile = ?5 "
           "WHERE id = ?1")
        .bind(1, id.str())
        .bind(2, c.postal_address)
        .bind(3, c.residential_address)
        .bind(4, c.home_phone)
        .bind(5, c.mobile)
        .run();
}

bool DataAccess::person_exists(const PersonId& id) {
    auto st = tx_.prepare("SELECT 1 FROM students WHERE id = ?1 UNION SELECT 1 FROM staff WHERE id = ?1");
    st.bind(1, id.str());
    return st.step();
}

namespace {

StoredCredential read_credential(const Statement& st) {
    return StoredCredential{PersonId(st.text(0)), st.text(1), st.text(2), st.integer(3) != 0};
}

}  // namespace

std::optional<StoredCredential> DataAccess::credential_by_username(const std::string& username) {
    auto st = tx_.prepare("SELECT person_id, username, password_hash, must_change FROM credentials WHERE username = ?1");
    st.bind(1, username);
    if (!st.step()) return std::nullopt;
    return read_credential(st);
}

std::optional<StoredCredential> DataAccess::credential(const PersonId& id) {
    auto st = tx_.prepare("SELECT person_id, username, password_hash, must_change FROM credentials WHERE person_id = ?1");
    st.bind(1, id.str());
    if (!st.step()) return std::nullopt;
    return read_credential(st);
}

void DataAccess::insert_credential(const StoredCredential& c) {
    tx_.prepare("INSERT INTO credentials(person_id, username, password_hash, must_change) VALUES (?1,?2,?3,?4)")
        .bind(1, c.person_id.str())
        .bind(2, c.username)
        .bind(3, c.password_hash)
        .bind(4, c.must_change)
        .run();
}

void DataAccess::update_password(const PersonId& id, const std::string& hash, bool must_change) {
    tx_.prepare("UPDATE credentials SET password_hash = ?2, must_change = ?3 WHERE person_id = ?1")
        .bind(1, id.str())
        .bind(2, hash)
        .bind(3, must_change)
        .run();
}

void DataAccess::insert_session(const StoredSession& s) {
    tx_.prepare("INSERT INTO sessions(token_hash, person_id, role, created_at, expires_at) VALUES (?1,?2,?3,?4,?5)")
        .bind(1, s.token_hash)
        .bind(2, s.person_id.str())
        .bind(3, to_string(s.role))
        .bind(4, s.created_at)
        .bind(5, s.expires_at)
        .run();
}

std::optional<StoredSession> DataAccess::session(const std::string& token_hash) {
    auto st = tx_.prepare("SELECT token_hash, person_id, role, created_at, expires_at FROM sessions WHERE token_hash = ?1");
    st.bind(1, token_hash);
    if (!st.step()) return std::nullopt;
    return StoredSession{st.text(0), PersonId(st.text(1)), parse_role(st.text(2)), st.text(3), st.text(4)};
}

void DataAccess::update_session_expiry(const std::string& token_hash, const std::string& expires_at) {
    tx_.prepare("UPDATE sessions SET expires_at = ?2 WHERE token_hash = ?1").bind(1, token_hash).bind(2, expires_at).run();
}

void DataAccess::delete_session(const std::string& token_hash) {
    tx_.prepare("DELETE FROM sessions WHERE token_hash = ?1").bind(1, token_hash).run();
}

namespace {
constexpr const char* kEnrollmentCols =
    "SELECT id, student_id, unit_code, campus, term, status, prerequisite_met, decided_by, created_at FROM enrollments ";
}

Enrollment DataAccess::read_enrollment(const Statement& st) {
    Enrollment e;
    e.id = st.text(0);
    e.student_id = PersonId(st.text(1));
    e.offering = OfferingKey{st.text(2), st.text(3), TermId::parse(st.text(4))};
    e.status = parse_enrollment_status(st.text(5));
    e.prerequisite_met = st.integer(6) != 0;
    e.decided_by = opt_person(st, 7);
    e.created_at = st.text(8);
    return e;
}

std::optional<Enrollment> DataAccess::enrollment(const std::string& id) {
    auto st = tx_.prepare(std::string(kEnrollmentCols) + "WHERE id = ?1");
    st.bind(1, id);
    if (!st.step()) return std::nullopt;
    return read_enrollment(st);
}

void DataAccess::insert_enrollment(const Enrollment& e) {
    tx_.prepare(
           "INSERT INTO enrollments(id, student_id, unit_code, campus, term, status, prerequisite_met, decided_by, "
           "created_at) VALUES (?1,?2,?3,?4,?5,?6,?7,?8,?9)")
        .bind(1, e.id)
        .bind(2, e.student_id.str())
        .bind(3, e.offering.unit_code)
        .bind(4, e.offering.campus)
        .bind(5, e.offering.term.str())
        .bind(6, to_string(e.status))
        .bind(7, e.prerequisite_met)
        .bind(8, e.decided_by ? std::optional<std::string>(e.decided_by->str()) : std::nullopt)
        .bind(9, e.created_at)
        .run();
}

void DataAccess::update_enrollment(const Enrollment& e) {
    tx_.prepare("UPDATE enrollments SET status = ?2, prerequisite_met = ?3, decided_by = ?4 WHERE id = ?1")
        .bind(1, e.id)
        .bind(2, to_string(e.status))
        .bind(3, e.prerequisite_met)
        .bind(4, e.decided_by ? std::optional<std::string>(e.decided_by->str()) : std::nullopt)
        .run();
}

std::optional<Enrollment> DataAccess::nonterminal_enrollment(const PersonId& student, const std::string& unit_code,
                                                             const TermId& term) {
    auto st = tx_.prepare(std::string(kEnrollmentCols) +
                          "WHERE student_id = ?1 AND unit_code = ?2 AND term = ?3 "
                          "AND status IN ('PendingApproval', 'Approved')");
    st.bind(1, student.str()).bind(2, unit_code).bind(3, term.str());
    if (!st.step()) return std::nullopt;
    return read_enrollment(st);
}

std::vector<Enrollment> DataAccess::enrollments_for_student(const PersonId& student) {
    std::vector<Enrollment> out;
    auto st = tx_.prepare(std::string(kEnrollmentCols) + "WHERE student_id = ?1 ORDER BY created_at, id");
    st.bind(1, student.str());
    while (st.step()) out.push_back(read_enrollment(st));
    return out;
}

std::vector<Enrollment> DataAccess::enrollments_for_offering(const OfferingKey& key) {
    std::vector<Enrollment> out;
    auto st = tx_.prepare(std::string(kEnrollmentCols) +
                          "WHERE unit_code = ?1 AND campus = ?2 AND term = ?3 ORDER BY student_id, id");
    st.bind(1, key.unit_code).bind(2, key.campus).bind(3, key.term.str());
    while (st.step()) out.push_back(read_enrollment(st));
    return out;
}

std::vector<Enrollment> DataAccess::enrollments_with_status(EnrollmentStatus status) {
    std::vector<Enrollment> out;
    auto st = tx_.prepare(std::string(kEnrollmentCols) + "WHERE status = ?1 ORDER BY created_at, id");
    st.bind(1, to_string(status));
    while (st.step()) out.push_back(read_enrollment(st));
    return out;
}

std::vector<Enrollment> DataAccess::all_enrollments() {
    std::vector<Enrollment> out;
    auto st = tx_.prepare(std::string(kEnrollmentCols) + "ORDER BY created_at, id");
    while (st.step()) out.push_back(read_enrollment(st));
    return out;
}

int DataAccess::count_enrollments(const PersonId& student, const std::string& unit_code, const TermId& term) {
    auto st = tx_.prepare("SELECT COUNT(*) FROM enrollments WHERE student_id = ?1 AND unit_code = ?2 AND term = ?3");
    st.bind(1, student.str()).bind(2, unit_code).bind(3, term.str());
    st.step();
    return static_cast<int>(st.integer(0));
}

void DataAccess::insert_grade(const GradeRecord& g) {
    tx_.prepare("INSERT INTO grades(student_id, unit_code, term, grade, campus, year) VALUES (?1,?2,?3,?4,?5,?6)")
        .bind(1, g.student_id.str())
        .bind(2, g.unit_code)
        .bind(3, g.term.str())
        .bind(4, to_string(g.grade))
        .bind(5, g.campus)
        .bind(6, g.year)
        .run();
}

bool DataAccess::grade_exists(const PersonId& student, const std::string& unit_code, const TermId& term) {
    auto st = tx_.prepare("SELECT 1 FROM grades WHERE student_id = ?1 AND unit_code = ?2 AND term = ?3");
    st.bind(1, student.str()).bind(2, unit_code).bind(3, term.str());
    return st.step();
}

namespace {

std::vector<GradeRecord> read_grades(Statement& st) {
    std::vector<GradeRecord> out;
    while (st.step()) {
        out.push_back(GradeRecord{PersonId(st.text(0)), st.text(1), parse_grade(st.text(3)), st.text(4),
                                  TermId::parse(st.text(2)), static_cast<int>(st.integer(5))});
    }
    std::sort(out.begin(), out.end(), [](const GradeRecord& a, const GradeRecord& b) {
        return std::tie(a.student_id, a.year, a.term, a.unit_code) < std::tie(b.student_id, b.year, b.term, b.unit_code);
    });
    return out;
}

}  // namespace

std::vector<GradeRecord> DataAccess::grades_for_student(const PersonId& student) {
    auto st = tx_.prepare("SELECT student_id, unit_code, term, grade, campus, year FROM grades WHERE student_id = ?1");
    st.bind(1, student.str());
    return read_grades(st);
}

std::vector<GradeRecord> DataAccess::all_grades() {
    auto st = tx_.prepare("SELECT student_id, unit_code, term, grade, campus, year FROM grades");
    return read_grades(st);
}

namespace {

constexpr const char* kApplicationCols =
    "SELECT id, applicant_name, contact, proposed_program, citizenship, funding, qualifications, work_experience, "
    "attachments, status, decision_reason, decided_by, student_id, created_at FROM applications ";

Application read_application(const Statement& st) {
    Application a;
    a.id = st.text(0);
    a.applicant_name = st.text(1);
    a.contact = st.text(2);
    a.proposed_program = st.text(3);
    a.citizenship = st.text(4);
    a.funding = st.text(5);
    a.qualifications = st.text(6);
    a.work_experience = st.text(7);
    for (const auto& j : nlohmann::json::parse(st.text(8))) {
        a.attachments.push_back(AttachmentRef{j.at("name").get<std::string>(), j.at("digest").get<std::string>()});
    }
    a.status = parse_request_status(st.text(9));
    a.decision_reason = st.opt_text(10);
    a.decided_by = opt_person(st, 11);
    a.student_id = opt_person(st, 12);
    a.created_at = st.text(13);
    return a;
}

}  // namespace

void DataAccess::insert_application(const Application& a) {
    tx_.prepare(
           "INSERT INTO applications(id, applicant_name, contact, proposed_program, citizenship, funding, "
           "qualifications, work_experience, attachments, status, decision_reason, decided_by, student_id, created_at) "
           "VALUES (?1,?2,?3,?4,?5,?6,?7,?8,?9,?10,?11,?12,?13,?14)")
        .bind(1, a.id)
        .bind(2, a.applicant_name)
        .bind(3, a.contact)
        .bind(4, a.proposed_program)
        .bind(5, a.citizenship)
        .bind(6, a.funding)
        .bind(7, a.qualifications)
        .bind(8, a.work_experience)
        .bind(9, nlohmann::json(a.attachments).dump())
        .bind(10, to_string(a.status))
        .bind(11, a.decision_reason)
        .bind(12, a.decided_by ? std::optional<std::string>(a.decided_by->str()) : std::nullopt)
        .bind(13, a.student_id ? std::optional<std::string>(a.student_id->str()) : std::nullopt)
        .bind(14, a.created_at)
        .run();
}

std::optional<Application> DataAccess::application(const std::string& id) {
    auto st = tx_.prepare(std::string(kApplicationCols) + "WHERE id = ?1");
    st.bind(1, id);
    if (!st.step()) return std::nullopt;
    return read_application(st);
}

void DataAccess::update_application(const Application& a) {
    tx_.prepare("UPDATE applications SET status = ?2, decision_reason = ?3, decided_by = ?4, student_id = ?5 WHERE id = ?1")
        .bind(1, a.id)
        .bind(2, to_string(a.status))
        .bind(3, a.decision_reason)
        .bind(4, a.decided_by ? std::optional<std::string>(a.decided_by->str()) : std::nullopt)
        .bind(5, a.student_id ? std::optional<std::string>(a.student_id->str()) : std::nullopt)
        .run();
}

std::vector<Application> DataAccess::applications() {
    std::vector<Application> out;
    auto st = tx_.prepare(std::string(kApplicationCols) + "ORDER BY created_at, id");
    while (st.step()) out.push_back(read_application(st));
    return out;
}

void DataAccess::insert_letter(const std::string& application_id, const Letter& l) {
    tx_.prepare("INSERT INTO letters(application_id, kind, recipient, body, rendered_at) VALUES (?1,?2,?3,?4,?5)")
        .bind(1, application_id)
        .bind(2, to_string(l.kind))
        .bind(3, l.recipient)
        .bind(4, l.body)
        .bind(5, l.rendered_at)
        .run();
}

std::vector<Letter> DataAccess::letters_for_application(const std::string& application_id) {
    std::vector<Letter> out;
    auto st = tx_.prepare("SELECT kind, recipient, body, rendered_at FROM letters WHERE application_id = ?1");
    st.bind(1, application_id);
    while (st.step()) {
        out.push_back(Letter{st.text(0) == "Offer" ? LetterKind::Offer : LetterKind::Decline, st.text(1), st.text(2),
                             st.text(3)});
    }
    return out;
}

void DataAccess::insert_graduation_request(const GraduationRequest& r) {
    tx_.prepare("INSERT INTO graduation_requests(id, student_id, status, decided_by, created_at) VALUES (?1,?2,?3,?4,?5)")
        .bind(1, r.id)
        .bind(2, r.student_id.str())
        .bind(3, to_string(r.status))
        .bind(4, r.decided_by ? std::optional<std::string>(r.decided_by->str()) : std::nullopt)
        .bind(5, r.created_at)
        .run();
}

namespace {

GraduationRequest read_graduation(const Statement& st) {
    return GraduationRequest{st.text(0), PersonId(st.text(1)), parse_request_status(st.text(2)), opt_person(st, 3),
                             st.text(4)};
}

ProgramChangeRequest read_program_change(const Statement& st) {
    return ProgramChangeRequest{st.text(0),      PersonId(st.text(1)), st.opt_text(2),
                                st.opt_text(3),  parse_request_status(st.text(4)), opt_person(st, 5),
                                st.text(6)};
}

}  // namespace

std::optional<GraduationRequest> DataAccess::graduation_request(const std::string& id) {
    auto st = tx_.prepare("SELECT id, student_id, status, decided_by, created_at FROM graduation_requests WHERE id = ?1");
    st.bind(1, id);
    if (!st.step()) return std::nullopt;
    return read_graduation(st);
}

void DataAccess::update_graduation_request(const GraduationRequest& r) {
    tx_.prepare("UPDATE graduation_requests SET status = ?2, decided_by = ?3 WHERE id = ?1")
        .bind(1, r.id)
        .bind(2, to_string(r.status))
        .bind(3, r.decided_by ? std::optional<std::string>(r.decided_by->str()) : std::nullopt)
        .run();
}

std::vector<GraduationRequest> DataAccess::graduation_requests() {
    std::vector<GraduationRequest> out;
    auto st = tx_.prepare("SELECT id, student_id, status, decided_by, created_at FROM graduation_requests "
                          "ORDER BY created_at, id");
    while (st.step()) out.push_back(read_graduation(st));
    return out;
}

void DataAccess::insert_program_change(const ProgramChangeRequest& r) {
    tx_.prepare(
           "INSERT INTO program_changes(id, student_id, new_program, new_major, status, decided_by, created_at) "
           "VALUES (?1,?2,?3,?4,?5,?6,?7)")
        .bind(1, r.id)
        .bind(2, r.student_id.str())
        .bind(3, r.new_program)
        .bind(4, r.new_major)
        .bind(5, to_string(r.status))
        .bind(6, r.decided_by ? std::optional<std::string>(r.decided_by->str()) : std::nullopt)
        .bind(7, r.created_at)
        .run();
}

std::optional<ProgramChangeRequest> DataAccess::program_change(const std::string& id) {
    auto st = tx_.prepare("SELECT id, student_id, new_program, new_major, status, decided_by, created_at "
                          "FROM program_changes WHERE id = ?1");
    st.bind(1, id);
    if (!st.step()) return std::nullopt;
    return read_program_change(st);
}

void DataAccess::update_program_change(const ProgramChangeRequest& r) {
    tx_.prepare("UPDATE program_changes SET status = ?2, decided_by = ?3 WHERE id = ?1")
        .bind(1, r.id)
        .bind(2, to_string(r.status))
        .bind(3, r.decided_by ? std::optional<std::string>(r.decided_by->str()) : std::nullopt)
        .run();
}

std::vector<ProgramChangeRequest> DataAccess::program_changes() {
    std::vector<ProgramChangeRequest> out;
    auto st = tx_.prepare("SELECT id, student_id, new_program, new_major, status, decided_by, created_at "
                          "FROM program_changes ORDER BY created_at, id");
    while (st.step()) out.push_back(read_program_change(st));
    return out;
}

std::optional<CourseworkItem> DataAccess::coursework(const CourseworkKey& key) {
    auto st = tx_.prepare(
        "SELECT score, max_score FROM coursework WHERE student_id = ?1 AND unit_code = ?2 AND term = ?3 "
        "AND assessment = ?4");
    st.bind(1, key.student_id.str()).bind(2, key.unit_code).bind(3, key.term.str()).bind(4, key.assessment);
    if (!st.step()) return std::nullopt;
    return CourseworkItem{key.student_id, key.unit_code, key.term, key.assessment, st.real(0), st.real(1)};
}

void DataAccess::upsert_coursework(const CourseworkItem& item) {
    tx_.prepare(
           "INSERT INTO coursework(student_id, unit_code, term, assessment, score, max_score) "
           "VALUES (?1,?2,?3,?4,?5,?6) ON CONFLICT(student_id, unit_code, term, assessment) "
           "DO UPDATE SET score = excluded.score, max_score = excluded.max_score")
        .bind(1, item.student_id.str())
        .bind(2, item.unit_code)
        .bind(3, item.term.str())
        .bind(4, item.assessment)
        .bind(5, item.score)
        .bind(6, item.max_score)
        .run();
}

std::vector<CourseworkItem> DataAccess::coursework_for(const PersonId& student, const TermId& term) {
    std::vector<CourseworkItem> out;
    auto st = tx_.prepare(
        "SELECT unit_code, assessment, score, max_score FROM coursework WHERE student_id = ?1 AND term = ?2 "
        "ORDER BY unit_code, assessment");
    st.bind(1, student.str()).bind(2, term.str());
    while (st.step()) out.push_back(CourseworkItem{student, st.text(0), term, st.text(1), st.real(2), st.real(3)});
    return out;
}

std::optional<Money> DataAccess::fee(const std::string& unit_code) {
    auto st = tx_.prepare("SELECT amount_cents FROM fees WHERE unit_code = ?1");
    st.bind(1, unit_code);
    if (!st.step()) return std::nullopt;
    return Money{st.integer(0)};
}

void DataAccess::insert_fee(const FeeRow& f) {
    if (f.amount.cents < 0) fail(ErrorCode::ValidationError, "fee for " + f.unit_code + " is negative");
    tx_.prepare("INSERT INTO fees(unit_code, amount_cents) VALUES (?1, ?2)").bind(1, f.unit_code).bind(2, f.amount.cents).run();
}

Invoice DataAccess::load_invoice_details(Invoice inv) {
    auto lines = tx_.prepare("SELECT unit_code, amount_cents FROM invoice_lines WHERE invoice_id = ?1 ORDER BY rowid");
    lines.bind(1, inv.id);
    while (lines.step()) {
        inv.line_items.push_back(InvoiceLine{lines.text(0), Money{lines.integer(1)}});
        inv.total = inv.total + Money{lines.integer(1)};
    }
    auto paid = tx_.prepare("SELECT COALESCE(SUM(amount_cents), 0) FROM payments WHERE invoice_id = ?1");
    paid.bind(1, inv.id);
    paid.step();
    inv.paid = Money{paid.integer(0)};
    return inv;
}

std::optional<Invoice> DataAccess::invoice(const std::string& id) {
    auto st = tx_.prepare("SELECT id, student_id, term, status FROM invoices WHERE id = ?1");
    st.bind(1, id);
    if (!st.step()) return std::nullopt;
    Invoice inv;
    inv.id = st.text(0);
    inv.student_id = PersonId(st.text(1));
    inv.term = TermId::parse(st.text(2));
    inv.status = parse_invoice_status(st.text(3));
    return load_invoice_details(std::move(inv));
}

std::optional<Invoice> DataAccess::open_invoice(const PersonId& student, const TermId& term) {
    auto st = tx_.prepare(
        "SELECT id FROM invoices WHERE student_id = ?1 AND term = ?2 AND status = 'Open' ORDER BY created_at LIMIT 1");
    st.bind(1, student.str()).bind(2, term.str());
    if (!st.step()) return std::nullopt;
    return invoice(st.text(0));
}

void DataAccess::insert_invoice(const Invoice& inv, const std::string& created_at) {
    tx_.prepare("INSERT INTO invoices(id, student_id, term, status, created_at) VALUES (?1,?2,?3,?4,?5)")
        .bind(1, inv.id)
        .bind(2, inv.student_id.str())
        .bind(3, inv.term.str())
        .bind(4, to_string(inv.status))
        .bind(5, created_at)
        .run();
}

void DataAccess::set_invoice_status(const std::string& id, InvoiceStatus status) {
    tx_.prepare("UPDATE invoices SET status = ?2 WHERE id = ?1").bind(1, id).bind(2, to_string(status)).run();
}

void DataAccess::delete_invoice(const std::string& id) {
    tx_.prepare("DELETE FROM invoice_lines WHERE invoice_id = ?1").bind(1, id).run();
    tx_.prepare("DELETE FROM invoices WHERE id = ?1").bind(1, id).run();
}

void DataAccess::insert_invoice_line(const std::string& invoice_id, const std::string& enrollment_id,
                                     const InvoiceLine& line) {
    tx_.prepare("INSERT INTO invoice_lines(invoice_id, enrollment_id, unit_code, amount_cents) VALUES (?1,?2,?3,?4)")
        .bind(1, invoice_id)
        .bind(2, enrollment_id)
        .bind(3, line.unit_code)
        .bind(4, line.amount.cents)
        .run();
}

std::optional<std::pair<std::string, Money>> DataAccess::remove_open_invoice_line(const std::string& enrollment_id) {
    auto st = tx_.prepare(
        "SELECT l.rowid, l.invoice_id, l.amount_cents FROM invoice_lines l JOIN invoices i ON i.id = l.invoice_id "
        "WHERE l.enrollment_id = ?1 AND i.status = 'Open'");
    st.bind(1, enrollment_id);
    if (!st.step()) return std::nullopt;
    const auto rowid = st.integer(0);
    auto removed = std::make_pair(st.text(1), Money{st.integer(2)});
    tx_.prepare("DELETE FROM invoice_lines WHERE rowid = ?1").bind(1, rowid).run();
    return removed;
}

std::vector<Invoice> DataAccess::invoices_for_student(const PersonId& student) {
    std::vector<std::string> ids;
    auto st = tx_.prepare("SELECT id FROM invoices WHERE student_id = ?1");
    st.bind(1, student.str());
    while (st.step()) ids.push_back(st.text(0));
    std::vector<Invoice> out;
    for (const auto& id : ids) out.push_back(*invoice(id));
    return out;
}

void DataAccess::insert_payment(const Payment& p) {
    tx_.prepare(
           "INSERT INTO payments(id, invoice_id, amount_cents, method, card_last4, recorded_at) "
           "VALUES (?1,?2,?3,?4,?5,?6)")
        .bind(1, p.id)
        .bind(2, p.invoice_id)
        .bind(3, p.amount.cents)
        .bind(4, p.method)
        .bind(5, p.card_last4)
        .bind(6, p.recorded_at)
        .run();
}

std::vector<Payment> DataAccess::payments_for_invoice(const std::string& invoice_id) {
    std::vector<Payment> out;
    auto st = tx_.prepare(
        "SELECT id, invoice_id, amount_cents, method, card_last4, recorded_at FROM payments WHERE invoice_id = ?1 "
        "ORDER BY recorded_at, id");
    st.bind(1, invoice_id);
    while (st.step()) {
        out.push_back(Payment{st.text(0), st.text(1), Money{st.integer(2)}, st.text(3), st.text(4), st.text(5)});
    }
    return out;
}

void DataAccess::insert_timetable_entry(const TimetableEntry& e) {
    tx_.prepare(
           "INSERT INTO timetable(unit_code, campus, term, kind, day, start, \"end\", room) "
           "VALUES (?1,?2,?3,?4,?5,?6,?7,?8)")
        .bind(1, e.unit_code)
        .bind(2, e.campus)
        .bind(3, e.term.str())
        .bind(4, to_string(e.kind))
        .bind(5, e.day)
        .bind(6, e.start)
        .bind(7, e.end)
        .bind(8, e.room)
        .run();
}

std::vector<TimetableEntry> DataAccess::timetable(const std::string& campus, const TermId& term, TimetableKind kind) {
    std::vector<TimetableEntry> out;
    auto st = tx_.prepare(
        "SELECT unit_code, day, start, \"end\", room FROM timetable WHERE campus = ?1 AND term = ?2 AND kind = ?3");
    st.bind(1, campus).bind(2, term.str()).bind(3, to_string(kind));
    while (st.step()) {
        out.push_back(TimetableEntry{st.text(0), campus, term, kind, st.text(1), st.text(2), st.text(3), st.text(4)});
    }
    return out;
}

void DataAccess::flag(const std::string& kind, const std::string& detail, const std::string& at) {
    tx_.prepare("INSERT INTO ops_flags(kind, detail, raised_at) VALUES (?1,?2,?3)").bind(1, kind).bind(2, detail).bind(3, at).run();
}

std::vector<std::pair<std::string, std::string>> DataAccess::flags() {
    std::vector<std::pair<std::string, std::string>> out;
    auto st = tx_.prepare("SELECT kind, detail FROM ops_flags ORDER BY rowid");
    while (st.step()) out.emplace_back(st.text(0), st.text(1));
    return out;
}

bool DataAccess::coursework_import_seen(const std::string& key) {
    auto st = tx_.prepare("SELECT 1 FROM coursework_imports WHERE idempotency_key = ?1");
    st.bind(1, key);
    return st.step();
}

void DataAccess::record_coursework_import(const std::string& key, const std::string& at) {
    tx_.prepare("INSERT OR IGNORE INTO coursework_imports(idempotency_key, imported_at) VALUES (?1, ?2)")
        .bind(1, key)
        .bind(2, at)
        .run();
}

}  // namespace campus
