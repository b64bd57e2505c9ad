#include "star/service/store.hpp"

#include <chrono>

#include <sodium.h>
#include <sqlite3.h>

namespace star::service {

namespace {

// Each entry upgrades the schema by one version.
const char* const kMigrations[] = {
    R"sql(
CREATE TABLE users (
  id TEXT PRIMARY KEY,
  name TEXT NOT NULL UNIQUE,
  password_hash TEXT NOT NULL,
  created_at INTEGER NOT NULL
);
CREATE TABLE tokens (
  token TEXT PRIMARY KEY,
  user_id TEXT NOT NULL REFERENCES users(id),
  created_at INTEGER NOT NULL
);
CREATE TABLE jobs (
  seq INTEGER PRIMARY KEY AUTOINCREMENT,
  id TEXT NOT NULL UNIQUE,
  domain_text TEXT NOT NULL,
  options_json TEXT NOT NULL,
  state TEXT NOT NULL,
  claim TEXT,
  submitted_at INTEGER NOT NULL,
  started_at INTEGER NOT NULL DEFAULT 0,
  finished_at INTEGER NOT NULL DEFAULT 0,
  output TEXT NOT NULL DEFAULT '',
  structured TEXT NOT NULL DEFAULT '',
  error TEXT NOT NULL DEFAULT ''
);
CREATE INDEX jobs_state ON jobs(state, seq);
CREATE TABLE stories (
  seq INTEGER PRIMARY KEY AUTOINCREMENT,
  id TEXT NOT NULL UNIQUE,
  owner TEXT NOT NULL,
  title TEXT NOT NULL,
  story_text TEXT NOT NULL,
  knowledge_text TEXT NOT NULL,
  visibility TEXT NOT NULL,
  example INTEGER NOT NULL DEFAULT 0,
  created_at INTEGER NOT NULL,
  updated_at INTEGER NOT NULL
);
CREATE TABLE comments (
  seq INTEGER PRIMARY KEY AUTOINCREMENT,
  id TEXT NOT NULL UNIQUE,
  story_id TEXT NOT NULL REFERENCES stories(id) ON DELETE CASCADE,
  author TEXT NOT NULL,
  body TEXT NOT NULL,
  created_at INTEGER NOT NULL
);
CREATE TABLE feedback (
  seq INTEGER PRIMARY KEY AUTOINCREMENT,
  id TEXT NOT NULL UNIQUE,
  message TEXT NOT NULL,
  contact TEXT NOT NULL,
  created_at INTEGER NOT NULL
);
)sql",
};

constexpr int kLatest = static_cast<int>(std::size(kMigrations));

[[noreturn]] void fail(sqlite3* db, const std::string& what) {
  throw StoreError(StoreError::Code::internal, what + ": " + sqlite3_errmsg(db));
}

class Stmt {
 public:
  Stmt(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) fail(db, "prepare");
  }
  ~Stmt() { sqlite3_finalize(stmt_); }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;

  Stmt& bind(int i, const std::string& v) {
    sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Stmt& bind(int i, std::int64_t v) {
    sqlite3_bind_int64(stmt_, i, v);
    return *this;
  }
  bool step() {
    int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    if (rc == SQLITE_CONSTRAINT) throw StoreError(StoreError::Code::conflict, sqlite3_errmsg(db_));
    fail(db_, "step");
  }
  void run() { step(); }
  std::string text(int col) const {
    auto p = sqlite3_column_text(stmt_, col);
    return p ? std::string(reinterpret_cast<const char*>(p), sqlite3_column_bytes(stmt_, col)) : "";
  }
  std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }
  int changes() const { return sqlite3_changes(db_); }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

JobState parse_state(const std::string& s) {
  if (s == "running") return JobState::running;
  if (s == "done") return JobState::done;
  if (s == "failed") return JobState::failed;
  return JobState::queued;
}

const char* visibility_text(Visibility v) { return v == Visibility::public_ ? "public" : "private"; }

constexpr const char* kStoryColumns =
    "id, owner, title, story_text, knowledge_text, visibility, example, created_at, updated_at";

StoryRecord read_story_row(const Stmt& s) {
  StoryRecord r;
  r.id = s.text(0);
  r.owner = s.text(1);
  r.title = s.text(2);
  r.story_text = s.text(3);
  r.knowledge_text = s.text(4);
  r.visibility = s.text(5) == "public" ? Visibility::public_ : Visibility::private_;
  r.example = s.integer(6) != 0;
  r.created_at = s.integer(7);
  r.updated_at = s.integer(8);
  return r;
}

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw StoreError(StoreError::Code::internal, "libsodium failed to initialise");
}

}  // namespace

std::string_view to_string(JobState state) {
  switch (state) {
    case JobState::queued: return "queued";
    case JobState::running: return "running";
    case JobState::done: return "done";
    case JobState::failed: break;
  }
  return "failed";
}

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string random_id() {
  ensure_sodium();
  unsigned char bytes[16];
  randombytes_buf(bytes, sizeof bytes);
  char hex[sizeof bytes * 2 + 1];
  sodium_bin2hex(hex, sizeof hex, bytes, sizeof bytes);
  return hex;
}

Store::Store(const std::string& path, HashCost cost) : cost_(cost) {
  ensure_sodium();
  const int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX;
  if (sqlite3_open_v2(path.c_str(), &db_, flags, nullptr) != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    db_ = nullptr;
    throw StoreError(StoreError::Code::internal, "cannot open database " + path + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  exec("PRAGMA foreign_keys = ON;");
  if (path != ":memory:") exec("PRAGMA journal_mode = WAL;");
  migrate();
}

Store::~Store() { sqlite3_close(db_); }

void Store::exec(const char* sql) const {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw StoreError(StoreError::Code::internal, msg);
  }
}

void Store::migrate() {
  std::lock_guard lock(mutex_);
  exec("CREATE TABLE IF NOT EXISTS schema_version (version INTEGER NOT NULL);");
  int current = schema_version();
  if (current > kLatest) {
    throw StoreError(StoreError::Code::internal,
                     "database schema version " + std::to_string(current) + " is newer than this build");
  }
  for (int v = current; v < kLatest; ++v) {
    exec("BEGIN IMMEDIATE;");
    try {
      exec(kMigrations[v]);
      exec("DELETE FROM schema_version;");
      Stmt(db_, "INSERT INTO schema_version(version) VALUES (?)").bind(1, std::int64_t{v + 1}).run();
      exec("COMMIT;");
    } catch (...) {
      exec("ROLLBACK;");
      throw;
    }
  }
}

int Store::schema_version() const {
  std::lock_guard lock(mutex_);
  Stmt s(db_, "SELECT MAX(version) FROM schema_version");
  return s.step() ? static_cast<int>(s.integer(0)) : 0;
}

int Store::latest_schema_version() { return kLatest; }

// Jobs ---------------------------------------------------------------------

void Store::insert_job(const JobRecord& job) {
  std::lock_guard lock(mutex_);
  Stmt s(db_,
         "INSERT INTO jobs(id, domain_text, options_json, state, submitted_at) VALUES (?, ?, ?, 'queued', ?)");
  s.bind(1, job.id).bind(2, job.domain_text).bind(3, job.options_json).bind(4, job.submitted_at).run();
}

std::optional<JobRecord> Store::job(const std::string& id) const {
  std::lock_guard lock(mutex_);
  Stmt s(db_,
         "SELECT id, domain_text, options_json, state, submitted_at, started_at, finished_at, output, "
         "structured, error FROM jobs WHERE id = ?");
  s.bind(1, id);
  if (!s.step()) return std::nullopt;
  JobRecord r;
  r.id = s.text(0);
  r.domain_text = s.text(1);
  r.options_json = s.text(2);
  r.state = parse_state(s.text(3));
  r.submitted_at = s.integer(4);
  r.started_at = s.integer(5);
  r.finished_at = s.integer(6);
  r.output = s.text(7);
  r.structured = s.text(8);
  r.error = s.text(9);
  return r;
}

bool Store::claim_job(const std::string& id, const std::string& token) {
  std::lock_guard lock(mutex_);
  Stmt s(db_, "UPDATE jobs SET state = 'running', claim = ?, started_at = ? WHERE id = ? AND state = 'queued'");
  s.bind(1, token).bind(2, now_ms()).bind(3, id).run();
  return s.changes() == 1;
}

bool Store::finish_job(const std::string& id, const std::string& token, bool ok, const std::string& output,
                       const std::string& structured, const std::string& error) {
  std::lock_guard lock(mutex_);
  Stmt s(db_,
         "UPDATE jobs SET state = ?, finished_at = ?, output = ?, structured = ?, error = ? "
         "WHERE id = ? AND claim = ? AND state = 'running'");
  s.bind(1, std::string(ok ? "done" : "failed"))
      .bind(2, now_ms())
      .bind(3, output)
      .bind(4, structured)
      .bind(5, error)
      .bind(6, id)
      .bind(7, token)
      .run();
  return s.changes() == 1;
}

std::vector<std::string> Store::queued_jobs() const {
  std::lock_guard lock(mutex_);
  Stmt s(db_, "SELECT id FROM jobs WHERE state = 'queued' ORDER BY seq");
  std::vector<std::string> out;
  while (s.step()) out.push_back(s.text(0));
  return out;
}

int Store::requeue_running() {
  std::lock_guard lock(mutex_);
  Stmt s(db_, "UPDATE jobs SET state = 'queued', claim = NULL, started_at = 0 WHERE state = 'running'");
  s.run();
  return s.changes();
}

int Store::purge_jobs(std::int64_t cutoff_ms) {
  std::lock_guard lock(mutex_);
  Stmt s(db_, "DELETE FROM jobs WHERE state IN ('done', 'failed') AND finished_at < ?");
  s.bind(1, cutoff_ms).run();
  return s.changes();
}

// Accounts -----------------------------------------------------------------

std::string Store::create_user(const std::string& name, const std::string& password) {
  if (name.empty() || name.size() > 64) throw StoreError(StoreError::Code::invalid, "user name must be 1-64 characters");
  if (password.size() < 8) throw StoreError(StoreError::Code::invalid, "password must have at least 8 characters");
  char hash[crypto_pwhash_STRBYTES];
  const auto ops = cost_ == HashCost::minimal ? crypto_pwhash_OPSLIMIT_MIN : crypto_pwhash_OPSLIMIT_INTERACTIVE;
  const auto mem = cost_ == HashCost::minimal ? crypto_pwhash_MEMLIMIT_MIN : crypto_pwhash_MEMLIMIT_INTERACTIVE;
  if (crypto_pwhash_str(hash, password.data(), password.size(), ops, mem) != 0) {
    throw StoreError(StoreError::Code::internal, "password hashing ran out of memory");
  }
  std::string id = random_id();
  std::lock_guard lock(mutex_);
  {
    Stmt exists(db_, "SELECT 1 FROM users WHERE name = ?");
    exists.bind(1, name);
    if (exists.step()) throw StoreError(StoreError::Code::conflict, "user name '" + name + "' is taken");
  }
  Stmt s(db_, "INSERT INTO users(id, name, password_hash, created_at) VALUES (?, ?, ?, ?)");
  s.bind(1, id).bind(2, name).bind(3, std::string(hash)).bind(4, now_ms()).run();
  return id;
}

std::optional<std::string> Store::authenticate(const std::string& name, const std::string& password) const {
  std::string id, hash;
  {
    std::lock_guard lock(mutex_);
    Stmt s(db_, "SELECT id, password_hash FROM users WHERE name = ?");
    s.bind(1, name);
    if (!s.step()) return std::nullopt;
    id = s.text(0);
    hash = s.text(1);
  }
  if (crypto_pwhash_str_verify(hash.c_str(), password.data(), password.size()) != 0) return std::nullopt;
  return id;
}

std::string Store::issue_token(const std::string& user_id) {
  std::string token = random_id() + random_id();
  std::lock_guard lock(mutex_);
  Stmt s(db_, "INSERT INTO tokens(token, user_id, created_at) VALUES (?, ?, ?)");
  s.bind(1, token).bind(2, user_id).bind(3, now_ms()).run();
  return token;
}

std::optional<std::string> Store::user_for_token(const std::string& token) const {
  std::lock_guard lock(mutex_);
  Stmt s(db_, "SELECT user_id FROM tokens WHERE token = ?");
  s.bind(1, token);
  if (!s.step()) return std::nullopt;
  return s.text(0);
}

std::optional<std::string> Store::user_name(const std::string& user_id) const {
  std::lock_guard lock(mutex_);
  Stmt s(db_, "SELECT name FROM users WHERE id = ?");
  s.bind(1, user_id);
  if (!s.step()) return std::nullopt;
  return s.text(0);
}

// Stories ------------------------------------------------------------------

StoryRecord Store::create_story(const std::string& owner, const std::string& title, const std::string& story,
                                const std::string& knowledge) {
  if (owner.empty()) throw StoreError(StoreError::Code::forbidden, "saving a story requires an account");
  std::lock_guard lock(mutex_);
  const auto now = now_ms();
  const std::string id = random_id();
  Stmt s(db_,
         "INSERT INTO stories(id, owner, title, story_text, knowledge_text, visibility, example, created_at, "
         "updated_at) VALUES (?, ?, ?, ?, ?, 'private', 0, ?, ?)");
  s.bind(1, id).bind(2, owner).bind(3, title).bind(4, story).bind(5, knowledge).bind(6, now).bind(7, now).run();
  return this->story(id, owner);
}

StoryRecord Store::story(const std::string& id, const std::string& viewer) const {
  std::lock_guard lock(mutex_);
  Stmt s(db_, (std::string("SELECT ") + kStoryColumns + " FROM stories WHERE id = ?").c_str());
  s.bind(1, id);
  if (!s.step()) throw StoreError(StoreError::Code::not_found, "no story " + id);
  StoryRecord r = read_story_row(s);
  if (r.visibility != Visibility::public_ && r.owner != viewer) {
    throw StoreError(StoreError::Code::forbidden, "story " + id + " is private");
  }
  return r;
}

StoryRecord Store::update_story(const std::string& id, const std::string& viewer, const std::string& title,
                                const std::string& story, const std::string& knowledge) {
  std::lock_guard lock(mutex_);
  StoryRecord current = this->story(id, viewer);
  if (current.owner != viewer) throw StoreError(StoreError::Code::forbidden, "only the owner may edit a story");
  Stmt s(db_, "UPDATE stories SET title = ?, story_text = ?, knowledge_text = ?, updated_at = ? WHERE id = ?");
  s.bind(1, title).bind(2, story).bind(3, knowledge).bind(4, now_ms()).bind(5, id).run();
  return this->story(id, viewer);
}

std::vector<StoryRecord> Store::list_stories(StoryScope scope, const std::string& viewer) const {
  std::lock_guard lock(mutex_);
  std::string sql = std::string("SELECT ") + kStoryColumns + " FROM stories WHERE ";
  switch (scope) {
    case StoryScope::mine:
      if (viewer.empty()) throw StoreError(StoreError::Code::forbidden, "listing own stories requires an account");
      sql += "owner = ?1 AND example = 0";
      break;
    case StoryScope::public_: sql += "visibility = 'public' AND example = 0"; break;
    case StoryScope::examples: sql += "example = 1"; break;
  }
  sql += " ORDER BY seq";
  Stmt s(db_, sql.c_str());
  if (scope == StoryScope::mine) s.bind(1, viewer);
  std::vector<StoryRecord> out;
  while (s.step()) out.push_back(read_story_row(s));
  return out;
}

StoryRecord Store::share_story(const std::string& id, const std::string& viewer) {
  std::lock_guard lock(mutex_);
  StoryRecord current = story(id, viewer);
  if (current.owner != viewer) throw StoreError(StoreError::Code::forbidden, "only the owner may share a story");
  Stmt s(db_, "UPDATE stories SET visibility = ?, updated_at = ? WHERE id = ?");
  s.bind(1, std::string(visibility_text(Visibility::public_))).bind(2, now_ms()).bind(3, id).run();
  return story(id, viewer);
}

void Store::upsert_example(const std::string& title, const std::string& story, const std::string& knowledge) {
  std::lock_guard lock(mutex_);
  const auto now = now_ms();
  Stmt find(db_, "SELECT id FROM stories WHERE example = 1 AND title = ?");
  find.bind(1, title);
  if (find.step()) {
    Stmt s(db_, "UPDATE stories SET story_text = ?, knowledge_text = ?, updated_at = ? WHERE id = ?");
    s.bind(1, story).bind(2, knowledge).bind(3, now).bind(4, find.text(0)).run();
    return;
  }
  Stmt s(db_,
         "INSERT INTO stories(id, owner, title, story_text, knowledge_text, visibility, example, created_at, "
         "updated_at) VALUES (?, 'examples', ?, ?, ?, 'public', 1, ?, ?)");
  s.bind(1, random_id()).bind(2, title).bind(3, story).bind(4, knowledge).bind(5, now).bind(6, now).run();
}

// Comments -----------------------------------------------------------------

Comment Store::add_comment(const std::string& story_id, const std::string& author, const std::string& body) {
  if (author.empty()) throw StoreError(StoreError::Code::forbidden, "commenting requires an account");
  if (body.empty()) throw StoreError(StoreError::Code::invalid, "comment is empty");
  std::lock_guard lock(mutex_);
  StoryRecord target = story(story_id, author);
  if (target.visibility != Visibility::public_) {
    throw StoreError(StoreError::Code::forbidden, "comments are only open on shared stories");
  }
  Comment c{random_id(), story_id, author, user_name(author).value_or(""), body, now_ms()};
  Stmt s(db_, "INSERT INTO comments(id, story_id, author, body, created_at) VALUES (?, ?, ?, ?, ?)");
  s.bind(1, c.id).bind(2, c.story_id).bind(3, c.author).bind(4, c.body).bind(5, c.created_at).run();
  return c;
}

std::vector<Comment> Store::comments(const std::string& story_id) const {
  std::lock_guard lock(mutex_);
  StoryRecord target = story(story_id, "");
  Stmt s(db_,
         "SELECT c.id, c.story_id, c.author, COALESCE(u.name, ''), c.body, c.created_at FROM comments c "
         "LEFT JOIN users u ON u.id = c.author WHERE c.story_id = ? ORDER BY c.seq");
  s.bind(1, target.id);
  std::vector<Comment> out;
  while (s.step()) out.push_back({s.text(0), s.text(1), s.text(2), s.text(3), s.text(4), s.integer(5)});
  return out;
}

// Feedback -----------------------------------------------------------------

std::string Store::add_feedback(const std::string& message, const std::string& contact) {
  if (message.empty()) throw StoreError(StoreError::Code::invalid, "feedback message is empty");
  std::lock_guard lock(mutex_);
  std::string id = random_id();
  Stmt s(db_, "INSERT INTO feedback(id, message, contact, created_at) VALUES (?, ?, ?, ?)");
  s.bind(1, id).bind(2, message).bind(3, contact).bind(4, now_ms()).run();
  return id;
}

std::size_t Store::feedback_count() const {
  std::lock_guard lock(mutex_);
  Stmt s(db_, "SELECT COUNT(*) FROM feedback");
  s.step();
  return static_cast<std::size_t>(s.integer(0));
}

}  // namespace star::service
