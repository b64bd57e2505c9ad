// Durable state of the service in one SQLite file: jobs, stories, comments,
// accounts and feedback. All methods are thread-safe; state transitions of a
// job are serialized through the single connection.

#ifndef STAR_SERVICE_STORE_HPP
#define STAR_SERVICE_STORE_HPP

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

struct sqlite3;

namespace star::service {

class StoreError : public std::runtime_error {
 public:
  enum class Code { not_found, forbidden, conflict, invalid, internal };
  StoreError(Code code, const std::string& message) : std::runtime_error(message), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

enum class JobState { queued, running, done, failed };
std::string_view to_string(JobState state);

struct JobRecord {
  std::string id;
  std::string domain_text;
  std::string options_json;
  JobState state = JobState::queued;
  std::int64_t submitted_at = 0;  // unix milliseconds
  std::int64_t started_at = 0;
  std::int64_t finished_at = 0;
  std::string output;      // rendered raw output
  std::string structured;  // JSON reports
  std::string error;
};

enum class Visibility { private_, public_ };

struct StoryRecord {
  std::string id;
  std::string owner;  // user id, or "examples"
  std::string title;
  std::string story_text;
  std::string knowledge_text;
  Visibility visibility = Visibility::private_;
  bool example = false;
  std::int64_t created_at = 0;
  std::int64_t updated_at = 0;
};

struct Comment {
  std::string id;
  std::string story_id;
  std::string author;  // user id
  std::string author_name;
  std::string body;
  std::int64_t created_at = 0;
};

enum class StoryScope { mine, public_, examples };

/// Cost of password hashing. `minimal` exists for tests.
enum class HashCost { interactive, minimal };

std::int64_t now_ms();
/// 32 hex characters from the system CSPRNG.
std::string random_id();

class Store {
 public:
  /// Opens (creating if needed) and migrates the database. ":memory:" works.
  explicit Store(const std::string& path, HashCost cost = HashCost::interactive);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  int schema_version() const;
  static int latest_schema_version();

  // Jobs
  void insert_job(const JobRecord& job);
  std::optional<JobRecord> job(const std::string& id) const;
  /// queued -> running, only when `token` is the first claimant.
  bool claim_job(const std::string& id, const std::string& token);
  /// running -> done/failed, only for the claim holder.
  bool finish_job(const std::string& id, const std::string& token, bool ok, const std::string& output,
                  const std::string& structured, const std::string& error);
  /// Queued job ids, oldest first.
  std::vector<std::string> queued_jobs() const;
  /// Puts interrupted running jobs back in the queue; returns how many.
  int requeue_running();
  /// Deletes finished jobs older than `cutoff_ms`; returns how many.
  int purge_jobs(std::int64_t cutoff_ms);

  // Accounts
  std::string create_user(const std::string& name, const std::string& password);
  std::optional<std::string> authenticate(const std::string& name, const std::string& password) const;
  std::string issue_token(const std::string& user_id);
  std::optional<std::string> user_for_token(const std::string& token) const;
  std::optional<std::string> user_name(const std::string& user_id) const;

  // Stories. `viewer` is a user id or empty for anonymous callers.
  StoryRecord create_story(const std::string& owner, const std::string& title, const std::string& story,
                           const std::string& knowledge);
  StoryRecord update_story(const std::string& id, const std::string& viewer, const std::string& title,
                           const std::string& story, const std::string& knowledge);
  StoryRecord story(const std::string& id, const std::string& viewer) const;
  std::vector<StoryRecord> list_stories(StoryScope scope, const std::string& viewer) const;
  StoryRecord share_story(const std::string& id, const std::string& viewer);
  /// Inserts or refreshes an example story keyed by title.
  void upsert_example(const std::string& title, const std::string& story, const std::string& knowledge);

  // Comments, public stories only
  Comment add_comment(const std::string& story_id, const std::string& author, const std::string& body);
  std::vector<Comment> comments(const std::string& story_id) const;

  // Feedback
  std::string add_feedback(const std::string& message, const std::string& contact);
  std::size_t feedback_count() const;

 private:
  void migrate();
  void exec(const char* sql) const;

  sqlite3* db_ = nullptr;
  HashCost cost_;
  mutable std::recursive_mutex mutex_;
};

}  // namespace star::service

#endif  // STAR_SERVICE_STORE_HPP
