#pragma once

// Named exploration sessions driven by versioned commands.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

#include "strata/scene.hpp"
#include "strata/state_document.hpp"

namespace strata {

enum Aspect : std::uint32_t {
  kAspectRows = 1U << 0,
  kAspectLayout = 1U << 1,
  kAspectColumns = 1U << 2,
  kAspectSelection = 1U << 3,
};

struct Command {
  std::string session;
  std::uint64_t expected_version = 0;
  std::string op;
  nlohmann::json payload = nlohmann::json::object();
};

// Throws ValidationError when the envelope is malformed.
Command parse_command(const nlohmann::json& j);

struct Delta {
  std::uint64_t version = 0;
  std::uint32_t changed = 0;
  std::optional<Scene> scene;
  std::optional<nlohmann::json> panel;
  std::optional<nlohmann::json> document;  // snapshot op
  std::optional<std::string> column;       // combine_columns: new column id
};

struct Rejection {
  enum class Reason { version_conflict, invalid };
  Reason reason = Reason::invalid;
  std::uint64_t current_version = 0;
  std::string message;
};

using Outcome = std::variant<Delta, Rejection>;

nlohmann::json to_json(const Delta& d);
nlohmann::json to_json(const Rejection& r);
nlohmann::json to_json(const Outcome& o);

// Per-column summaries of the filtered rows for the data selection panel.
nlohmann::json panel_payload(const Table& table);

// Filtered rows in traversal order with aggregated groups expanded. A
// "group" column names the enclosing aggregated group when grouping is on.
std::string export_csv(const Table& table);

class Session {
 public:
  Session(std::string id, std::shared_ptr<const Dataset> dataset, LayoutParams params = {});

  const std::string& id() const { return id_; }

  // Serialized with other commands on this session.
  Outcome apply(const Command& command);

  // Read-only views over a consistent snapshot.
  Table table() const;
  std::uint64_t version() const;
  nlohmann::json snapshot() const;
  std::string export_csv() const;
  // Rows [first, end) of the traversal, clamped.
  Scene scene(std::size_t first, std::size_t end) const;

 private:
  Delta mutate(const Command& c);
  static Scene scene_for(const Table& table, const LayoutParams& params, std::size_t first,
                         std::size_t end);

  std::string id_;
  mutable std::mutex mutex_;
  Table table_;
  LayoutParams params_;
  std::size_t window_first_ = 0;
  std::size_t window_end_ = 50;
};

class SessionService {
 public:
  explicit SessionService(LayoutParams params = {}) : params_(params) {}

  // Loads the dataset and returns the new session id.
  std::string create(std::string_view csv, std::optional<std::string_view> descriptor = {});
  std::string create(std::shared_ptr<const Dataset> dataset);

  // nullptr when unknown.
  std::shared_ptr<Session> find(std::string_view id) const;

  // Rejection with reason invalid when the session is unknown.
  Outcome apply(const Command& command);

 private:
  LayoutParams params_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>, std::less<>> sessions_;
  std::uint64_t counter_ = 0;
};

}  // namespace strata
