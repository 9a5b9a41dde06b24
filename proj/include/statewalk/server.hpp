#pragma once

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include "statewalk/coverage.hpp"
#include "statewalk/published.hpp"
#include "statewalk/reproducer.hpp"
#include "statewalk/state_model.hpp"

namespace httplib {
class Server;
}

namespace statewalk {

enum class JobStatus { queued, running, done, failed };
std::string_view to_string(JobStatus status);

struct ReproduceJob {
  std::string job_id;
  StateId target;
  JobStatus status = JobStatus::queued;
  std::optional<ReproduceResult> result;
  std::string error;
};

nlohmann::json to_json(const ReproduceJob& job);

using ReproduceRunner = std::function<ReproduceResult(const StateModel& model, StateId target)>;

/// In-memory job store with one worker thread; jobs run serially in
/// submission order and their status only moves forward.
class JobQueue {
 public:
  explicit JobQueue(ReproduceRunner runner);
  ~JobQueue();
  JobQueue(const JobQueue&) = delete;
  JobQueue& operator=(const JobQueue&) = delete;

  std::string submit(std::shared_ptr<const StateModel> model, StateId target);
  std::optional<ReproduceJob> get(const std::string& job_id) const;

 private:
  void work();

  ReproduceRunner runner_;
  mutable std::mutex mutex_;
  std::condition_variable wake_;
  std::map<std::string, ReproduceJob> jobs_;
  std::deque<std::pair<std::string, std::shared_ptr<const StateModel>>> pending_;
  std::size_t next_id_ = 1;
  bool stopping_ = false;
  std::thread worker_;
};

struct ServerSources {
  std::shared_ptr<Published<StateModel>> model;
  std::shared_ptr<Published<CoverageLog>> coverage;
  // True while an exploration is still feeding the sources.
  std::function<bool()> live = [] { return false; };
  ReproduceRunner reproduce;
  std::optional<std::filesystem::path> static_dir;
};

/// JSON/CSV control surface over a model, its coverage log and reproduce jobs.
///
///   GET  /api/model/graph           GET /api/state/{id}/snapshot
///   GET  /api/coverage (CSV)        GET /api/coverage/summary
///   POST /api/reproduce {"target"}  GET /api/reproduce/{job_id}
///   GET  /api/events  (server-sent events, or JSON with ?since=N)
class ApiServer {
 public:
  inline static constexpr std::string_view kDefaultHost = "localhost";
  inline static constexpr int kDefaultPort = 5000;

  explicit ApiServer(ServerSources sources);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port, throws
  /// std::runtime_error on failure.
  int bind(const std::string& host, int port);
  /// Serves on a background thread until stop().
  void start();
  /// Serves on the calling thread until stop().
  void run();
  void stop();

 private:
  void install_routes();

  ServerSources sources_;
  std::unique_ptr<httplib::Server> http_;
  JobQueue jobs_;
  std::thread thread_;
};

}  // namespace statewalk
