#include "statewalk/server.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "httplib.h"

namespace statewalk {

using nlohmann::json;

std::string_view to_string(JobStatus status) {
  switch (status) {
    case JobStatus::queued: return "queued";
    case JobStatus::running: return "running";
    case JobStatus::done: return "done";
    case JobStatus::failed: return "failed";
  }
  return "queued";
}

json to_json(const ReproduceJob& job) {
  json j{{"job_id", job.job_id},
         {"target", job.target.ordinal},
         {"status", std::string(to_string(job.status))}};
  j["result"] = job.result ? to_json(*job.result) : json(nullptr);
  if (!job.error.empty()) j["error"] = job.error;
  return j;
}

// ---------------------------------------------------------------------------
// JobQueue

JobQueue::JobQueue(ReproduceRunner runner)
    : runner_(std::move(runner)), worker_([this] { work(); }) {}

JobQueue::~JobQueue() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  worker_.join();
}

std::string JobQueue::submit(std::shared_ptr<const StateModel> model, StateId target) {
  std::string id;
  {
    std::lock_guard lock(mutex_);
    id = "job-" + std::to_string(next_id_++);
    jobs_.emplace(id, ReproduceJob{id, target, JobStatus::queued, std::nullopt, {}});
    pending_.emplace_back(id, std::move(model));
  }
  wake_.notify_one();
  return id;
}

std::optional<ReproduceJob> JobQueue::get(const std::string& job_id) const {
  std::lock_guard lock(mutex_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

void JobQueue::work() {
  for (;;) {
    std::string id;
    std::shared_ptr<const StateModel> model;
    StateId target;
    {
      std::unique_lock lock(mutex_);
      wake_.wait(lock, [this] { return stopping_ || !pending_.empty(); });
      if (stopping_) return;
      std::tie(id, model) = std::move(pending_.front());
      pending_.pop_front();
      auto& job = jobs_.at(id);
      job.status = JobStatus::running;
      target = job.target;
    }
    std::optional<ReproduceResult> result;
    std::string error;
    try {
      if (!runner_) throw std::runtime_error("no reproduce runner configured");
      result = runner_(*model, target);
    } catch (const std::exception& e) {
      error = e.what();
    }
    std::lock_guard lock(mutex_);
    auto& job = jobs_.at(id);
    job.result = std::move(result);
    job.error = std::move(error);
    job.status = job.result ? JobStatus::done : JobStatus::failed;
  }
}

// ---------------------------------------------------------------------------
// ApiServer

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

constexpr const char* kPlaceholderPage =
    "<!doctype html><html><head><title>statewalk</title></head><body>"
    "<h1>statewalk</h1><p>API: <a href=\"/api/model/graph\">/api/model/graph</a>, "
    "<a href=\"/api/coverage/summary\">/api/coverage/summary</a></p></body></html>";

}  // namespace

ApiServer::ApiServer(ServerSources sources)
    : sources_(std::move(sources)),
      http_(std::make_unique<httplib::Server>()),
      jobs_(sources_.reproduce) {
  if (!sources_.model) sources_.model = std::make_shared<Published<StateModel>>();
  if (!sources_.coverage) sources_.coverage = std::make_shared<Published<CoverageLog>>();
  if (!sources_.live) sources_.live = [] { return false; };
  install_routes();
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) {
    int bound = http_->bind_to_any_port(host);
    if (bound <= 0) throw std::runtime_error("cannot bind " + host);
    return bound;
  }
  if (!http_->bind_to_port(host, port)) {
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void ApiServer::start() {
  thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
}

void ApiServer::run() { http_->listen_after_bind(); }

void ApiServer::stop() {
  http_->stop();
  if (thread_.joinable()) thread_.join();
}

void ApiServer::install_routes() {
  auto& srv = *http_;
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Headers", "Content-Type"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});

  srv.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  srv.Get("/api/model/graph", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, sources_.model->read()->export_graph());
  });

  srv.Get(R"(/api/state/(\d+)/snapshot)", [this](const httplib::Request& req,
                                                 httplib::Response& res) {
    auto model = sources_.model->read();
    StateId id{std::stoul(req.matches[1])};
    if (!model->contains(id)) return send_error(res, 404, "unknown state " + to_string(id));
    send_json(res, 200, to_json(model->state(id).snapshot));
  });

  srv.Get("/api/coverage", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(to_csv(*sources_.coverage->read()), "text/csv");
  });

  srv.Get("/api/coverage/summary", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, summary_json(*sources_.coverage->read()));
  });

  srv.Post("/api/reproduce", [this](const httplib::Request& req, httplib::Response& res) {
    if (req.get_header_value("Content-Type").rfind("application/json", 0) != 0) {
      return send_error(res, 415, "content type must be application/json");
    }
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error& e) {
      return send_error(res, 400, std::string("malformed JSON: ") + e.what());
    }
    if (!body.is_object() || !body.contains("target") || !body["target"].is_number_unsigned()) {
      return send_error(res, 400, "body must be {\"target\": <state number>}");
    }
    auto model = sources_.model->read();
    StateId target{body["target"].get<std::size_t>()};
    if (!model->contains(target)) return send_error(res, 404, "unknown state " + to_string(target));
    std::string id = jobs_.submit(model, target);
    send_json(res, 202, {{"job_id", id}, {"status", "queued"}});
  });

  srv.Get(R"(/api/reproduce/([\w-]+))", [this](const httplib::Request& req,
                                                httplib::Response& res) {
    auto job = jobs_.get(req.matches[1]);
    if (!job) return send_error(res, 404, "unknown job " + std::string(req.matches[1]));
    send_json(res, 200, to_json(*job));
  });

  srv.Get("/api/events", [this](const httplib::Request& req, httplib::Response& res) {
    auto sample_json = [](const CoverageSample& s) {
      return json{{"elapsed_ms", s.elapsed_ms},
                  {"states", s.states},
                  {"transitions", s.transitions},
                  {"events_sent", s.events_sent}};
    };
    std::size_t since = 0;
    if (req.has_param("since")) {
      try {
        since = std::stoul(req.get_param_value("since"));
      } catch (const std::exception&) {
        return send_error(res, 400, "since must be a non-negative integer");
      }
    }
    if (req.get_header_value("Accept").find("text/event-stream") == std::string::npos) {
      auto log = sources_.coverage->read();
      json samples = json::array();
      for (std::size_t i = since; i < log->samples().size(); ++i) {
        samples.push_back(sample_json(log->samples()[i]));
      }
      return send_json(res, 200,
                       {{"samples", samples},
                        {"next", std::max(since, log->samples().size())},
                        {"live", sources_.live()}});
    }
    auto cursor = std::make_shared<std::size_t>(since);
    res.set_chunked_content_provider(
        "text/event-stream",
        [this, cursor, sample_json](std::size_t, httplib::DataSink& sink) {
          auto log = sources_.coverage->read();
          const auto& samples = log->samples();
          if (*cursor < samples.size()) {
            for (; *cursor < samples.size(); ++*cursor) {
              std::string msg = "data: " + sample_json(samples[*cursor]).dump() + "\n\n";
              if (!sink.write(msg.data(), msg.size())) return false;
            }
            return true;
          }
          if (!sources_.live()) {
            sink.done();
            return true;
          }
          std::this_thread::sleep_for(std::chrono::milliseconds(100));
          return true;
        });
  });

  srv.Get("/", [this](const httplib::Request&, httplib::Response& res) {
    if (sources_.static_dir) {
      std::ifstream in(*sources_.static_dir / "index.html");
      if (in) {
        std::ostringstream buf;
        buf << in.rdbuf();
        return res.set_content(buf.str(), "text/html");
      }
    }
    res.set_content(kPlaceholderPage, "text/html");
  });
  if (sources_.static_dir) srv.set_mount_point("/static", sources_.static_dir->string());

  srv.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (res.status == 404 && res.body.empty()) send_error(res, 404, "no route " + req.path);
  });
}

}  // namespace statewalk
