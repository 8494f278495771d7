#include "service/server.hpp"

#include "core/error.hpp"
#include "geometry/mesh_io.hpp"
#include "pipeline/session.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstring>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <thread>

#include <netinet/in.h>
#include <sys/socket.h>

namespace drape {

using nlohmann::json;

namespace {

constexpr int kServerThreads = 32;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Parse: return 400;
    case ErrorCode::NotFound: return 404;
    case ErrorCode::InvalidState: return 409;
    case ErrorCode::OutOfRange:
    case ErrorCode::Degenerate:
    case ErrorCode::Singular:
    case ErrorCode::NonFinite: return 422;
    case ErrorCode::Io: return 500;
  }
  return 500;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, json{{"error", message}});
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::string text_frame(const json& body) {
  const std::string payload = body.dump();
  std::string frame(1, 'T');
  put_u32(frame, static_cast<std::uint32_t>(payload.size()));
  return frame + payload;
}

std::string binary_frame(const Points& vertices) {
  std::string payload;
  payload.reserve(4 + 12 * static_cast<std::size_t>(vertices.rows()));
  put_u32(payload, static_cast<std::uint32_t>(vertices.rows()));
  for (Eigen::Index i = 0; i < vertices.rows(); ++i)
    for (int k = 0; k < 3; ++k) {
      const float f = static_cast<float>(vertices(i, k));
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      put_u32(payload, bits);
    }
  std::string frame(1, 'B');
  put_u32(frame, static_cast<std::uint32_t>(payload.size()));
  return frame + payload;
}

json loss_json(const LossReport& r) {
  return json{{"iteration", r.iteration}, {"loss", to_string(r.loss)},  {"weight", r.weight},
              {"chamfer", r.chamfer},     {"correspondence", r.correspondence}, {"angle", r.angle},
              {"area_kl", r.area_kl},     {"quality", r.quality},       {"total", r.total}};
}

json vertices_json(const Points& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.rows(); ++i) out.push_back({v(i, 0), v(i, 1), v(i, 2)});
  return out;
}

std::string new_session_id() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  static const char* hex = "0123456789abcdef";
  std::string id;
  for (int i = 0; i < 2; ++i) {
    const std::uint64_t x = rng();
    for (int k = 0; k < 16; ++k) id.push_back(hex[(x >> (4 * k)) & 0xf]);
  }
  return id;
}

bool valid_id(const std::string& id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)); });
}

struct Record {
  std::string id;
  std::chrono::system_clock::time_point created = std::chrono::system_clock::now();

  // Guards the session and result. The worker holds it for one iteration
  // at a time; `waiting` makes it step aside for control requests.
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<int> waiting{0};
  std::unique_ptr<DrapeSession> session;
  std::optional<DrapeResult> result;
  bool stop = false;

  // Encoded stream frames, replayed to every subscriber.
  std::mutex log_mu;
  std::condition_variable log_cv;
  std::vector<std::string> log;
  bool closed = false;

  std::thread worker;

  void publish(std::string frames, bool close = false) {
    {
      std::lock_guard lock(log_mu);
      log.push_back(std::move(frames));
      closed = closed || close;
    }
    log_cv.notify_all();
  }
};

// Holds a record's session lock, announcing itself so the worker yields.
class SessionLock {
 public:
  explicit SessionLock(Record& r) : r_(r) {
    ++r_.waiting;
    lock_ = std::unique_lock(r_.mu);
    --r_.waiting;
  }

 private:
  Record& r_;
  std::unique_lock<std::mutex> lock_;
};

// Called with r.mu held once the session reached a terminal status.
void finish(Record& r) {
  const SessionStatus st = r.session->status();
  if (st == SessionStatus::Failed) {
    r.publish(text_frame(json{{"type", "error"}, {"done", true}, {"status", "failed"}, {"t", r.session->iteration()}}),
              true);
    return;
  }
  r.result = r.session->extract_result();
  r.publish(text_frame(json{{"type", "done"},
                            {"done", true},
                            {"status", to_string(st)},
                            {"t", r.session->iteration()},
                            {"partial", r.result->partial},
                            {"report", json::parse(report_to_json(r.result->report))}}),
            true);
}

void worker_loop(Record& r) {
  std::unique_lock lock(r.mu);
  for (;;) {
    r.cv.wait(lock, [&] { return r.stop || r.session->status() == SessionStatus::Running; });
    if (r.stop) return;
    try {
      r.session->step();
      if (r.session->status() == SessionStatus::Done) finish(r);
    } catch (const std::exception& e) {
      if (r.session->status() != SessionStatus::Failed) r.session->cancel();
      r.publish(text_frame(json{{"type", "error"}, {"done", true}, {"error", e.what()}}), true);
    }
    lock.unlock();
    while (r.waiting.load() > 0) std::this_thread::sleep_for(std::chrono::microseconds(200));
    lock.lock();
  }
}

}  // namespace

ServiceOptions options_from_environment(ServiceOptions base) {
  auto parse = [](const char* name, long lo, long hi) -> std::optional<long> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    char* end = nullptr;
    const long x = std::strtol(v, &end, 10);
    if (*end != '\0' || x < lo || x > hi) fail(ErrorCode::InvalidArgument, std::string(name) + " is not valid: " + v);
    return x;
  };
  if (auto p = parse("DRAPE_PORT", 0, 65535)) base.port = static_cast<int>(*p);
  if (auto m = parse("DRAPE_MAX_UPLOAD_MB", 1, 1 << 20)) base.max_upload_bytes = static_cast<std::size_t>(*m) << 20;
  return base;
}

struct DrapeServer::Impl {
  ServiceOptions options;
  httplib::Server http;
  std::thread listener;
  std::atomic<bool> stopping{false};
  bool bound = false;
  std::atomic<bool> stopped{false};
  int port = -1;

  mutable std::mutex sessions_mu;
  std::map<std::string, std::shared_ptr<Record>> sessions;

  explicit Impl(ServiceOptions o) : options(std::move(o)) {
    http.new_task_queue = [] { return new httplib::ThreadPool(kServerThreads); };
    http.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    http.set_payload_max_length(options.max_upload_bytes);
    routes();
    restore_checkpoints();
  }

  std::shared_ptr<Record> find(const std::string& id) const {
    std::lock_guard lock(sessions_mu);
    const auto it = sessions.find(id);
    if (it == sessions.end()) fail(ErrorCode::NotFound, "no session '" + id + "'");
    return it->second;
  }

  std::filesystem::path checkpoint_path(const Record& r) const { return options.checkpoint_dir / (r.id + ".ckpt"); }

  // Requires r.mu.
  void checkpoint(const Record& r) const {
    if (options.checkpoint_dir.empty()) return;
    std::filesystem::create_directories(options.checkpoint_dir);
    r.session->save_checkpoint(checkpoint_path(r));
  }

  std::shared_ptr<Record> add(std::unique_ptr<DrapeSession> session, std::string id) {
    auto rec = std::make_shared<Record>();
    rec->id = std::move(id);
    rec->session = std::move(session);
    Record* raw = rec.get();
    rec->session->on_snapshot([raw](const Snapshot& snap) {
      raw->publish(text_frame(json{{"type", "snapshot"}, {"t", snap.iteration}, {"loss", loss_json(snap.loss)}}) +
                   binary_frame(snap.vertices));
    });
    const SessionStatus st = rec->session->status();
    if (st == SessionStatus::Done || st == SessionStatus::Cancelled || st == SessionStatus::Failed) finish(*rec);
    rec->worker = std::thread(worker_loop, std::ref(*rec));
    std::lock_guard lock(sessions_mu);
    sessions[rec->id] = rec;
    return rec;
  }

  void restore_checkpoints() {
    if (options.checkpoint_dir.empty() || !std::filesystem::is_directory(options.checkpoint_dir)) return;
    for (const auto& entry : std::filesystem::directory_iterator(options.checkpoint_dir)) {
      if (entry.path().extension() != ".ckpt" || !valid_id(entry.path().stem().string())) continue;
      try {
        add(std::make_unique<DrapeSession>(DrapeSession::load_checkpoint(entry.path())), entry.path().stem().string());
      } catch (const std::exception&) {
        // Unreadable checkpoints are left on disk and skipped.
      }
    }
  }

  template <class F>
  static auto guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const Error& e) {
        send_error(res, http_status(e.code()), e.what());
      } catch (const json::exception& e) {
        send_error(res, 400, e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, e.what());
      }
    };
  }

  json status_json(const Record& r) const {
    const DrapeSession& s = *r.session;
    return json{{"id", r.id},
                {"status", to_string(s.status())},
                {"t", s.iteration()},
                {"iterations", s.config().iterations},
                {"initialized", s.initialized()},
                {"pairs", s.correspondences().size()},
                {"created", std::chrono::duration_cast<std::chrono::seconds>(r.created.time_since_epoch()).count()}};
  }

  void create(const httplib::Request& req, httplib::Response& res) {
    std::string source_text, target_text, config_text, corr_text;
    if (req.is_multipart_form_data()) {
      auto get = [&](const char* key) { return req.has_file(key) ? req.get_file_value(key).content : std::string(); };
      source_text = get("source");
      target_text = get("target");
      config_text = get("config");
      corr_text = get("correspondences");
    } else {
      const json body = json::parse(req.body);
      if (!body.is_object()) fail(ErrorCode::Parse, "request body must be a JSON object");
      source_text = body.value("source", std::string());
      target_text = body.value("target", std::string());
      if (body.contains("config"))
        config_text = body["config"].is_string() ? body["config"].get<std::string>() : body["config"].dump();
      if (body.contains("correspondences"))
        corr_text = body["correspondences"].is_string() ? body["correspondences"].get<std::string>()
                                                        : body["correspondences"].dump();
    }
    if (source_text.empty()) fail(ErrorCode::Parse, "source upload is empty");
    if (target_text.empty()) fail(ErrorCode::Parse, "target upload is empty");

    SurfaceMesh source;
    std::optional<TargetShape> target;
    DrapeConfig config = options.default_config;
    try {
      source = parse_mesh(source_text, "source");
      target = parse_target(target_text);
      if (!config_text.empty()) config = parse_config(config_text, config);
    } catch (const Error& e) {
      send_error(res, 400, e.what());
      return;
    }
    auto session = std::make_unique<DrapeSession>(std::move(source), std::move(*target), config);
    if (!corr_text.empty()) session->set_correspondences(parse_correspondences(corr_text));
    auto rec = add(std::move(session), new_session_id());
    SessionLock lock(*rec);
    json body = status_json(*rec);
    body["vertices"] = rec->session->source().vertex_count();
    body["faces"] = rec->session->source().face_count();
    body["target_kind"] = to_string(rec->session->target().kind());
    send_json(res, 201, body);
  }

  void correspondences(const httplib::Request& req, httplib::Response& res) {
    auto rec = find(req.matches[1]);
    CorrespondenceSet corr;
    try {
      corr = parse_correspondences(req.body);
    } catch (const Error& e) {
      send_error(res, e.code() == ErrorCode::OutOfRange ? 422 : 400, e.what());
      return;
    }
    SessionLock lock(*rec);
    DrapeSession& s = *rec->session;
    Points preview;
    if (s.status() == SessionStatus::Idle && s.iteration() == 0) {
      preview = s.set_correspondences(corr);
    } else {
      s.update_correspondences(corr);
      preview = s.current_vertices_original();
    }
    json body = status_json(*rec);
    body["preview"] = vertices_json(preview);
    send_json(res, 200, body);
  }

  void control(const httplib::Request& req, httplib::Response& res) {
    auto rec = find(req.matches[1]);
    const json body = json::parse(req.body);
    const std::string action = body.is_object() ? body.value("action", std::string()) : std::string();
    SessionLock lock(*rec);
    DrapeSession& s = *rec->session;
    if (action == "start") {
      s.start();
      if (s.status() == SessionStatus::Done) finish(*rec);
    } else if (action == "pause") {
      s.pause();
      checkpoint(*rec);
    } else if (action == "resume") {
      s.resume();
    } else if (action == "cancel") {
      s.cancel();
      finish(*rec);
    } else {
      fail(ErrorCode::InvalidArgument, "unknown action '" + action + "'");
    }
    rec->cv.notify_all();
    send_json(res, 200, status_json(*rec));
  }

  void status(const httplib::Request& req, httplib::Response& res) {
    auto rec = find(req.matches[1]);
    SessionLock lock(*rec);
    send_json(res, 200, status_json(*rec));
  }

  void result(const httplib::Request& req, httplib::Response& res) {
    auto rec = find(req.matches[1]);
    SessionLock lock(*rec);
    const SessionStatus st = rec->session->status();
    if ((st != SessionStatus::Done && st != SessionStatus::Cancelled) || !rec->result)
      fail(ErrorCode::InvalidState, std::string("session is ") + to_string(st) + ", no result yet");
    send_json(res, 200,
              json{{"id", rec->id},
                   {"status", to_string(st)},
                   {"partial", rec->result->partial},
                   {"mesh", format_mesh(rec->result->mesh)},
                   {"report", json::parse(report_to_json(rec->result->report))}});
  }

  void stream(const httplib::Request& req, httplib::Response& res) {
    auto rec = find(req.matches[1]);
    res.status = 200;
    res.set_chunked_content_provider(
        "application/octet-stream", [this, rec, next = std::size_t{0}](std::size_t, httplib::DataSink& sink) mutable {
          std::vector<std::string> frames;
          bool finished = false;
          {
            std::unique_lock lock(rec->log_mu);
            rec->log_cv.wait_for(lock, std::chrono::milliseconds(200),
                                 [&] { return rec->log.size() > next || rec->closed || stopping.load(); });
            for (; next < rec->log.size(); ++next) frames.push_back(rec->log[next]);
            finished = rec->closed && next == rec->log.size();
          }
          for (const std::string& f : frames)
            if (!sink.write(f.data(), f.size())) return false;
          if (finished) {
            sink.done();
            return true;
          }
          return !stopping.load() && sink.is_writable();
        });
  }

  void routes() {
    const std::string id = R"(/sessions/([A-Za-z0-9]+))";
    http.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
      std::lock_guard lock(sessions_mu);
      send_json(res, 200, json{{"status", "ok"}, {"sessions", sessions.size()}});
    });
    http.Post("/sessions", guarded([this](const auto& req, auto& res) { create(req, res); }));
    http.Get(id, guarded([this](const auto& req, auto& res) { status(req, res); }));
    http.Put(id + "/correspondences", guarded([this](const auto& req, auto& res) { correspondences(req, res); }));
    http.Post(id + "/control", guarded([this](const auto& req, auto& res) { control(req, res); }));
    http.Get(id + "/stream", guarded([this](const auto& req, auto& res) { stream(req, res); }));
    http.Get(id + "/result", guarded([this](const auto& req, auto& res) { result(req, res); }));
    http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) send_error(res, res.status, httplib::status_message(res.status));
    });
  }

  void shutdown_sessions() {
    std::vector<std::shared_ptr<Record>> all;
    {
      std::lock_guard lock(sessions_mu);
      for (auto& [k, v] : sessions) all.push_back(v);
    }
    for (auto& rec : all) {
      {
        SessionLock lock(*rec);
        rec->stop = true;
      }
      rec->cv.notify_all();
      if (rec->worker.joinable()) rec->worker.join();
      SessionLock lock(*rec);
      try {
        checkpoint(*rec);
      } catch (const std::exception&) {
      }
      {
        std::lock_guard log_lock(rec->log_mu);
        rec->closed = true;
      }
      rec->log_cv.notify_all();
    }
  }
};

DrapeServer::DrapeServer(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

DrapeServer::~DrapeServer() { stop(); }

int DrapeServer::bind() {
  if (impl_->bound) return impl_->port;
  const ServiceOptions& o = impl_->options;
  if (o.port == 0) {
    impl_->port = impl_->http.bind_to_any_port(o.host);
    if (impl_->port < 0) fail(ErrorCode::Io, "cannot bind " + o.host);
  } else {
    if (!impl_->http.bind_to_port(o.host, o.port))
      fail(ErrorCode::Io, "cannot bind " + o.host + ":" + std::to_string(o.port) + " (port in use?)");
    impl_->port = o.port;
  }
  impl_->bound = true;
  return impl_->port;
}

void DrapeServer::listen() {
  bind();
  impl_->http.listen_after_bind();
}

int DrapeServer::start_background() {
  const int p = bind();
  impl_->listener = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return p;
}

void DrapeServer::stop() {
  if (impl_->stopped.exchange(true)) return;
  impl_->stopping = true;
  impl_->http.stop();
  if (impl_->listener.joinable()) impl_->listener.join();
  impl_->shutdown_sessions();
}

int DrapeServer::port() const { return impl_->port; }

std::size_t DrapeServer::session_count() const {
  std::lock_guard lock(impl_->sessions_mu);
  return impl_->sessions.size();
}

}  // namespace drape
