#pragma once

#include "pipeline/config.hpp"

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>

namespace drape {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::size_t max_upload_bytes = std::size_t{64} << 20;
  // Sessions are checkpointed here on pause and shutdown, and reloaded on
  // startup. Empty disables checkpointing.
  std::filesystem::path checkpoint_dir;
  DrapeConfig default_config;
};

// Applies DRAPE_PORT and DRAPE_MAX_UPLOAD_MB when set.
ServiceOptions options_from_environment(ServiceOptions base);

// Session-oriented HTTP API around DrapeSession.
//
//   POST /sessions                      create (multipart or JSON upload)
//   GET  /sessions/{id}                 status
//   PUT  /sessions/{id}/correspondences replace pairs, returns preview
//   POST /sessions/{id}/control         {"action": start|pause|resume|cancel}
//   GET  /sessions/{id}/stream          framed snapshot stream
//   GET  /sessions/{id}/result          mesh + report
//   GET  /healthz
//
// Stream frames are a type byte ('T' text, 'B' binary), a little-endian
// uint32 payload length and the payload. Binary payloads are a uint32
// vertex count followed by float32 xyz triples.
class DrapeServer {
 public:
  explicit DrapeServer(ServiceOptions options);
  ~DrapeServer();
  DrapeServer(const DrapeServer&) = delete;
  DrapeServer& operator=(const DrapeServer&) = delete;

  // Binds the listening socket; throws Io when the port is taken. Returns
  // the bound port.
  int bind();
  // Serves until stop(). Binds first if needed.
  void listen();
  // bind() and serve on a background thread.
  int start_background();
  // Stops serving, halts session workers and checkpoints every session.
  void stop();

  int port() const;
  std::size_t session_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace drape
