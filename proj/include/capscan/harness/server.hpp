#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "capscan/env/env_config.hpp"

namespace capscan::harness {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8765;  // 0 picks a free port
  env::EnvConfig env;
  std::filesystem::path record_dir = "teleop_records";
  std::ostream* log = nullptr;
};

// WebSocket host for TeleopSession: one thread and one simulation per
// client connection. The constructor binds the port and throws
// std::runtime_error when it is taken.
class TeleopServer {
 public:
  explicit TeleopServer(ServerOptions opt);
  ~TeleopServer();
  TeleopServer(const TeleopServer&) = delete;
  TeleopServer& operator=(const TeleopServer&) = delete;

  unsigned short port() const { return port_; }

  void start();  // accepts in a background thread
  void wait();   // blocks until stop()
  void stop();   // closes the listener and every open session

  // Record files written by all sessions so far.
  std::vector<std::filesystem::path> records() const;

 private:
  struct Impl;
  void accept_loop();
  void run_session(int id, std::shared_ptr<void> socket);
  void log(const std::string& line);

  ServerOptions opt_;
  std::unique_ptr<Impl> impl_;
  unsigned short port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_thread_;
  mutable std::mutex mutex_;
  std::map<int, std::thread> sessions_;
  std::map<int, int> session_fds_;
  std::vector<std::filesystem::path> records_;
  std::mutex log_mutex_;
};

}  // namespace capscan::harness
