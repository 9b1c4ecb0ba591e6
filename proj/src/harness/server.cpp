#include "capscan/harness/server.hpp"

#include <sys/socket.h>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <condition_variable>
#include <ctime>

#include "capscan/env/coverage_env.hpp"
#include "capscan/harness/teleop.hpp"

namespace capscan::harness {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

struct TeleopServer::Impl {
  asio::io_context io;
  tcp::acceptor acceptor{io};
  std::shared_ptr<const env::Scene> scene;
  std::string stamp;
  int next_id = 0;
  std::vector<int> finished;
  std::condition_variable stopped_cv;
  bool stopped = false;
};

TeleopServer::TeleopServer(ServerOptions opt) : opt_(std::move(opt)), impl_(std::make_unique<Impl>()) {
  opt_.env.validate();
  if (opt_.env.action_dim() != 2) throw std::invalid_argument("teleop supports the planar action mode only");
  impl_->scene = env::make_scene(opt_.env.phantom);

  char stamp[32];
  const std::time_t now = std::time(nullptr);
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", std::gmtime(&now));
  impl_->stamp = stamp;

  boost::system::error_code ec;
  const auto address = asio::ip::make_address(opt_.address, ec);
  if (ec) throw std::runtime_error("bad listen address " + opt_.address);
  const tcp::endpoint endpoint(address, opt_.port);
  impl_->acceptor.open(endpoint.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(endpoint, ec);
  if (!ec) impl_->acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) {
    throw std::runtime_error("cannot listen on " + opt_.address + ":" + std::to_string(opt_.port) + ": " +
                             ec.message());
  }
  port_ = impl_->acceptor.local_endpoint().port();
}

TeleopServer::~TeleopServer() { stop(); }

void TeleopServer::log(const std::string& line) {
  if (!opt_.log) return;
  std::lock_guard lock(log_mutex_);
  *opt_.log << line << std::endl;
}

void TeleopServer::start() {
  if (acceptor_thread_.joinable()) return;
  acceptor_thread_ = std::thread([this] { accept_loop(); });
}

void TeleopServer::accept_loop() {
  for (;;) {
    auto socket = std::make_shared<tcp::socket>(impl_->io);
    boost::system::error_code ec;
    impl_->acceptor.accept(*socket, ec);
    if (stopping_) return;
    if (ec) {
      log("accept failed: " + ec.message());
      continue;
    }
    std::lock_guard lock(mutex_);
    for (int id : impl_->finished) {
      auto it = sessions_.find(id);
      if (it != sessions_.end()) {
        it->second.join();
        sessions_.erase(it);
      }
    }
    impl_->finished.clear();
    const int id = impl_->next_id++;
    session_fds_[id] = socket->native_handle();
    sessions_[id] = std::thread([this, id, socket] { run_session(id, socket); });
  }
}

void TeleopServer::run_session(int id, std::shared_ptr<void> raw) {
  auto socket = std::static_pointer_cast<tcp::socket>(raw);
  const std::string name = "session-" + impl_->stamp + "-" + std::to_string(id);
  std::unique_ptr<TeleopSession> session;
  try {
    websocket::stream<tcp::socket&> ws(*socket);
    ws.accept();
    ws.text(true);
    log(name + ": connected");
    TeleopOptions topt;
    topt.env = opt_.env;
    topt.scene = impl_->scene;
    topt.record_dir = opt_.record_dir;
    topt.session_id = name;
    session = std::make_unique<TeleopSession>(std::move(topt));
    for (;;) {
      beast::flat_buffer buffer;
      boost::system::error_code ec;
      ws.read(buffer, ec);
      if (ec) break;
      for (const auto& reply : session->handle(beast::buffers_to_string(buffer.data()))) {
        ws.write(asio::buffer(reply), ec);
        if (ec) break;
      }
      if (ec) break;
    }
  } catch (const std::exception& e) {
    log(name + ": " + e.what());
  }
  if (session) {
    try {
      if (auto path = session->flush()) log(name + ": flushed " + path->string());
    } catch (const std::exception& e) {
      log(name + ": flush failed: " + e.what());
    }
  }
  log(name + ": closed");
  std::lock_guard lock(mutex_);
  if (session) records_.insert(records_.end(), session->written().begin(), session->written().end());
  session_fds_.erase(id);
  impl_->finished.push_back(id);
}

void TeleopServer::wait() {
  std::unique_lock lock(mutex_);
  impl_->stopped_cv.wait(lock, [this] { return impl_->stopped; });
}

void TeleopServer::stop() {
  if (stopping_.exchange(true)) return;
  // Wake the blocking accept with a throwaway connection.
  if (acceptor_thread_.joinable()) {
    try {
      asio::io_context io;
      tcp::socket poke(io);
      boost::system::error_code ec;
      poke.connect(tcp::endpoint(impl_->acceptor.local_endpoint().address(), port_), ec);
    } catch (const std::exception&) {
    }
    acceptor_thread_.join();
  }
  std::map<int, std::thread> sessions;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [id, fd] : session_fds_) ::shutdown(fd, SHUT_RDWR);
    sessions.swap(sessions_);
  }
  for (auto& [id, t] : sessions) t.join();
  boost::system::error_code ec;
  impl_->acceptor.close(ec);
  {
    std::lock_guard lock(mutex_);
    impl_->stopped = true;
  }
  impl_->stopped_cv.notify_all();
}

std::vector<std::filesystem::path> TeleopServer::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

}  // namespace capscan::harness
