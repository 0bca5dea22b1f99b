#include <atomic>
#include <list>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include "chordjam/session_service.hpp"

namespace chordjam {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

struct SessionServer::Impl {
  std::shared_ptr<const HmmModel> model;
  double alpha;
  asio::io_context io;
  tcp::acceptor acceptor;
  std::atomic<bool> stopping{false};
  std::mutex mutex;
  std::list<std::thread> workers;

  Impl(std::shared_ptr<const HmmModel> m, double a, const std::string& address, unsigned short port)
      : model(std::move(m)), alpha(a), acceptor(io) {
    tcp::endpoint endpoint(asio::ip::make_address(address), port);
    acceptor.open(endpoint.protocol());
    acceptor.set_option(asio::socket_base::reuse_address(true));
    acceptor.bind(endpoint);
    acceptor.listen();
  }

  void serve(tcp::socket socket) {
    try {
      websocket::stream<tcp::socket> ws(std::move(socket));
      ws.accept();
      ws.text(true);
      LiveSession session(model, alpha);
      for (;;) {
        beast::flat_buffer buffer;
        ws.read(buffer);
        const auto reply = session.handle(beast::buffers_to_string(buffer.data()));
        for (const auto& frame : reply.frames) ws.write(asio::buffer(frame));
        if (reply.abort) {
          ws.close(websocket::close_reason(websocket::close_code::policy_error, "session aborted"));
          return;
        }
      }
    } catch (const beast::system_error& e) {
      if (e.code() != websocket::error::closed) spdlog::debug("session ended: {}", e.what());
    } catch (const std::exception& e) {
      spdlog::warn("session failed: {}", e.what());
    }
  }

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) {
        if (!stopping) spdlog::warn("accept failed: {}", ec.message());
        return;
      }
      {
        std::lock_guard lock(mutex);
        workers.emplace_back([this, s = std::move(socket)]() mutable { serve(std::move(s)); });
      }
      accept();
    });
  }
};

SessionServer::SessionServer(std::shared_ptr<const HmmModel> model, double alpha, unsigned short port,
                             const std::string& address)
    : impl_(std::make_unique<Impl>(std::move(model), alpha, address, port)) {
  if (!impl_->model) throw std::invalid_argument("session server requires a loaded model");
  validate_alpha(alpha);
}

SessionServer::~SessionServer() {
  stop();
  std::lock_guard lock(impl_->mutex);
  for (auto& worker : impl_->workers) {
    if (worker.joinable()) worker.join();
  }
}

unsigned short SessionServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void SessionServer::run() {
  impl_->accept();
  impl_->io.run();
}

void SessionServer::stop() {
  impl_->stopping = true;
  asio::post(impl_->io, [this] {
    beast::error_code ignored;
    impl_->acceptor.close(ignored);
  });
  impl_->io.stop();
}

}  // namespace chordjam
