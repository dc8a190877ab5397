#include "epay/harness.hpp"

#include "httplib.h"

namespace epay::harness {

struct HttpServer::Impl {
  EpayService& service;
  httplib::Server server;
  std::thread thread;

  explicit Impl(EpayService& s) : service(s) {}
};

HttpServer::HttpServer(EpayService& service, std::filesystem::path static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    const Response r = impl_->service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  impl_->server.Get("/healthz", forward);
  impl_->server.Get("/ecash/key", forward);
  impl_->server.Post(R"(/.*)", forward);
  if (!static_dir.empty() && !impl_->server.set_mount_point("/", static_dir.string())) {
    throw Error("cannot serve static files from " + static_dir.string());
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace epay::harness
