#include "server.hpp"

#include "explicable/error.hpp"
#include "httplib.h"
#include "json.hpp"

namespace explicable::labeling {

namespace {

constexpr const char* kJson = "application/json";

void reject(httplib::Response& res, int status, std::string_view code, const std::string& reason) {
  res.status = status;
  res.set_content(nlohmann::json{{"error", code}, {"reason", reason}}.dump(), kJson);
}

void reject(httplib::Response& res, const Error& e) {
  reject(res, http_status(e.code()), to_string(e.code()), e.message());
}

// Strict field access: a missing or mistyped field is malformed input, while
// a well-typed score outside 0-4 is left for the service to reject.
template <typename T>
T field(const nlohmann::json& body, const char* name) {
  auto it = body.find(name);
  if (it == body.end()) throw Error(Errc::malformed_input, std::string("missing field ") + name);
  if constexpr (std::is_same_v<T, std::string>) {
    if (!it->is_string()) throw Error(Errc::malformed_input, std::string(name) + " must be a string");
  } else {
    if (!it->is_number_integer()) {
      throw Error(Errc::malformed_input, std::string(name) + " must be an integer");
    }
  }
  return it->get<T>();
}

RatingRecord parse_rating(const std::string& text) {
  auto body = nlohmann::json::parse(text, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw Error(Errc::malformed_input, "body is not a JSON object");
  auto score = body.find("score");
  if (score != body.end() && score->is_number() && !score->is_number_integer()) {
    throw Error(Errc::invalid_score, "score must be an integer 0-4");
  }
  auto tc = field<long long>(body, "true_class");
  auto pc = field<long long>(body, "predicted_class");
  if (tc < 0 || pc < 0) throw Error(Errc::unknown_pair, "class indices must be non-negative");
  auto s = field<long long>(body, "score");
  if (s < 0 || s > kMaxLikertScore) {
    throw Error(Errc::invalid_score, "score must be an integer 0-4, got " + std::to_string(s));
  }
  return {field<std::string>(body, "rater_id"), static_cast<std::size_t>(tc), static_cast<std::size_t>(pc),
          static_cast<int>(s)};
}

}  // namespace

int http_status(Errc code) noexcept {
  switch (code) {
    case Errc::duplicate_rating:
      return 409;
    case Errc::invalid_score:
    case Errc::unknown_pair:
      return 422;
    case Errc::io_error:
      return 500;
    default:
      return 400;
  }
}

struct Server::Impl {
  LabelingService& service;
  httplib::Server http;
  explicit Impl(LabelingService& s) : service(s) {}
};

Server::Server(LabelingService& service, std::optional<std::filesystem::path> images_dir)
    : impl_(std::make_unique<Impl>(service)) {
  auto& svc = impl_->service;
  impl_->http.Get("/api/session", [&svc](const httplib::Request& req, httplib::Response& res) {
    try {
      res.set_content(svc.session_json(req.get_param_value("rater_id")), kJson);
    } catch (const Error& e) {
      reject(res, e);
    }
  });
  impl_->http.Post("/api/rating", [&svc](const httplib::Request& req, httplib::Response& res) {
    try {
      auto r = parse_rating(req.body);
      auto ack = svc.submit(r);
      nlohmann::json out{{"accepted", true},
                         {"rater_id", r.rater_id},
                         {"count", ack.rater_count},
                         {"logged_total", ack.logged_total},
                         {"progress", {{"rated", ack.progress.rated}, {"total", ack.progress.total}}}};
      res.set_content(out.dump(), kJson);
    } catch (const Error& e) {
      reject(res, e);
    }
  });
  impl_->http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      reject(res, 500, "internal-error", e.what());
    } catch (...) {
      reject(res, 500, "internal-error", "unknown failure");
    }
  });
  if (images_dir) impl_->http.set_mount_point("/images", images_dir->string());
}

Server::~Server() = default;

int Server::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(Errc::io_error, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::stop() { impl_->http.stop(); }

}  // namespace explicable::labeling
