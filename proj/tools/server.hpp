#ifndef EXPLICABLE_TOOLS_SERVER_HPP_
#define EXPLICABLE_TOOLS_SERVER_HPP_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "explicable/error.hpp"
#include "labeling.hpp"

namespace explicable::labeling {

/// JSON routes over a LabelingService:
///   GET  /api/session?rater_id=R  next pair, class names, scale, progress, images
///   POST /api/rating              {rater_id, true_class, predicted_class, score}
/// Failures answer {"error": <code>, "reason": <text>}.
class Server {
 public:
  Server(LabelingService& service, std::optional<std::filesystem::path> images_dir = std::nullopt);
  ~Server();

  /// Port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// HTTP status for a rejected request.
int http_status(Errc code) noexcept;

}  // namespace explicable::labeling

#endif  // EXPLICABLE_TOOLS_SERVER_HPP_
