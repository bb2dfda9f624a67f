#ifndef EXPLICABLE_TOOLS_LABELING_HPP_
#define EXPLICABLE_TOOLS_LABELING_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "explicable/weights.hpp"

namespace explicable::labeling {

/// Five anchors, index = score.
const std::vector<std::string>& likert_anchors();

/// A filter question with a known answer. Diagonal pairs ("cat" -> "cat")
/// are extra questions whose responses go to the attention log; off-diagonal
/// pairs are checked against the rater's ordinary rating of that pair.
struct AttentionCheck {
  std::size_t true_class;
  std::size_t predicted_class;
  int expected_score;
};

/// `true_class,predicted_class,expected_score`.
std::vector<AttentionCheck> read_attention_csv(std::string_view text, std::size_t num_classes);

/// Up to kGridImages file names per class, read from `<dir>/<class_name>/`.
inline constexpr std::size_t kGridImages = 36;
std::vector<std::vector<std::string>> image_manifest(const std::filesystem::path& dir,
                                                     const std::vector<std::string>& class_names);

struct Options {
  std::vector<std::string> class_names;
  std::filesystem::path ratings_path;
  std::uint64_t seed = 0;
  std::vector<AttentionCheck> attention_checks;
  /// Per class, URL paths of example images. Empty for text-only sessions.
  std::vector<std::vector<std::string>> images;
};

using Pair = std::pair<std::size_t, std::size_t>;

struct Progress {
  std::size_t rated = 0;
  std::size_t total = 0;
};

struct Acknowledgment {
  std::size_t rater_count;   // ratings by this rater so far, this one included
  std::size_t logged_total;  // rows across all raters and both logs
  Progress progress;
  bool attention_failed;
};

/// Append-only line log. Each append is flushed to stable storage before it
/// returns. A torn final line left by a crash is cut off on open.
class AppendLog {
 public:
  AppendLog(std::filesystem::path path, std::string header);
  ~AppendLog();
  AppendLog(const AppendLog&) = delete;
  AppendLog& operator=(const AppendLog&) = delete;

  /// `header` and appended lines carry their own trailing newline.
  /// Complete lines present when the log was opened, header included.
  const std::string& recovered() const noexcept { return recovered_; }
  void append(const std::string& line);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  std::string recovered_;
};

/// Server-side state of a CHL elicitation. Thread-safe: every public member
/// takes the same lock, so the rating log has a single writer.
///
/// Files, next to ratings_path:
///   ratings_path            rater_id,true_class,predicted_class,score
///   <ratings>.attention.csv same columns, diagonal filter questions only
///   <ratings>.flags.csv     failed checks, rewritten whenever one is added
class LabelingService {
 public:
  explicit LabelingService(Options options);

  const std::vector<std::string>& class_names() const noexcept { return opts_.class_names; }

  /// Full presentation order for a rater: every off-diagonal pair plus the
  /// diagonal attention checks, shuffled by a seed derived from rater_id.
  std::vector<Pair> presentation_order(const std::string& rater_id) const;
  std::optional<Pair> next_pair(const std::string& rater_id) const;
  Progress progress(const std::string& rater_id) const;

  /// Throws Error with invalid-score, unknown-pair, duplicate-rating or
  /// malformed-input (bad rater id). The record is durable on return.
  Acknowledgment submit(const RatingRecord& r);

  /// Off-diagonal ratings in log order, the input to `weights chl`.
  std::vector<RatingRecord> ratings() const;
  std::set<std::string> flagged_raters() const;
  std::size_t logged_total() const;

  /// Response body of the session route.
  std::string session_json(const std::string& rater_id) const;

  static std::filesystem::path attention_path(const std::filesystem::path& ratings);
  static std::filesystem::path flags_path(const std::filesystem::path& ratings);

 private:
  struct Failure {
    RatingRecord record;
    int expected;
  };

  void validate_rater(const std::string& rater_id) const;
  void restore(const std::string& text, bool diagonal_log);
  void record(const RatingRecord& r);
  void write_flags() const;
  std::vector<Pair> order_locked(const std::string& rater_id) const;
  Progress progress_locked(const std::string& rater_id) const;

  Options opts_;
  std::map<Pair, int> checks_;
  std::size_t diagonal_checks_ = 0;
  mutable std::mutex mu_;
  AppendLog ratings_log_;
  AppendLog attention_log_;
  std::vector<RatingRecord> ratings_;
  std::map<std::string, std::set<Pair>> done_;
  std::vector<Failure> failures_;
  std::size_t logged_ = 0;
};

}  // namespace explicable::labeling

#endif  // EXPLICABLE_TOOLS_LABELING_HPP_
