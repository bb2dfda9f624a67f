#include "labeling.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <random>
#include <tuple>

#include "explicable/csv.hpp"
#include "explicable/error.hpp"
#include "json.hpp"

namespace explicable::labeling {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void throw_errno(const std::string& what, const fs::path& p) {
  throw Error(Errc::io_error, what + " " + p.string() + ": " + std::strerror(errno));
}

void write_all(int fd, std::string_view bytes, const fs::path& p) {
  while (!bytes.empty()) {
    ssize_t n = ::write(fd, bytes.data(), bytes.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("write", p);
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

void sync_dir(const fs::path& file) {
  auto dir = file.parent_path();
  if (dir.empty()) dir = ".";
  int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd < 0) return;  // best effort; the file itself is already synced
  ::fsync(fd);
  ::close(fd);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 15];
    }
  }
  return out;
}

bool is_image(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".gif" || ext == ".webp" ||
         ext == ".bmp";
}

}  // namespace

const std::vector<std::string>& likert_anchors() {
  static const std::vector<std::string> anchors{
      "Highly Unreasonable (surprised)", "Unreasonable", "Neutral", "Reasonable",
      "Highly Reasonable (Explicable)"};
  return anchors;
}

std::vector<AttentionCheck> read_attention_csv(std::string_view text, std::size_t num_classes) {
  auto lines = csv::parse(text);
  if (lines.empty()) throw Error(Errc::empty_input, "attention-check file is empty", 1);
  if (lines.front().fields != std::vector<std::string>{"true_class", "predicted_class", "expected_score"}) {
    throw Error(Errc::malformed_input, "expected header 'true_class,predicted_class,expected_score'",
                lines.front().number);
  }
  std::vector<AttentionCheck> out;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& l = lines[k];
    if (l.fields.size() != 3) throw Error(Errc::malformed_input, "expected 3 fields", l.number);
    AttentionCheck c{csv::parse_index(l.fields[0], l.number), csv::parse_index(l.fields[1], l.number),
                     static_cast<int>(csv::parse_int(l.fields[2], l.number))};
    if (c.true_class >= num_classes || c.predicted_class >= num_classes) {
      throw Error(Errc::index_out_of_range, "class index outside 0.." + std::to_string(num_classes - 1),
                  l.number);
    }
    if (c.expected_score < 0 || c.expected_score > kMaxLikertScore) {
      throw Error(Errc::score_out_of_range, "expected score " + l.fields[2], l.number);
    }
    out.push_back(c);
  }
  return out;
}

std::vector<std::vector<std::string>> image_manifest(const fs::path& dir,
                                                     const std::vector<std::string>& class_names) {
  if (!fs::is_directory(dir)) throw Error(Errc::io_error, "not a directory: " + dir.string());
  std::vector<std::vector<std::string>> out;
  for (const auto& name : class_names) {
    std::vector<std::string> files;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(dir / name, ec)) {
      if (e.is_regular_file() && is_image(e.path())) files.push_back(e.path().filename().string());
    }
    std::sort(files.begin(), files.end());
    if (files.size() > kGridImages) files.resize(kGridImages);
    std::vector<std::string> urls;
    for (const auto& f : files) urls.push_back("/images/" + url_encode(name) + "/" + url_encode(f));
    out.push_back(std::move(urls));
  }
  return out;
}

// --- AppendLog -------------------------------------------------------------

AppendLog::AppendLog(fs::path path, std::string header) : path_(std::move(path)) {
  fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw_errno("cannot open", path_);
  try {
    std::string content;
    char buf[1 << 16];
    off_t off = 0;
    while (true) {
      ssize_t n = ::pread(fd_, buf, sizeof buf, off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw_errno("read", path_);
      }
      if (n == 0) break;
      content.append(buf, static_cast<std::size_t>(n));
      off += n;
    }
    if (!content.empty() && content.back() != '\n') {
      auto cut = content.rfind('\n');
      content.resize(cut == std::string::npos ? 0 : cut + 1);
      if (::ftruncate(fd_, static_cast<off_t>(content.size())) != 0) throw_errno("truncate", path_);
      if (::fsync(fd_) != 0) throw_errno("fsync", path_);
    }
    if (content.empty()) {
      write_all(fd_, header, path_);
      if (::fsync(fd_) != 0) throw_errno("fsync", path_);
      sync_dir(path_);
      content = header;
    } else if (content.compare(0, header.size(), header) != 0) {
      throw Error(Errc::malformed_input, path_.string() + ": unexpected header", 1);
    }
    recovered_ = std::move(content);
  } catch (...) {
    ::close(fd_);
    throw;
  }
}

AppendLog::~AppendLog() {
  if (fd_ >= 0) ::close(fd_);
}

void AppendLog::append(const std::string& line) {
  off_t before = ::lseek(fd_, 0, SEEK_END);
  try {
    write_all(fd_, line, path_);
    if (::fdatasync(fd_) != 0) throw_errno("fdatasync", path_);
  } catch (...) {
    // Leave no partial line behind for the next append to extend.
    if (before >= 0 && ::ftruncate(fd_, before) == 0) ::fdatasync(fd_);
    throw;
  }
}

// --- LabelingService -------------------------------------------------------

fs::path LabelingService::attention_path(const fs::path& ratings) {
  return fs::path(ratings.string() + ".attention.csv");
}

fs::path LabelingService::flags_path(const fs::path& ratings) {
  return fs::path(ratings.string() + ".flags.csv");
}

namespace {

Options checked(Options o) {
  const auto n = o.class_names.size();
  if (n < 2) throw Error(Errc::empty_input, "a labeling session needs at least two classes");
  std::set<std::string> seen;
  for (const auto& name : o.class_names) {
    if (name.empty() || !seen.insert(name).second) {
      throw Error(Errc::malformed_input, "class names must be unique and non-empty");
    }
  }
  if (!o.images.empty() && o.images.size() != n) {
    throw Error(Errc::shape_mismatch, "image manifest must list every class");
  }
  return o;
}

}  // namespace

LabelingService::LabelingService(Options options)
    : opts_(checked(std::move(options))),
      ratings_log_(opts_.ratings_path, class_ratings_csv_header()),
      attention_log_(attention_path(opts_.ratings_path), class_ratings_csv_header()) {
  const auto n = opts_.class_names.size();
  for (const auto& c : opts_.attention_checks) {
    if (c.true_class >= n || c.predicted_class >= n) {
      throw Error(Errc::index_out_of_range, "attention check references class outside 0.." +
                                                std::to_string(n - 1));
    }
    if (c.expected_score < 0 || c.expected_score > kMaxLikertScore) {
      throw Error(Errc::score_out_of_range, "attention check expects " + std::to_string(c.expected_score));
    }
    if (!checks_.emplace(Pair{c.true_class, c.predicted_class}, c.expected_score).second) {
      throw Error(Errc::malformed_input, "attention check listed twice");
    }
    if (c.true_class == c.predicted_class) ++diagonal_checks_;
  }
  restore(ratings_log_.recovered(), false);
  restore(attention_log_.recovered(), true);
  write_flags();
}

void LabelingService::restore(const std::string& text, bool diagonal_log) {
  const auto& log = diagonal_log ? attention_log_ : ratings_log_;
  const auto n = opts_.class_names.size();
  auto records = read_class_ratings_csv(text);
  std::size_t line = 1;
  for (const auto& r : records) {
    ++line;
    auto where = log.path().string() + ": ";
    if (r.true_class >= n || r.predicted_class >= n) {
      throw Error(Errc::index_out_of_range, where + "class index outside 0.." + std::to_string(n - 1), line);
    }
    if ((r.true_class == r.predicted_class) != diagonal_log) {
      throw Error(Errc::unknown_pair, where + "pair belongs in the other log", line);
    }
    if (diagonal_log && !checks_.count({r.true_class, r.predicted_class})) {
      throw Error(Errc::unknown_pair, where + "diagonal pair is not an attention check", line);
    }
    if (done_[r.rater_id].count({r.true_class, r.predicted_class})) {
      throw Error(Errc::duplicate_rating, where + "repeated rating by " + r.rater_id, line);
    }
    record(r);
    ++logged_;
  }
}

void LabelingService::record(const RatingRecord& r) {
  Pair p{r.true_class, r.predicted_class};
  done_[r.rater_id].insert(p);
  if (p.first != p.second) ratings_.push_back(r);
  auto it = checks_.find(p);
  if (it != checks_.end() && it->second != r.score) failures_.push_back({r, it->second});
}

void LabelingService::write_flags() const {
  // Sorted so the report does not depend on which log was replayed first.
  auto sorted = failures_;
  std::sort(sorted.begin(), sorted.end(), [](const Failure& a, const Failure& b) {
    return std::tie(a.record.rater_id, a.record.true_class, a.record.predicted_class) <
           std::tie(b.record.rater_id, b.record.true_class, b.record.predicted_class);
  });
  std::string out = "rater_id,true_class,predicted_class,score,expected_score\n";
  for (const auto& f : sorted) {
    auto line = class_rating_csv_line(f.record);
    line.pop_back();
    out += line + "," + std::to_string(f.expected) + "\n";
  }
  csv::write_file(flags_path(opts_.ratings_path), out);
}

void LabelingService::validate_rater(const std::string& rater_id) const {
  bool ok = !rater_id.empty() && rater_id.size() <= 128 &&
            std::all_of(rater_id.begin(), rater_id.end(), [](unsigned char c) {
              return std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '@';
            });
  if (!ok) {
    throw Error(Errc::malformed_input, "rater_id must be 1-128 characters from [A-Za-z0-9._@-]");
  }
}

std::vector<Pair> LabelingService::order_locked(const std::string& rater_id) const {
  const auto n = opts_.class_names.size();
  std::vector<Pair> order;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) order.emplace_back(i, j);
    }
  }
  for (const auto& [p, expected] : checks_) {
    if (p.first == p.second) order.push_back(p);
  }
  std::mt19937_64 rng(opts_.seed ^ fnv1a(rater_id));
  for (std::size_t k = order.size() - 1; k > 0; --k) {
    std::swap(order[k], order[rng() % (k + 1)]);
  }
  return order;
}

Progress LabelingService::progress_locked(const std::string& rater_id) const {
  const auto n = opts_.class_names.size();
  auto it = done_.find(rater_id);
  return {it == done_.end() ? 0 : it->second.size(), n * (n - 1) + diagonal_checks_};
}

std::vector<Pair> LabelingService::presentation_order(const std::string& rater_id) const {
  validate_rater(rater_id);
  std::lock_guard lock(mu_);
  return order_locked(rater_id);
}

std::optional<Pair> LabelingService::next_pair(const std::string& rater_id) const {
  validate_rater(rater_id);
  std::lock_guard lock(mu_);
  auto it = done_.find(rater_id);
  for (const auto& p : order_locked(rater_id)) {
    if (it == done_.end() || !it->second.count(p)) return p;
  }
  return std::nullopt;
}

Progress LabelingService::progress(const std::string& rater_id) const {
  validate_rater(rater_id);
  std::lock_guard lock(mu_);
  return progress_locked(rater_id);
}

Acknowledgment LabelingService::submit(const RatingRecord& r) {
  validate_rater(r.rater_id);
  if (r.score < 0 || r.score > kMaxLikertScore) {
    throw Error(Errc::invalid_score, "score must be an integer 0-4, got " + std::to_string(r.score));
  }
  const auto n = opts_.class_names.size();
  Pair p{r.true_class, r.predicted_class};
  if (p.first >= n || p.second >= n) {
    throw Error(Errc::unknown_pair, "class indices must be in 0.." + std::to_string(n - 1));
  }
  std::lock_guard lock(mu_);
  if (p.first == p.second && !checks_.count(p)) {
    throw Error(Errc::unknown_pair, "a class is not rated against itself");
  }
  if (done_[r.rater_id].count(p)) {
    throw Error(Errc::duplicate_rating, r.rater_id + " already rated (" + std::to_string(p.first) + ", " +
                                            std::to_string(p.second) + ")");
  }
  (p.first == p.second ? attention_log_ : ratings_log_).append(class_rating_csv_line(r));
  const auto failures_before = failures_.size();
  record(r);
  ++logged_;
  const bool failed = failures_.size() != failures_before;
  if (failed) write_flags();
  auto prog = progress_locked(r.rater_id);
  return {prog.rated, logged_, prog, failed};
}

std::vector<RatingRecord> LabelingService::ratings() const {
  std::lock_guard lock(mu_);
  return ratings_;
}

std::set<std::string> LabelingService::flagged_raters() const {
  std::lock_guard lock(mu_);
  std::set<std::string> out;
  for (const auto& f : failures_) out.insert(f.record.rater_id);
  return out;
}

std::size_t LabelingService::logged_total() const {
  std::lock_guard lock(mu_);
  return logged_;
}

std::string LabelingService::session_json(const std::string& rater_id) const {
  auto pair = next_pair(rater_id);
  auto prog = progress(rater_id);
  nlohmann::json scale = nlohmann::json::array();
  for (std::size_t s = 0; s < likert_anchors().size(); ++s) {
    scale.push_back({{"score", s}, {"label", likert_anchors()[s]}});
  }
  nlohmann::json j{
      {"rater_id", rater_id},
      {"class_names", opts_.class_names},
      {"scale", scale},
      {"progress", {{"rated", prog.rated}, {"total", prog.total}}},
      {"complete", !pair.has_value()},
      {"pair", nullptr},
      {"images", nullptr},
  };
  if (pair) {
    j["pair"] = {{"true_class", pair->first},
                 {"predicted_class", pair->second},
                 {"true_name", opts_.class_names[pair->first]},
                 {"predicted_name", opts_.class_names[pair->second]}};
    if (!opts_.images.empty()) {
      j["images"] = {{"true_class", opts_.images[pair->first]},
                     {"predicted_class", opts_.images[pair->second]}};
    }
  }
  return j.dump();
}

}  // namespace explicable::labeling
