#include "labeling.hpp"

#include <gtest/gtest.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "explicable/csv.hpp"
#include "explicable/error.hpp"
#include "explicable/weights.hpp"
#include "httplib.h"
#include "json.hpp"
#include "server.hpp"

using namespace explicable;
using namespace explicable::labeling;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "explicable-label-XXXXXX").string();
    path_ = ::mkdtemp(tmpl.data());
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::io_error;
}

Options three_classes(const fs::path& dir) {
  Options o;
  o.class_names = {"dog", "cat", "car"};
  o.ratings_path = dir / "ratings.csv";
  o.seed = 7;
  return o;
}

// Hand-picked scores: rater a gives 3 on (0,1), rater b gives 4.
int score_for(const std::string& rater, Pair p) {
  static const std::map<Pair, std::pair<int, int>> table{
      {{0, 1}, {3, 4}}, {{0, 2}, {0, 1}}, {{1, 0}, {4, 3}},
      {{1, 2}, {1, 0}}, {{2, 0}, {0, 0}}, {{2, 1}, {2, 1}}};
  auto [a, b] = table.at(p);
  return rater == "a" ? a : b;
}

void rate_everything(LabelingService& s, const std::string& rater) {
  while (auto p = s.next_pair(rater)) s.submit({rater, p->first, p->second, score_for(rater, *p)});
}

}  // namespace

TEST(LabelingSession, FreshThreeClassSessionHasSixPendingPairs) {
  TempDir dir;
  LabelingService s(three_classes(dir.path()));
  auto order = s.presentation_order("r1");
  ASSERT_EQ(order.size(), 6u);
  std::set<Pair> distinct(order.begin(), order.end());
  EXPECT_EQ(distinct.size(), 6u);
  for (auto [i, j] : order) EXPECT_NE(i, j);
  EXPECT_EQ(s.progress("r1").rated, 0u);
  EXPECT_EQ(s.progress("r1").total, 6u);

  auto j = nlohmann::json::parse(s.session_json("r1"));
  EXPECT_EQ(j["progress"]["total"], 6);
  EXPECT_EQ(j["progress"]["rated"], 0);
  EXPECT_FALSE(j["complete"].get<bool>());
  EXPECT_TRUE(j["images"].is_null());
  EXPECT_EQ(j["pair"]["true_class"], order.front().first);
  EXPECT_EQ(j["scale"][0]["label"], "Highly Unreasonable (surprised)");
  EXPECT_EQ(j["scale"][4]["label"], "Highly Reasonable (Explicable)");
}

TEST(LabelingSession, OrderIsSeededPerRater) {
  TempDir dir;
  LabelingService s(three_classes(dir.path()));
  EXPECT_EQ(s.presentation_order("r1"), s.presentation_order("r1"));
  // Some rater among a handful must see a different order than r1.
  bool differs = false;
  for (auto r : {"r2", "r3", "r4", "r5"}) differs |= s.presentation_order(r) != s.presentation_order("r1");
  EXPECT_TRUE(differs);
}

TEST(LabelingSession, Rejections) {
  TempDir dir;
  LabelingService s(three_classes(dir.path()));
  EXPECT_EQ(code_of([&] { s.submit({"r", 0, 1, 7}); }), Errc::invalid_score);
  EXPECT_EQ(code_of([&] { s.submit({"r", 0, 1, -1}); }), Errc::invalid_score);
  EXPECT_EQ(code_of([&] { s.submit({"r", 0, 3, 2}); }), Errc::unknown_pair);
  EXPECT_EQ(code_of([&] { s.submit({"r", 1, 1, 2}); }), Errc::unknown_pair);
  EXPECT_EQ(code_of([&] { s.submit({"bad id", 0, 1, 2}); }), Errc::malformed_input);
  EXPECT_EQ(code_of([&] { s.submit({"", 0, 1, 2}); }), Errc::malformed_input);
  EXPECT_EQ(s.submit({"r", 0, 1, 2}).rater_count, 1u);
  EXPECT_EQ(code_of([&] { s.submit({"r", 0, 1, 3}); }), Errc::duplicate_rating);
  EXPECT_EQ(s.progress("r").rated, 1u);
  EXPECT_EQ(s.logged_total(), 1u);
}

TEST(LabelingSession, TwoRatersProduceTwelveRowsAndHandAveragedMatrix) {
  TempDir dir;
  auto opts = three_classes(dir.path());
  {
    LabelingService s(opts);
    rate_everything(s, "a");
    rate_everything(s, "b");
    EXPECT_FALSE(s.next_pair("a"));
    EXPECT_TRUE(nlohmann::json::parse(s.session_json("a"))["complete"].get<bool>());
    EXPECT_EQ(s.logged_total(), 12u);
  }
  auto records = read_class_ratings_csv(csv::read_file(opts.ratings_path));
  ASSERT_EQ(records.size(), 12u);
  auto raw = class_ratings_raw(records, opts.class_names);
  // Mean score over the two raters, divided by 4; e.g. (3 + 4) / 2 / 4.
  const std::vector<double> expected{1, 0.875, 0.125, 0.875, 1, 0.125, 0, 0.375, 1};
  for (std::size_t k = 0; k < expected.size(); ++k) EXPECT_NEAR(raw.values()[k], expected[k], 1e-9) << k;
}

TEST(LabelingSession, RestartRestoresStateAndRejectsRepeats) {
  TempDir dir;
  auto opts = three_classes(dir.path());
  std::vector<Pair> first_three;
  {
    LabelingService s(opts);
    for (int k = 0; k < 3; ++k) {
      auto p = *s.next_pair("a");
      first_three.push_back(p);
      s.submit({"a", p.first, p.second, 2});
    }
  }
  LabelingService s(opts);
  EXPECT_EQ(s.progress("a").rated, 3u);
  EXPECT_EQ(s.logged_total(), 3u);
  for (auto p : first_three) {
    EXPECT_EQ(code_of([&] { s.submit({"a", p.first, p.second, 2}); }), Errc::duplicate_rating);
  }
  EXPECT_EQ(*s.next_pair("a"), s.presentation_order("a")[3]);
}

TEST(LabelingSession, TornFinalLineIsDiscardedOnRestart) {
  TempDir dir;
  auto opts = three_classes(dir.path());
  {
    LabelingService s(opts);
    s.submit({"a", 0, 1, 3});
  }
  {
    std::ofstream f(opts.ratings_path, std::ios::app | std::ios::binary);
    f << "a,1,";  // a crash mid-write, never acknowledged
  }
  LabelingService s(opts);
  EXPECT_EQ(s.logged_total(), 1u);
  s.submit({"a", 1, 0, 4});
  EXPECT_EQ(csv::read_file(opts.ratings_path), "rater_id,true_class,predicted_class,score\na,0,1,3\na,1,0,4\n");
}

TEST(LabelingSession, CorruptLogRefusesToStart) {
  TempDir dir;
  auto opts = three_classes(dir.path());
  csv::write_file(opts.ratings_path, "rater_id,true_class,predicted_class,score\na,0,1,3\na,0,1,2\n");
  EXPECT_EQ(code_of([&] { LabelingService s(opts); }), Errc::duplicate_rating);
  csv::write_file(opts.ratings_path, "rater,x\n");
  EXPECT_EQ(code_of([&] { LabelingService s(opts); }), Errc::malformed_input);
}

TEST(LabelingSession, AttentionChecksFlagWithoutDroppingData) {
  TempDir dir;
  auto opts = three_classes(dir.path());
  opts.attention_checks = {{0, 0, 4}, {2, 0, 0}};
  {
    LabelingService s(opts);
    EXPECT_EQ(s.progress("a").total, 7u);  // one extra diagonal question
    auto order = s.presentation_order("a");
    EXPECT_EQ(std::count(order.begin(), order.end(), Pair{0, 0}), 1);

    EXPECT_FALSE(s.submit({"a", 0, 0, 4}).attention_failed);
    EXPECT_FALSE(s.submit({"a", 2, 0, 0}).attention_failed);
    EXPECT_TRUE(s.submit({"b", 0, 0, 1}).attention_failed);
    EXPECT_TRUE(s.submit({"b", 2, 0, 3}).attention_failed);
    EXPECT_EQ(s.flagged_raters(), std::set<std::string>{"b"});
    // b's ordinary rating is still part of the CHL data.
    EXPECT_EQ(s.ratings().size(), 2u);
  }
  const std::string flags =
      "rater_id,true_class,predicted_class,score,expected_score\nb,0,0,1,4\nb,2,0,3,0\n";
  EXPECT_EQ(csv::read_file(LabelingService::flags_path(opts.ratings_path)), flags);
  EXPECT_EQ(csv::read_file(opts.ratings_path), "rater_id,true_class,predicted_class,score\na,2,0,0\nb,2,0,3\n");

  fs::remove(LabelingService::flags_path(opts.ratings_path));
  LabelingService s(opts);
  EXPECT_EQ(s.flagged_raters(), std::set<std::string>{"b"});
  EXPECT_EQ(s.progress("b").rated, 2u);
  EXPECT_EQ(csv::read_file(LabelingService::flags_path(opts.ratings_path)), flags);
}

TEST(LabelingSession, AttentionFileFormat) {
  auto checks = read_attention_csv("true_class,predicted_class,expected_score\n1,1,4\n0,2,0\n", 3);
  ASSERT_EQ(checks.size(), 2u);
  EXPECT_EQ(checks[1].predicted_class, 2u);
  EXPECT_EQ(code_of([] { read_attention_csv("true_class,predicted_class,expected_score\n1,3,4\n", 3); }),
            Errc::index_out_of_range);
  EXPECT_EQ(code_of([] { read_attention_csv("true_class,predicted_class,expected_score\n1,1,5\n", 3); }),
            Errc::score_out_of_range);
}

TEST(LabelingSession, ConcurrentRatersShareOneWriter) {
  TempDir dir;
  auto opts = three_classes(dir.path());
  opts.class_names = {"c0", "c1", "c2", "c3", "c4"};
  constexpr int kRaters = 8;
  {
    LabelingService s(opts);
    std::vector<std::thread> threads;
    for (int r = 0; r < kRaters; ++r) {
      threads.emplace_back([&s, r] {
        auto id = "r" + std::to_string(r);
        while (auto p = s.next_pair(id)) s.submit({id, p->first, p->second, r % 5});
      });
    }
    for (auto& t : threads) t.join();
    EXPECT_EQ(s.logged_total(), kRaters * 20u);
  }
  auto records = read_class_ratings_csv(csv::read_file(opts.ratings_path));
  ASSERT_EQ(records.size(), kRaters * 20u);
  std::set<std::tuple<std::string, std::size_t, std::size_t>> keys;
  for (const auto& r : records) keys.emplace(r.rater_id, r.true_class, r.predicted_class);
  EXPECT_EQ(keys.size(), records.size());
}

TEST(ImageManifest, SortedCappedAndEncoded) {
  TempDir dir;
  fs::create_directories(dir.path() / "dog");
  for (int k = 0; k < 40; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "img %02d.PNG", k);
    std::ofstream(dir.path() / "dog" / name) << "x";
  }
  std::ofstream(dir.path() / "dog" / "notes.txt") << "x";
  auto m = image_manifest(dir.path(), {"dog", "cat"});
  ASSERT_EQ(m.size(), 2u);
  ASSERT_EQ(m[0].size(), kGridImages);
  EXPECT_EQ(m[0].front(), "/images/dog/img%2000.PNG");
  EXPECT_EQ(m[0].back(), "/images/dog/img%2035.PNG");
  EXPECT_TRUE(m[1].empty());
  EXPECT_EQ(code_of([&] { image_manifest(dir.path() / "missing", {"dog"}); }), Errc::io_error);
}

// --- HTTP ------------------------------------------------------------------

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    auto opts = three_classes(dir_.path());
    fs::create_directories(dir_.path() / "img" / "cat");
    std::ofstream(dir_.path() / "img" / "cat" / "a.png") << "PNG";
    opts.images = image_manifest(dir_.path() / "img", opts.class_names);
    service_ = std::make_unique<LabelingService>(opts);
    server_ = std::make_unique<Server>(*service_, dir_.path() / "img");
    port_ = server_->bind("127.0.0.1", 0);
    thread_ = std::thread([this] { server_->listen(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    // listen() may not have started accepting yet.
    for (int k = 0; k < 100 && !client_->Get("/api/session?rater_id=probe"); ++k) {
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }
  void TearDown() override {
    server_->stop();
    thread_.join();
  }

  httplib::Result post(const nlohmann::json& body) {
    return client_->Post("/api/rating", body.dump(), "application/json");
  }

  TempDir dir_;
  std::unique_ptr<LabelingService> service_;
  std::unique_ptr<Server> server_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(HttpTest, SessionRoute) {
  auto res = client_->Get("/api/session?rater_id=alice");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Content-Type"), "application/json");
  auto j = nlohmann::json::parse(res->body);
  EXPECT_EQ(j["class_names"], nlohmann::json({"dog", "cat", "car"}));
  EXPECT_EQ(j["progress"]["total"], 6);
  ASSERT_TRUE(j["images"].is_object());
  auto tc = j["pair"]["true_class"].get<std::size_t>();
  EXPECT_EQ(j["images"]["true_class"].size(), tc == 1 ? 1u : 0u);

  auto img = client_->Get("/images/cat/a.png");
  ASSERT_TRUE(img);
  EXPECT_EQ(img->status, 200);
  EXPECT_EQ(img->body, "PNG");

  auto missing = client_->Get("/api/session");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 400);
  EXPECT_EQ(nlohmann::json::parse(missing->body)["error"], "malformed-input");
}

TEST_F(HttpTest, RatingRoute) {
  auto bad = post({{"rater_id", "alice"}, {"true_class", 0}, {"predicted_class", 1}, {"score", 7}});
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 422);
  EXPECT_EQ(nlohmann::json::parse(bad->body)["error"], "invalid-score");

  auto frac = post({{"rater_id", "alice"}, {"true_class", 0}, {"predicted_class", 1}, {"score", 2.5}});
  EXPECT_EQ(nlohmann::json::parse(frac->body)["error"], "invalid-score");

  auto pair = post({{"rater_id", "alice"}, {"true_class", 2}, {"predicted_class", 2}, {"score", 2}});
  EXPECT_EQ(pair->status, 422);
  EXPECT_EQ(nlohmann::json::parse(pair->body)["error"], "unknown-pair");

  auto ok = post({{"rater_id", "alice"}, {"true_class", 0}, {"predicted_class", 1}, {"score", 3}});
  ASSERT_TRUE(ok);
  EXPECT_EQ(ok->status, 200);
  auto ack = nlohmann::json::parse(ok->body);
  EXPECT_TRUE(ack["accepted"].get<bool>());
  EXPECT_EQ(ack["count"], 1);
  EXPECT_EQ(ack["progress"]["rated"], 1);

  auto dup = post({{"rater_id", "alice"}, {"true_class", 0}, {"predicted_class", 1}, {"score", 3}});
  EXPECT_EQ(dup->status, 409);
  EXPECT_EQ(nlohmann::json::parse(dup->body)["error"], "duplicate-rating");

  auto junk = client_->Post("/api/rating", "{not json", "application/json");
  EXPECT_EQ(junk->status, 400);
  auto missing = post({{"rater_id", "alice"}, {"true_class", 0}, {"score", 3}});
  EXPECT_EQ(missing->status, 400);
  EXPECT_EQ(nlohmann::json::parse(missing->body)["error"], "malformed-input");

  EXPECT_EQ(service_->logged_total(), 1u);
}

TEST_F(HttpTest, FullSessionCompletes) {
  for (int k = 0; k < 6; ++k) {
    auto s = nlohmann::json::parse(client_->Get("/api/session?rater_id=bob")->body);
    ASSERT_FALSE(s["complete"].get<bool>());
    EXPECT_EQ(s["progress"]["rated"], k);
    auto res = post({{"rater_id", "bob"},
                     {"true_class", s["pair"]["true_class"]},
                     {"predicted_class", s["pair"]["predicted_class"]},
                     {"score", 2}});
    ASSERT_EQ(res->status, 200);
  }
  auto done = nlohmann::json::parse(client_->Get("/api/session?rater_id=bob")->body);
  EXPECT_TRUE(done["complete"].get<bool>());
  EXPECT_TRUE(done["pair"].is_null());
  EXPECT_EQ(done["progress"]["rated"], 6);
}
