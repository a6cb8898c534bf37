#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "contactnet/dataset.hpp"
#include "contactnet/errors.hpp"

using namespace contactnet;

namespace {
std::filesystem::path tmp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("contactnet_test_" + name);
}

std::vector<RankRecord> synthetic_records(int n, int n_actions, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  std::vector<RankRecord> out(n);
  for (int i = 0; i < n; ++i) {
    out[i].episode = static_cast<std::uint32_t>(i / 10);
    out[i].step = static_cast<std::uint32_t>(i % 10);
    for (auto& u : out[i].input) u = g(rng);
    out[i].costs.resize(n_actions);
    for (auto& c : out[i].costs) c = g(rng);
  }
  return out;
}

bool same_records(const std::vector<RankRecord>& a, const std::vector<RankRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].episode != b[i].episode || a[i].step != b[i].step || a[i].input != b[i].input ||
        a[i].costs != b[i].costs) {
      return false;
    }
  }
  return true;
}
}  // namespace

TEST(Episode, ScriptedFallTruncates) {
  for (int k : {4, 5, 7}) {
    EpisodeParams p;
    p.scripted_fall = [k](int step) { return step == k; };
    auto e = run_episode(77, 0, p);
    EXPECT_EQ(e.terminated_by, Termination::Fall);
    EXPECT_EQ(e.steps_executed, k);
    EXPECT_EQ(static_cast<int>(e.records.size()), k - 3);
    for (std::size_t i = 0; i < e.records.size(); ++i) EXPECT_EQ(e.records[i].step, i);
  }
}

TEST(Episode, EarlyFallKeepsNothing) {
  EpisodeParams p;
  p.scripted_fall = [](int step) { return step == 2; };
  EXPECT_TRUE(run_episode(5, 0, p).records.empty());
}

TEST(Episode, FullLengthWithoutFall) {
  EpisodeParams p;
  auto e = run_episode(1234, 3, p);
  ASSERT_EQ(e.terminated_by, Termination::StepLimit);
  EXPECT_EQ(e.records.size(), 30u);
  for (const auto& r : e.records) {
    EXPECT_EQ(r.episode, 3u);
    ASSERT_EQ(r.costs.size(), 100u);
    for (double c : r.costs) EXPECT_TRUE(std::isfinite(c));
  }
}

TEST(Episode, DeterministicAndRandomized) {
  EpisodeParams p;
  p.max_steps = 3;
  auto a = run_episode(99, 0, p);
  auto b = run_episode(99, 0, p);
  EXPECT_TRUE(same_records(a.records, b.records));
  EXPECT_EQ(a.user_vel, b.user_vel);
  auto s = sample_initial_state(99, p);
  auto nominal = RobotState::nominal({0, 0}, p.trajopt.z_ref, p.hips);
  for (int l = 0; l < 4; ++l) {
    EXPECT_LE(std::abs(s.foot_xy_in_com[l].x - nominal.foot_xy_in_com[l].x), 0.03);
    EXPECT_LE(std::abs(s.foot_xy_in_com[l].y - nominal.foot_xy_in_com[l].y), 0.03);
  }
  for (int i = 0; i < 3; ++i) EXPECT_LE(std::abs(s.com_vel[i]), 0.1);
  EXPECT_LT(std::abs(a.user_vel.x), 0.1);
  EXPECT_LT(std::abs(a.user_vel.y), 0.1);
  auto c = sample_initial_state(100, p);
  EXPECT_NE(s.com_vel, c.com_vel);
}

TEST(Normalization, MidpointMaxAndRoundTrip) {
  auto recs = synthetic_records(200, 4, 1);
  auto b = NormalizationBounds::from_records(recs);
  b.validate();
  InputVector mid, top;
  for (int i = 0; i < kInputDim; ++i) {
    mid[i] = 0.5 * (b.lo[i] + b.hi[i]);
    top[i] = b.hi[i];
  }
  for (double x : normalize(mid, b)) EXPECT_NEAR(x, 0.0, 1e-12);
  for (double x : normalize(top, b)) EXPECT_EQ(x, 1.0);
  for (const auto& r : recs) {
    auto n = normalize(r.input, b);
    for (double x : n) {
      EXPECT_GT(x, -1.0);
      EXPECT_LT(x, 1.0);
    }
    auto back = denormalize(n, b);
    for (int i = 0; i < kInputDim; ++i) EXPECT_NEAR(back[i], r.input[i], 1e-12);
  }
  InputVector far = top;
  far[3] += 100.0;
  EXPECT_EQ(normalize(far, b)[3], 1.0);
  NormalizationBounds bad = b;
  bad.lo[0] = bad.hi[0];
  EXPECT_THROW(bad.validate(), InvalidInput);
}

TEST(Split, SizesDisjointDeterministic) {
  auto recs = synthetic_records(100, 3, 2);
  auto [train, test] = split(recs, 0.7, 5);
  EXPECT_EQ(train.size(), 70u);
  EXPECT_EQ(test.size(), 30u);
  std::set<std::pair<std::uint32_t, std::uint32_t>> ids;
  for (const auto& r : train) ids.insert({r.episode, r.step});
  for (const auto& r : test) ids.insert({r.episode, r.step});
  EXPECT_EQ(ids.size(), 100u);
  auto [train2, test2] = split(recs, 0.7, 5);
  EXPECT_TRUE(same_records(train, train2));
  EXPECT_TRUE(same_records(test, test2));
  auto [t10, s10] = split(synthetic_records(10, 3, 3), 0.999, 1);
  EXPECT_EQ(t10.size(), 9u);
  EXPECT_EQ(s10.size(), 1u);
  EXPECT_THROW(split(recs, 0.0, 1), InvalidInput);
  EXPECT_THROW(split(recs, 1.0, 1), InvalidInput);
}

TEST(DatasetFile, RoundTrip) {
  Dataset d{GaitKind::Trot, 162, R"({"seed": 4})", synthetic_records(25, 162, 4)};
  const auto path = tmp_file("ds.cnds");
  save_dataset(d, path);
  auto back = load_dataset(path);
  EXPECT_EQ(back.gait, GaitKind::Trot);
  EXPECT_EQ(back.num_actions, 162);
  EXPECT_EQ(back.meta, d.meta);
  EXPECT_TRUE(same_records(back.records, d.records));
  std::filesystem::remove(path);
}

TEST(DatasetFile, EmptyRoundTrip) {
  Dataset d{GaitKind::Walk, 100, "", {}};
  const auto path = tmp_file("empty.cnds");
  save_dataset(d, path);
  auto back = load_dataset(path);
  EXPECT_TRUE(back.records.empty());
  EXPECT_EQ(back.num_actions, 100);
  std::filesystem::remove(path);
}

TEST(DatasetFile, TruncatedAndBadVersion) {
  Dataset d{GaitKind::Walk, 100, "", synthetic_records(5, 100, 6)};
  const auto path = tmp_file("trunc.cnds");
  save_dataset(d, path);
  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 9);
  EXPECT_THROW(load_dataset(path), ParseError);
  save_dataset(d, path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(4);
    const char v = 9;
    f.write(&v, 1);
  }
  EXPECT_THROW(load_dataset(path), ParseError);
  {
    std::ofstream f(path, std::ios::binary);
    f << "nonsense";
  }
  EXPECT_THROW(load_dataset(path), ParseError);
  std::filesystem::remove(path);
}

TEST(DatasetFile, CsvExport) {
  Dataset d{GaitKind::Walk, 100, "", synthetic_records(3, 100, 7)};
  const auto path = tmp_file("ds.csv");
  export_dataset_csv(d, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("episode,step,u0,", 0), 0u);
  int rows = 0;
  for (std::string line; std::getline(in, line);) rows += !line.empty();
  EXPECT_EQ(rows, 3);
  std::filesystem::remove(path);
}

TEST(Generation, SmallRunCounts) {
  EpisodeParams p;
  p.max_steps = 2;
  GenerationSummary sum;
  auto d = generate_dataset(3, 10, p, &sum);
  EXPECT_EQ(sum.episodes, 3);
  EXPECT_EQ(sum.records, d.records.size());
  EXPECT_LE(d.records.size(), 6u);
  for (const auto& r : d.records) EXPECT_EQ(r.costs.size(), 100u);
}
