#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "compabench/agents.hpp"
#include "compabench/reward.hpp"

using namespace compabench;

namespace {

RewardConfig with_mode(RewardMode m) {
  RewardConfig c;
  c.mode = m;
  return c;
}

constexpr std::array<RewardMode, 4> kModes = {RewardMode::Baseline, RewardMode::CaptionOnly, RewardMode::ProgressOnly,
                                               RewardMode::RlGround};

TaskInstance comp_instance(std::uint64_t index = 0) {
  return generate_instance(TaskCode::MM_COMP, "eval", 42, index, GenConfig{});
}

std::string wrong_answer(const TaskInstance& inst) {
  return std::to_string(std::get<IntegerArea>(inst.answer).value + 1);
}

}  // namespace

TEST(Reward, CaptionOracleEarnsEveryComponent) {
  const RewardConfig cfg = with_mode(RewardMode::RlGround);
  for (TaskCode c : kAllTaskCodes)
    for (std::uint64_t i = 0; i < 50; ++i) {
      const auto inst = generate_instance(c, "eval", 9, i, GenConfig{});
      const auto r = score_completion(inst.trace.rlground_target, inst, cfg);
      ASSERT_EQ(r.accuracy, 1.0);
      ASSERT_EQ(r.format, 1.0);
      ASSERT_EQ(r.caption, 1.0);
      ASSERT_EQ(r.progress, 1.0) << inst.id;
      ASSERT_DOUBLE_EQ(r.total, 2.25);
    }
}

TEST(Reward, EmptyThinkIsWellFormedInBaseline) {
  const auto inst = comp_instance();
  const auto r = score_completion("<think></think><answer>0</answer>", inst, with_mode(RewardMode::Baseline));
  EXPECT_EQ(r.format, 1.0);
  EXPECT_EQ(r.accuracy, 0.0);
  EXPECT_EQ(r.progress, 0.0);
  EXPECT_DOUBLE_EQ(r.total, 0.5);
}

// Each rung adds one more thing done right; totals strictly increase.
TEST(Reward, LadderIsStrictlyMonotone) {
  const RewardConfig cfg = with_mode(RewardMode::RlGround);
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto inst = comp_instance(i);
    const std::string w = wrong_answer(inst), right = inst.trace.answer_text;
    const std::vector<std::string> ladder = {
        "",
        "<answer>" + w + "</answer>",
        "<think>hmm</think><answer>" + w + "</answer>",
        "<caption>shapes</caption><think>hmm</think><answer>" + w + "</answer>",
        "<caption>" + inst.trace.caption + "</caption><think>hmm</think><answer>" + w + "</answer>",
        "<caption>" + inst.trace.caption + "</caption><think>" + inst.trace.think + "</think><answer>" + w + "</answer>",
        inst.trace.rlground_target,
    };
    double prev = -1;
    for (const auto& s : ladder) {
      const double t = score_completion(s, inst, cfg).total;
      ASSERT_GT(t, prev) << s;
      prev = t;
    }
    ASSERT_DOUBLE_EQ(score_completion(ladder[1], inst, cfg).format, 0.4);
    ASSERT_DOUBLE_EQ(score_completion(ladder[2], inst, cfg).format, 0.6);
  }
}

TEST(Reward, ModesGateComponentsInTotal) {
  const auto inst = comp_instance(3);
  const std::string s = inst.trace.rlground_target;
  EXPECT_DOUBLE_EQ(score_completion(s, inst, with_mode(RewardMode::Baseline)).total, 1.5);
  EXPECT_DOUBLE_EQ(score_completion(s, inst, with_mode(RewardMode::CaptionOnly)).total, 1.75);
  EXPECT_DOUBLE_EQ(score_completion(s, inst, with_mode(RewardMode::ProgressOnly)).total, 2.0);
  EXPECT_DOUBLE_EQ(score_completion(s, inst, with_mode(RewardMode::RlGround)).total, 2.25);
  // Without a caption, only caption-aware modes mark the format down.
  const std::string sft = inst.trace.sft_target;
  EXPECT_EQ(score_completion(sft, inst, with_mode(RewardMode::Baseline)).format, 1.0);
  EXPECT_EQ(score_completion(sft, inst, with_mode(RewardMode::ProgressOnly)).format, 1.0);
  EXPECT_DOUBLE_EQ(score_completion(sft, inst, with_mode(RewardMode::CaptionOnly)).format, 0.6);
}

TEST(Reward, TotalIsWeightedSumOfActiveComponents) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> w(0.0, 3.0);
  for (std::uint64_t i = 0; i < 60; ++i) {
    const auto inst = generate_instance(kAllTaskCodes[i % 9], "eval", 77, i, GenConfig{});
    for (AgentKind a : kAllAgents)
      for (RewardMode m : kModes) {
        RewardConfig cfg = with_mode(m);
        cfg.w_accuracy = w(rng);
        cfg.w_format = w(rng);
        cfg.w_caption = w(rng);
        cfg.w_progress_total = w(rng);
        const auto r = score_completion(respond(a, inst, 1), inst, cfg);
        double expect = cfg.w_accuracy * r.accuracy + cfg.w_format * r.format;
        if (m == RewardMode::CaptionOnly || m == RewardMode::RlGround) expect += cfg.w_caption * r.caption;
        if (m == RewardMode::ProgressOnly || m == RewardMode::RlGround) expect += cfg.w_progress_total * r.progress;
        ASSERT_NEAR(r.total, expect, 1e-12);
        for (double v : {r.accuracy, r.format, r.caption, r.progress}) ASSERT_TRUE(v >= 0 && v <= 1);
      }
  }
}

TEST(Reward, NumberFloodEarnsNoProgress) {
  const RewardConfig cfg = with_mode(RewardMode::RlGround);
  const auto inst = comp_instance(1);
  std::string flood;
  for (int k = 0; k < 5000; ++k) flood += std::to_string(k) + " ";
  const auto flooded = score_completion("<think>" + inst.trace.think + " " + flood + "</think><answer>0</answer>", inst, cfg);
  EXPECT_EQ(flooded.progress, 0.0);

  // Right at the cap the same reasoning still counts.
  const std::size_t cap = 10 * extract_numbers(render_scene_text(inst.scene)).size();
  std::string think = inst.trace.think;
  for (std::size_t k = extract_numbers(think).size(); k < cap; ++k) think += " 0";
  ASSERT_EQ(extract_numbers(think).size(), cap);
  EXPECT_EQ(score_completion("<think>" + think + "</think><answer>0</answer>", inst, cfg).progress, 1.0);
  EXPECT_EQ(score_completion("<think>" + think + " 0</think><answer>0</answer>", inst, cfg).progress, 0.0);
}

TEST(Reward, NamingEveryColorDoesNotHitExtremeSubgoal) {
  const RewardConfig cfg = with_mode(RewardMode::RlGround);
  int checked = 0;
  for (std::uint64_t i = 0; checked < 20; ++i) {
    const auto inst = generate_instance(TaskCode::MM_SR, "eval", 42, i, GenConfig{});
    const auto& g = std::get<GridScene>(inst.scene);
    if (g.placements.size() < 3) continue;
    ++checked;
    std::string all;
    for (const auto& p : g.placements) all += std::string(p.shape.color().name()) + " ";
    const auto r = score_completion("<think>The nearest shape is one of " + all + "</think><answer>(1, 1)</answer>", inst, cfg);
    ASSERT_EQ(inst.trace.subgoals.back().kind, SubgoalKind::ExtremeShape);
    ASSERT_FALSE(r.subgoal_hits.back());
    const std::string honest = "The closest shape is the " + std::string(inst.trace.subgoals.back().color.name()) + " one.";
    ASSERT_TRUE(score_completion("<think>" + honest + "</think><answer>(1, 1)</answer>", inst, cfg).subgoal_hits.back());
  }
}

TEST(Reward, CaptionMustNameEveryColor) {
  const RewardConfig cfg = with_mode(RewardMode::CaptionOnly);
  const auto inst = comp_instance(2);
  const auto& g = std::get<GridScene>(inst.scene);
  std::string names;
  for (const auto& p : g.placements) names += std::string(p.shape.color().name()) + ", ";
  EXPECT_EQ(score_completion("<caption>" + names + "</caption><think></think><answer>0</answer>", inst, cfg).caption, 1.0);
  const std::string missing_first = names.substr(names.find(',') + 1);
  EXPECT_EQ(score_completion("<caption>" + missing_first + "</caption><think></think><answer>0</answer>", inst, cfg).caption, 0.0);
}

TEST(Reward, AccuracyIgnoresModality) {
  const RewardConfig cfg;
  for (auto [pt, mm] : {std::pair{TaskCode::PT_SR, TaskCode::MM_SR}, std::pair{TaskCode::PT_GR, TaskCode::MM_GR},
                        std::pair{TaskCode::PT_COMP, TaskCode::MM_COMP}})
    for (std::uint64_t i = 0; i < 100; ++i) {
      const auto a = generate_instance(pt, "eval", 3, i, GenConfig{});
      const auto b = generate_instance(mm, "eval", 3, i, GenConfig{});
      for (AgentKind agent : kAllAgents) {
        const std::string s = respond(agent, a, 11);
        ASSERT_EQ(score_completion(s, a, cfg).accuracy, score_completion(s, b, cfg).accuracy);
      }
    }
}

TEST(Advantages, SingleWinnerInGroupOfEight) {
  const std::vector<double> r = {1, 0, 0, 0, 0, 0, 0, 0};
  const auto a = group_advantages(r, GrpoConfig{});
  EXPECT_NEAR(a[0], std::sqrt(7.0), 1e-9);
  for (std::size_t i = 1; i < 8; ++i) EXPECT_NEAR(a[i], -std::sqrt(7.0) / 7.0, 1e-9);
}

TEST(Advantages, EqualRewardsGiveExactZeros) {
  for (double v : {0.0, 1.0, 2.25, -3.5}) {
    const auto a = group_advantages(std::vector<double>(8, v), GrpoConfig{});
    for (double x : a) EXPECT_EQ(x, 0.0);
  }
}

TEST(Advantages, ZeroMeanUnitSpreadAndAffineInvariance) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-5, 5), scale(0.1, 10);
  GrpoConfig cfg;
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> r(8);
    for (double& x : r) x = u(rng);
    const auto a = group_advantages(r, cfg);
    double sum = 0, sq = 0;
    for (double x : a) {
      sum += x;
      sq += x * x;
    }
    ASSERT_NEAR(sum, 0.0, 1e-9);
    ASSERT_NEAR(sq / 8.0, 1.0, 1e-9);
    const double s = scale(rng), b = u(rng);
    std::vector<double> moved(8);
    for (std::size_t i = 0; i < 8; ++i) moved[i] = s * r[i] + b;
    const auto a2 = group_advantages(moved, cfg);
    for (std::size_t i = 0; i < 8; ++i) ASSERT_NEAR(a[i], a2[i], 1e-9);
  }
}

TEST(Advantages, WrongGroupSizeThrows) {
  EXPECT_THROW(group_advantages(std::vector<double>(7, 1.0), GrpoConfig{}), GroupSizeMismatch);
  GrpoConfig four;
  four.group_size = 4;
  EXPECT_NO_THROW(group_advantages(std::vector<double>{1, 2, 3, 4}, four));
}

TEST(KlPenalty, Values) {
  GrpoConfig cfg;
  const std::vector<double> p = {-1.0, -2.0, -0.5}, q = {-1.5, -0.1, -3.0};
  EXPECT_EQ(kl_penalty(p, q, cfg), 0.0);  // beta defaults to 0
  cfg.beta = 1.0;
  EXPECT_EQ(kl_penalty(p, p, cfg), 0.0);
  EXPECT_NEAR(kl_penalty(std::vector<double>{std::log(0.5)}, std::vector<double>{0.0}, cfg), 0.306853, 1e-6);
  cfg.beta = 0.04;
  EXPECT_NEAR(kl_penalty(std::vector<double>{std::log(0.5), 0.0}, std::vector<double>{0.0, 0.0}, cfg),
              0.04 * 0.306853 / 2, 1e-7);
  EXPECT_GE(kl_penalty(p, q, cfg), 0.0);
  EXPECT_THROW(kl_penalty(p, std::vector<double>{0.0}, cfg), LengthMismatch);
}
