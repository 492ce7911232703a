#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "compabench/json_io.hpp"
#include "compabench/parser.hpp"
#include "compabench/task.hpp"
#include "oracles.hpp"

using namespace compabench;

namespace {

GridScene grid_of(std::vector<GridPlacement> p, std::size_t target, int n = 5) {
  GridScene g;
  g.grid_n = n;
  g.cell_px = 100;
  g.px_per_unit = 4;
  g.placements = std::move(p);
  g.target_index = target;
  return g;
}

Color col(const char* name) { return *Color::from_name(name); }

std::string code_name(TaskCode c) { return std::string(to_string(c)); }

const oracle::Json* shape_with_color(const oracle::Json& scene, const std::string& color) {
  for (const auto& s : scene["shapes"])
    if (s["color"] == color) return &s;
  return nullptr;
}

}  // namespace

TEST(TaskCodes, NineCodesWithHyphenatedCliNames) {
  EXPECT_EQ(kAllTaskCodes.size(), 9u);
  std::set<std::string> cli;
  for (TaskCode c : kAllTaskCodes) {
    cli.insert(std::string(info(c).cli));
    EXPECT_EQ(task_code_from_string(info(c).cli), c);
    EXPECT_EQ(task_code_from_string(info(c).name), c);
  }
  EXPECT_EQ(cli, (std::set<std::string>{"pt-gr", "pt-sr", "pt-comp", "mm-gr", "mm-sr", "mm-comp", "mm-gr-ood",
                                        "mm-sr-ood", "mm-comp-ood"}));
  EXPECT_FALSE(task_code_from_string("pt-gr-ood"));
  EXPECT_TRUE(eval_only(TaskCode::MM_COMP));
  EXPECT_TRUE(eval_only(TaskCode::MM_SR_OOD));
  EXPECT_FALSE(eval_only(TaskCode::PT_SR));
}

TEST(GroundTruth, SpatialExample) {
  const auto g = grid_of({{Shape(SquareDims{2}, col("red")), {1, 1}},
                          {Shape(SquareDims{3}, col("blue")), {2, 4}},
                          {Shape(SquareDims{4}, col("green")), {3, 2}}},
                         0);
  EXPECT_EQ(ground_truth(g, TaskCode::MM_SR), Answer(Cell{3, 2}));
  EXPECT_EQ(ground_truth(g, TaskCode::MM_SR_OOD), Answer(Cell{2, 4}));
}

TEST(GroundTruth, CompositionalExamples) {
  const auto g = grid_of({{Shape(SquareDims{4}, col("red")), {1, 1}},
                          {Shape(RectangleDims{3, 5}, col("blue")), {1, 2}},
                          {Shape(SquareDims{5}, col("green")), {5, 5}}},
                         0);
  EXPECT_EQ(ground_truth(g, TaskCode::MM_COMP), Answer(IntegerArea{31}));
  EXPECT_EQ(ground_truth(g, TaskCode::PT_COMP), Answer(IntegerArea{31}));
  EXPECT_EQ(ground_truth(g, TaskCode::MM_COMP_OOD), Answer(IntegerArea{25}));
}

TEST(GroundTruth, TiedSceneIsIllPosed) {
  const auto g = grid_of({{Shape(SquareDims{4}, col("red")), {3, 3}},
                          {Shape(SquareDims{3}, col("blue")), {2, 3}},
                          {Shape(SquareDims{5}, col("green")), {3, 4}}},
                         0);
  EXPECT_THROW(ground_truth(g, TaskCode::MM_SR), IllPosedScene);
  EXPECT_THROW(build_trace(g, TaskCode::MM_COMP), IllPosedScene);
}

TEST(GroundTruth, GrSingleModeAsksAboutQueryShape) {
  GenConfig cfg;
  cfg.gr_mode = GrMode::Single;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto inst = generate_instance(TaskCode::MM_GR, "eval", 4, i, cfg);
    const auto j = scene_to_json(inst.scene);
    ASSERT_EQ(answer_to_json(inst.answer), oracle::answer(j, "MM_GR", "single"));
    const auto& q = j["shapes"][j["query_index"].get<std::size_t>()];
    ASSERT_NE(inst.question.find(q["color"].get<std::string>()), std::string::npos);
    ASSERT_EQ(inst.trace.subgoals.size(), 1u);
  }
}

TEST(Instances, AnswersMatchBruteForceOracle) {
  GenConfig cfg;
  for (TaskCode c : kAllTaskCodes)
    for (std::uint64_t i = 0; i < 300; ++i) {
      const auto inst = generate_instance(c, "eval", 11, i, cfg);
      const auto j = scene_to_json(inst.scene);
      ASSERT_EQ(answer_to_json(inst.answer), oracle::answer(j, code_name(c))) << code_name(c) << " #" << i;
      ASSERT_EQ(kind_of(inst.answer), answer_kind(c));
      if (const auto* v = std::get_if<IntegerArea>(&inst.answer)) ASSERT_GE(v->value, 1);
      ASSERT_EQ(inst.scene_text.has_value(), info(c).pure_text);
      ASSERT_EQ(inst.image_ref.has_value(), !info(c).pure_text);
    }
}

TEST(Instances, PureTextAndImageTwinsShareScenesAndAnswers) {
  GenConfig cfg;
  const std::pair<TaskCode, TaskCode> twins[] = {
      {TaskCode::PT_GR, TaskCode::MM_GR}, {TaskCode::PT_SR, TaskCode::MM_SR}, {TaskCode::PT_COMP, TaskCode::MM_COMP}};
  for (auto [pt, mm] : twins)
    for (std::uint64_t i = 0; i < 100; ++i) {
      const auto a = generate_instance(pt, "eval", 3, i, cfg), b = generate_instance(mm, "eval", 3, i, cfg);
      ASSERT_EQ(a.scene, b.scene);
      ASSERT_EQ(a.answer, b.answer);
      ASSERT_EQ(a.trace, b.trace);
      ASSERT_NE(a.id, b.id);
    }
}

TEST(Instances, CompositionalAnswerIsSumOfSingleTaskOracles) {
  GenConfig cfg;
  for (std::uint64_t i = 0; i < 500; ++i) {
    const auto comp = generate_instance(TaskCode::MM_COMP, "eval", 5, i, cfg);
    const auto j = scene_to_json(comp.scene);
    // nearest from the spatial oracle, areas from the area oracle
    const auto sr = oracle::answer(j, "MM_SR");
    const oracle::Json* nearest = nullptr;
    for (const auto& s : j["shapes"])
      if (s["cell"]["row"] == sr["row"] && s["cell"]["col"] == sr["col"]) nearest = &s;
    ASSERT_NE(nearest, nullptr);
    const auto& target = j["shapes"][j["target_index"].get<std::size_t>()];
    ASSERT_EQ(std::get<IntegerArea>(comp.answer).value, oracle::rounded_area(target) + oracle::rounded_area(*nearest));
  }
}

// Changing the nearest shape's size must not move the answer of a farthest-
// based task unless that shape is also the farthest.
TEST(Instances, OodAnswersIgnoreTheNearestShape) {
  GenConfig cfg;
  int mutated = 0;
  for (TaskCode c : {TaskCode::MM_SR_OOD, TaskCode::MM_COMP_OOD})
    for (std::uint64_t i = 0; i < 300; ++i) {
      const auto inst = generate_instance(c, "eval", 6, i, cfg);
      auto g = std::get<GridScene>(inst.scene);
      const auto near = *extreme_index(g, Extreme::Nearest), far = *extreme_index(g, Extreme::Farthest);
      if (near == far) continue;
      for (int side : {2, 7, 12}) {
        g.placements[near].shape = Shape(SquareDims{side}, g.placements[near].shape.color());
        ASSERT_EQ(ground_truth(g, c), inst.answer);
        ++mutated;
      }
    }
  EXPECT_GT(mutated, 500);
}

TEST(Instances, SceneTextParsesBackToTheScene) {
  GenConfig cfg;
  for (TaskCode c : {TaskCode::PT_GR, TaskCode::PT_SR})
    for (std::uint64_t i = 0; i < 300; ++i) {
      const auto inst = generate_instance(c, "eval", 8, i, cfg);
      const auto j = scene_to_json(inst.scene);
      const auto parsed = oracle::parse_scene_text(*inst.scene_text);
      ASSERT_EQ(parsed.size(), j["shapes"].size()) << *inst.scene_text;
      for (std::size_t k = 0; k < parsed.size(); ++k) {
        const auto& s = j["shapes"][k];
        ASSERT_EQ(parsed[k].color, s["color"]);
        ASSERT_EQ(parsed[k].kind, s["kind"]);
        ASSERT_EQ(parsed[k].dims, oracle::dims_list(s));
        ASSERT_EQ(parsed[k].cell.has_value(), s.contains("cell"));
        if (parsed[k].cell) ASSERT_EQ(*parsed[k].cell, std::make_pair(s["cell"]["row"].get<int>(), s["cell"]["col"].get<int>()));
      }
    }
}

TEST(Instances, SceneTextExample) {
  const auto g = grid_of({{Shape(SquareDims{4}, col("blue")), {2, 3}}, {Shape(SquareDims{3}, col("orange")), {1, 1}}}, 0);
  const std::string text = render_scene_text(g);
  EXPECT_NE(text.find("blue square"), std::string::npos);
  EXPECT_NE(text.find("side 4 units"), std::string::npos);
  EXPECT_NE(text.find("(2, 3)"), std::string::npos);
  EXPECT_NE(text.find("An orange square"), std::string::npos);
}

TEST(Instances, QuestionsFollowTheirTemplates) {
  GenConfig cfg;
  const auto sr = generate_instance(TaskCode::MM_SR, "eval", 1, 0, cfg);
  const auto& g = std::get<GridScene>(sr.scene);
  EXPECT_NE(sr.question.find(std::string(g.target().shape.color().name())), std::string::npos);
  EXPECT_NE(sr.question.find("(row, col)"), std::string::npos);
  const auto pt = generate_instance(TaskCode::PT_GR, "eval", 1, 0, cfg);
  EXPECT_EQ(pt.question.rfind(*pt.scene_text, 0), 0u);
  EXPECT_NE(pt.question.find("single integer"), std::string::npos);
  EXPECT_EQ(render_question(TaskCode::PT_GR, pt.scene), render_question(TaskCode::PT_GR, pt.scene));
  const auto mm = generate_instance(TaskCode::MM_GR, "eval", 1, 0, cfg);
  EXPECT_EQ(mm.question.find("A "), std::string::npos) << "image questions must not describe the shapes";
}

// Every "a = b = c" claim in the reasoning holds, the trace ends at the
// answer, and every subgoal value agrees with the oracles.
TEST(Traces, ArithmeticAndSubgoalsAreCorrect) {
  GenConfig cfg;
  for (TaskCode c : kAllTaskCodes)
    for (std::uint64_t i = 0; i < 200; ++i) {
      const auto inst = generate_instance(c, "eval", 12, i, cfg);
      const auto j = scene_to_json(inst.scene);
      const auto& t = inst.trace;
      std::istringstream lines(t.think);
      for (std::string line; std::getline(lines, line);)
        if (line.find('=') != std::string::npos) ASSERT_NO_THROW(oracle::check_chain(line)) << line;
      ASSERT_EQ(t.caption, render_scene_text(inst.scene));
      ASSERT_EQ(t.answer_text, answer_text(inst.answer));
      ASSERT_EQ(parse("<answer>" + t.answer_text + "</answer>", answer_kind(c), ParseMode::Standard).answer, inst.answer);
      ASSERT_NE(t.think.rfind(t.answer_text), std::string::npos);

      int areas = 0, distances = 0, extremes = 0;
      for (const auto& g : t.subgoals) {
        const std::string color(g.color.name());
        const oracle::Json* s = shape_with_color(j, color);
        ASSERT_NE(s, nullptr);
        switch (g.kind) {
          case SubgoalKind::ShapeArea:
            ++areas;
            ASSERT_EQ(g.value, oracle::rounded_area(*s));
            break;
          case SubgoalKind::Distance: {
            ++distances;
            const auto& target = j["shapes"][j["target_index"].get<std::size_t>()];
            ASSERT_EQ(g.value, oracle::manhattan(target["cell"], (*s)["cell"]));
            break;
          }
          case SubgoalKind::ExtremeShape: {
            ++extremes;
            const auto idx = oracle::extreme(j, g.which == Extreme::Farthest);
            ASSERT_EQ(j["shapes"][*idx]["color"], color);
            break;
          }
        }
      }
      const std::size_t k = j["shapes"].size();
      switch (info(c).family) {
        case TaskFamily::GR:
          ASSERT_EQ(static_cast<std::size_t>(areas), k);
          ASSERT_EQ(distances + extremes, 0);
          break;
        case TaskFamily::SR:
          ASSERT_EQ(static_cast<std::size_t>(distances), k - 1);
          ASSERT_EQ(extremes, 1);
          ASSERT_EQ(areas, 0);
          break;
        case TaskFamily::COMP:
          ASSERT_EQ(static_cast<std::size_t>(distances), k - 1);
          ASSERT_EQ(extremes, 1);
          ASSERT_EQ(areas, 2);
          break;
      }
    }
}

TEST(Instances, IdsAreStableAndDistinct) {
  EXPECT_EQ(task_id(TaskCode::MM_SR, "eval", 7, 3), task_id(TaskCode::MM_SR, "eval", 7, 3));
  std::set<std::string> ids;
  for (TaskCode c : kAllTaskCodes)
    for (const char* split : {"train", "eval"})
      for (std::uint64_t i = 0; i < 200; ++i) ids.insert(task_id(c, split, 7, i));
  EXPECT_EQ(ids.size(), 9u * 2u * 200u);
  EXPECT_EQ(task_id(TaskCode::MM_GR_OOD, "eval", 1, 1).rfind("mm-gr-ood-", 0), 0u);
}

// Frozen question and trace wording. Regenerate with UPDATE_GOLDEN=1.
TEST(Golden, Seed42InstancesAreFrozen) {
  const std::string path = std::string(COMPABENCH_SOURCE_DIR) + "/tests/golden/instances_seed42.jsonl";
  std::string produced;
  for (TaskCode c : kAllTaskCodes)
    for (std::uint64_t i = 0; i < 3; ++i) produced += instance_to_json(generate_instance(c, "eval", 42, i, GenConfig{})).dump() + "\n";
  if (std::getenv("UPDATE_GOLDEN")) {
    std::ofstream(path, std::ios::binary) << produced;
    GTEST_SKIP() << "golden file rewritten";
  }
  std::ifstream in(path, std::ios::binary);
  ASSERT_TRUE(in) << "missing " << path;
  std::stringstream expected;
  expected << in.rdbuf();
  EXPECT_EQ(produced, expected.str());
}
