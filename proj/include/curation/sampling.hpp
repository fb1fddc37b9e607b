#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "curation/manifest.hpp"
#include "curation/profiles.hpp"
#include "curation/taxonomy.hpp"
#include "json.hpp"

namespace curation {

using TaskRatios = std::map<Task, double>;
using CategoryCounts = std::map<PrimaryCategory, std::size_t>;

// PT 7:3 over T2I:I2I; CT and SFT 7:2:0.5:0.5 over T2I:I2I:T2S:TI2S.
TaskRatios default_task_ratios(Stage stage);

// Multiplies the named tasks and renormalizes to sum 1. Throws InvalidConfig
// on negative weights or an all-zero result.
TaskRatios apply_upweights(const TaskRatios& ratios, const std::map<Task, double>& multipliers);

// Integer counts proportional to weights that sum exactly to n. Ties in the
// fractional part go to the earlier index.
std::vector<std::size_t> largest_remainder(std::span<const double> weights, std::size_t n);

struct SamplingConfig {
  std::optional<TaskRatios> base_ratios;  // replaces the stage default
  std::map<Task, double> task_upweights;
  std::map<PrimaryCategory, double> category_upweights = {{PrimaryCategory::kTextCentric, 1.5}};
  double flatten_strength = 0.5;  // 0 keeps raw availability, 1 pulls fully to the mean
  std::uint64_t seed = 0;
  bool strict = false;
};

struct SamplingPlan {
  Stage stage = Stage::kPT;
  TaskRatios task_ratios;
  CategoryCounts category_targets;
  std::map<Task, double> upweighted_tasks;
  std::uint64_t seed = 0;
  bool strict = false;
};

// Category targets: each available category moves toward the mean count by
// flatten_strength, is multiplied by its upweight, then capped at
// availability. Throws EmptyCorpus when nothing is available.
SamplingPlan build_sampling_plan(Stage stage, const CategoryCounts& available, const SamplingConfig& config = {});

CategoryCounts category_counts(const Manifest& manifest);

struct Shortfall {
  Task task = Task::kT2I;
  std::size_t requested = 0;
  std::size_t drawn = 0;
};

struct SampleResult {
  Manifest manifest;
  std::vector<Shortfall> shortfalls;  // empty when every task quota was met
};

// Without replacement, seeded, output in source order. Per-task quotas come
// from largest_remainder; within a task the category targets set the split,
// capped by availability, and any shortfall is reapportioned over categories
// that still have records. In strict mode a task shortfall throws
// InsufficientData. Throws EmptyCorpus or InvalidConfig (n == 0).
SampleResult sample_manifest(const SamplingPlan& plan, const Manifest& source, std::size_t n);

nlohmann::json to_json(const SamplingPlan& plan);
SamplingPlan sampling_plan_from_json(const nlohmann::json& j);
SamplingConfig sampling_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Shortfall& s);

}  // namespace curation
