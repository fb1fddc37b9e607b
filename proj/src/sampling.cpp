#include "curation/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "curation/error.hpp"
#include "curation/util.hpp"

namespace curation {

TaskRatios default_task_ratios(Stage stage) {
  if (stage == Stage::kPT) {
    return {{Task::kT2I, 0.7}, {Task::kI2I, 0.3}, {Task::kT2S, 0.0}, {Task::kTI2S, 0.0}};
  }
  return {{Task::kT2I, 0.7}, {Task::kI2I, 0.2}, {Task::kT2S, 0.05}, {Task::kTI2S, 0.05}};
}

TaskRatios apply_upweights(const TaskRatios& ratios, const std::map<Task, double>& multipliers) {
  TaskRatios out;
  double total = 0.0;
  for (auto t : kAllTasks) {
    auto it = ratios.find(t);
    double w = it == ratios.end() ? 0.0 : it->second;
    if (auto m = multipliers.find(t); m != multipliers.end()) {
      if (!(m->second >= 0.0) || !std::isfinite(m->second)) {
        throw Error(ErrorCode::kInvalidConfig, "upweight for " + std::string(task_name(t)) + " must be >= 0");
      }
      w *= m->second;
    }
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::kInvalidConfig, "ratio for " + std::string(task_name(t)) + " must be >= 0");
    }
    out[t] = w;
    total += w;
  }
  if (total <= 0.0) throw Error(ErrorCode::kInvalidConfig, "task ratios sum to zero");
  for (auto& [t, w] : out) w /= total;
  return out;
}

std::vector<std::size_t> largest_remainder(std::span<const double> weights, std::size_t n) {
  std::vector<std::size_t> counts(weights.size(), 0);
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (weights.empty() || total <= 0.0) return counts;
  std::vector<double> remainder(weights.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(n) * weights[i] / total;
    // The epsilon keeps exact products such as 100 x 0.7 from flooring to 69.
    counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainder[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (std::abs(remainder[a] - remainder[b]) > 1e-12) return remainder[a] > remainder[b];
    return a < b;
  });
  for (std::size_t i = 0; assigned < n; i = (i + 1) % order.size()) {
    if (weights[order[i]] <= 0.0) continue;
    ++counts[order[i]];
    ++assigned;
  }
  return counts;
}

SamplingPlan build_sampling_plan(Stage stage, const CategoryCounts& available, const SamplingConfig& config) {
  std::size_t total = 0;
  std::size_t nonzero = 0;
  for (const auto& [c, n] : available) {
    total += n;
    if (n > 0) ++nonzero;
  }
  if (total == 0) throw Error(ErrorCode::kEmptyCorpus, "no records available for sampling");
  if (config.flatten_strength < 0.0 || config.flatten_strength > 1.0) {
    throw Error(ErrorCode::kInvalidConfig, "flatten_strength must lie in [0, 1]");
  }

  SamplingPlan plan;
  plan.stage = stage;
  plan.seed = config.seed;
  plan.strict = config.strict;
  plan.upweighted_tasks = config.task_upweights;
  const TaskRatios base = config.base_ratios ? *config.base_ratios : default_task_ratios(stage);
  plan.task_ratios = apply_upweights(base, config.task_upweights);
  if (stage == Stage::kPT && (plan.task_ratios[Task::kT2S] > 0.0 || plan.task_ratios[Task::kTI2S] > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "PT plans carry no T2S or TI2S weight");
  }

  const double mean = static_cast<double>(total) / static_cast<double>(nonzero);
  for (auto c : kAllCategories) {
    auto it = available.find(c);
    const double avail = it == available.end() ? 0.0 : static_cast<double>(it->second);
    if (avail <= 0.0) {
      plan.category_targets[c] = 0;
      continue;
    }
    double target = avail + config.flatten_strength * (mean - avail);
    if (auto u = config.category_upweights.find(c); u != config.category_upweights.end()) {
      if (!(u->second >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "category upweight must be >= 0");
      target *= u->second;
    }
    plan.category_targets[c] = static_cast<std::size_t>(std::min(avail, static_cast<double>(std::llround(target))));
  }
  return plan;
}

CategoryCounts category_counts(const Manifest& manifest) {
  CategoryCounts counts;
  for (auto c : kAllCategories) counts[c] = 0;
  for (const auto& e : manifest.entries) ++counts[e.category];
  return counts;
}

namespace {

// Splits quota over categories by target weight, capped by availability, and
// reapportions any capped excess over categories with room left.
std::vector<std::size_t> split_by_category(std::size_t quota, const std::vector<double>& targets,
                                           const std::vector<std::size_t>& avail) {
  std::vector<std::size_t> take(targets.size(), 0);
  std::size_t remaining = quota;
  while (remaining > 0) {
    std::vector<double> weights(targets.size(), 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (take[i] < avail[i]) {
        weights[i] = targets[i];
        sum += targets[i];
      }
    }
    if (sum <= 0.0) {
      for (std::size_t i = 0; i < targets.size(); ++i) {
        if (take[i] < avail[i]) {
          weights[i] = static_cast<double>(avail[i] - take[i]);
          sum += weights[i];
        }
      }
    }
    if (sum <= 0.0) break;
    const auto share = largest_remainder(weights, remaining);
    std::size_t placed = 0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const std::size_t add = std::min(share[i], avail[i] - take[i]);
      take[i] += add;
      placed += add;
    }
    remaining -= placed;
    if (placed == 0) break;
  }
  return take;
}

}  // namespace

SampleResult sample_manifest(const SamplingPlan& plan, const Manifest& source, std::size_t n) {
  if (source.entries.empty()) throw Error(ErrorCode::kEmptyCorpus, "source manifest is empty");
  if (n == 0) throw Error(ErrorCode::kInvalidConfig, "sample size must be >= 1");

  std::vector<double> ratios;
  for (auto t : kAllTasks) {
    auto it = plan.task_ratios.find(t);
    ratios.push_back(it == plan.task_ratios.end() ? 0.0 : it->second);
  }
  const auto quotas = largest_remainder(ratios, n);

  // pools[task][category] = source indices, in source order
  std::vector<std::vector<std::vector<std::size_t>>> pools(
      kAllTasks.size(), std::vector<std::vector<std::size_t>>(kAllCategories.size()));
  for (std::size_t i = 0; i < source.entries.size(); ++i) {
    const auto& e = source.entries[i];
    pools[static_cast<std::size_t>(e.task)][static_cast<std::size_t>(e.category)].push_back(i);
  }

  std::vector<double> targets;
  for (auto c : kAllCategories) {
    auto it = plan.category_targets.find(c);
    targets.push_back(it == plan.category_targets.end() ? 0.0 : static_cast<double>(it->second));
  }

  Rng rng(plan.seed);
  SampleResult result;
  std::vector<std::size_t> chosen;
  for (std::size_t t = 0; t < kAllTasks.size(); ++t) {
    std::vector<std::size_t> avail;
    std::size_t task_total = 0;
    for (const auto& pool : pools[t]) {
      avail.push_back(pool.size());
      task_total += pool.size();
    }
    if (task_total < quotas[t]) {
      if (plan.strict) {
        throw Error(ErrorCode::kInsufficientData, std::string(task_name(kAllTasks[t])) + " needs " +
                                                      std::to_string(quotas[t]) + " records, " +
                                                      std::to_string(task_total) + " available");
      }
      result.shortfalls.push_back({kAllTasks[t], quotas[t], task_total});
    }
    const auto take = split_by_category(std::min(quotas[t], task_total), targets, avail);
    for (std::size_t c = 0; c < kAllCategories.size(); ++c) {
      if (take[c] == 0) continue;
      std::vector<std::size_t> pool = pools[t][c];
      rng.shuffle(pool);
      chosen.insert(chosen.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take[c]));
    }
  }
  std::sort(chosen.begin(), chosen.end());

  result.manifest.metadata = source.metadata;
  result.manifest.metadata["sampling_plan"] = to_json(plan);
  result.manifest.metadata["n"] = n;
  for (auto i : chosen) result.manifest.entries.push_back(source.entries[i]);
  return result;
}

nlohmann::json to_json(const SamplingPlan& plan) {
  nlohmann::json ratios = nlohmann::json::object();
  for (const auto& [t, w] : plan.task_ratios) ratios[std::string(task_name(t))] = w;
  nlohmann::json targets = nlohmann::json::object();
  for (const auto& [c, n] : plan.category_targets) targets[std::string(category_name(c))] = n;
  nlohmann::json up = nlohmann::json::object();
  for (const auto& [t, m] : plan.upweighted_tasks) up[std::string(task_name(t))] = m;
  return {{"stage", stage_name(plan.stage)},
          {"task_ratios", ratios},
          {"category_targets", targets},
          {"upweighted_tasks", up},
          {"seed", plan.seed},
          {"strict", plan.strict}};
}

SamplingPlan sampling_plan_from_json(const nlohmann::json& j) {
  try {
    SamplingPlan plan;
    plan.stage = parse_stage(j.at("stage").get<std::string>());
    for (const auto& [k, v] : j.at("task_ratios").items()) plan.task_ratios[parse_task(k)] = v.get<double>();
    const nlohmann::json category_targets = j.value("category_targets", nlohmann::json::object());
    for (const auto& [k, v] : category_targets.items()) {
      plan.category_targets[parse_category(k)] = v.get<std::size_t>();
    }
    const nlohmann::json upweighted_tasks = j.value("upweighted_tasks", nlohmann::json::object());
    for (const auto& [k, v] : upweighted_tasks.items()) {
      plan.upweighted_tasks[parse_task(k)] = v.get<double>();
    }
    plan.seed = j.value("seed", std::uint64_t{0});
    plan.strict = j.value("strict", false);
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("sampling plan: ") + e.what());
  }
}

SamplingConfig sampling_config_from_json(const nlohmann::json& j) {
  try {
    SamplingConfig cfg;
    if (j.contains("base_ratios")) {
      TaskRatios r;
      for (const auto& [k, v] : j["base_ratios"].items()) r[parse_task(k)] = v.get<double>();
      cfg.base_ratios = r;
    }
    const nlohmann::json task_upweights = j.value("task_upweights", nlohmann::json::object());
    for (const auto& [k, v] : task_upweights.items()) {
      cfg.task_upweights[parse_task(k)] = v.get<double>();
    }
    if (j.contains("category_upweights")) {
      cfg.category_upweights.clear();
      for (const auto& [k, v] : j["category_upweights"].items()) {
        cfg.category_upweights[parse_category(k)] = v.get<double>();
      }
    }
    cfg.flatten_strength = j.value("flatten_strength", cfg.flatten_strength);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.strict = j.value("strict", cfg.strict);
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("sampling config: ") + e.what());
  }
}

nlohmann::json to_json(const Shortfall& s) {
  return {{"task", task_name(s.task)}, {"requested", s.requested}, {"drawn", s.drawn}};
}

}  // namespace curation
