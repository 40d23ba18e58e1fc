#include "labo/eval/suite.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "labo/core/errors.hpp"
#include "labo/core/hash.hpp"
#include "labo/core/rng.hpp"

namespace labo {

int TaskSuite::count(bool test_split) const {
  int n = 0;
  for (const auto& t : tasks) n += (t.test_split == test_split) ? 1 : 0;
  return n;
}

std::vector<std::size_t> TaskSuite::indices(bool test_split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].test_split == test_split) out.push_back(i);
  }
  return out;
}

namespace {

void append_split(TaskSuite& suite, int n, bool test_split, std::uint64_t seed) {
  // Power gets the remainder; composition matches across splits.
  const int n_lateral = n / 3;
  const int n_pinch = n / 3;
  const int n_power = n - n_lateral - n_pinch;

  const auto mix = generate_graspable_mix(n_power + n_pinch, derive_seed(seed, "graspable"));
  const auto plates =
      generate_objects(ObjectKind::kThinPlate, std::max(1, n_lateral), derive_seed(seed, "plates"));

  int mix_i = 0;
  auto push = [&](GraspType type, const ObjectModel& obj, int k) {
    GraspTask t;
    t.type = type;
    t.object = obj;
    t.test_split = test_split;
    t.seed = derive_seed(seed, "task", static_cast<std::uint64_t>(k));
    suite.tasks.push_back(std::move(t));
  };
  int k = 0;
  for (int i = 0; i < n_power; ++i, ++k) push(GraspType::kPower, mix[mix_i++], k);
  for (int i = 0; i < n_pinch; ++i, ++k) push(GraspType::kPinch, mix[mix_i++], k);
  for (int i = 0; i < n_lateral; ++i, ++k) push(GraspType::kLateral, plates[i], k);
}

}  // namespace

TaskSuite TaskSuite::procedural(int n_train, std::uint64_t seed) {
  if (n_train <= 0) throw Error("suite needs at least one task");
  TaskSuite suite;
  suite.tasks.reserve(2 * n_train);
  append_split(suite, n_train, false, derive_seed(seed, "train-split"));
  append_split(suite, n_train, true, derive_seed(seed, "test-split"));
  return suite;
}

std::string TaskSuite::canonical_text() const {
  nlohmann::json j;
  j["version"] = 1;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : tasks) {
    arr.push_back({{"grasp_type", to_string(t.type)},
                   {"split", t.test_split ? "test" : "train"},
                   {"seed", t.seed},
                   {"object", t.object.to_json()}});
  }
  j["tasks"] = arr;
  return j.dump(2);
}

std::uint64_t TaskSuite::content_hash() const { return Fnv1a64::hash(canonical_text()); }

void TaskSuite::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write suite manifest: " + path);
  out << canonical_text() << "\n";
}

TaskSuite TaskSuite::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read suite manifest: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaMismatch("suite manifest parse error: " + std::string(e.what()));
  }
  if (!j.contains("version") || j["version"].get<int>() != 1) {
    throw SchemaMismatch("unsupported suite manifest version");
  }
  TaskSuite suite;
  for (const auto& tj : j.at("tasks")) {
    GraspTask t;
    t.type = grasp_type_from_string(tj.at("grasp_type").get<std::string>());
    t.test_split = tj.at("split").get<std::string>() == "test";
    t.seed = tj.at("seed").get<std::uint64_t>();
    t.object = ObjectModel::from_json(tj.at("object"));
    suite.tasks.push_back(std::move(t));
  }
  return suite;
}

}  // namespace labo
