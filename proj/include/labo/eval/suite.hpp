#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "labo/design/decode.hpp"
#include "labo/eval/object.hpp"

namespace labo {

struct GraspTask {
  GraspType type = GraspType::kPower;
  ObjectModel object;
  bool test_split = false;
  std::uint64_t seed = 0;
};

// Ordered task list. The success vector p always indexes the train tasks in
// manifest order; the test tasks mirror the train composition with novel
// objects.
struct TaskSuite {
  std::vector<GraspTask> tasks;

  int count(bool test_split) const;
  std::vector<std::size_t> indices(bool test_split) const;

  // Procedural benchmark: n_train tasks split roughly evenly over the three
  // grasp types (spheres/boxes/polyhedra for power and pinch, thin plates
  // for lateral), plus an equally sized test split from a disjoint stream.
  static TaskSuite procedural(int n_train, std::uint64_t seed);

  static TaskSuite load(const std::string& path);
  void save(const std::string& path) const;

  std::string canonical_text() const;
  std::uint64_t content_hash() const;
};

}  // namespace labo
