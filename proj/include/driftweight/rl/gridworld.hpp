#pragma once

#include <vector>

namespace dw::rl {

enum class Action { up = 0, down = 1, left = 2, right = 3 };
inline constexpr int kActions = 4;

/// Gridworld whose goal cell moves along a cyclic trajectory, one entry per episode.
struct DriftGrid {
  int width = 6;
  int height = 6;
  std::vector<int> goals;  // cell indices; episode e uses goals[e % goals.size()]
  int start = 14;          // cell index of the start state
  double goal_reward = 10.0;
  double step_penalty = -1.0;
  int episode_cap = 30;

  int states() const { return width * height; }
  int period() const { return static_cast<int>(goals.size()); }
  int goal_at(int episode) const;
  int cell(int row, int col) const { return row * width + col; }

  /// Throws ValidationError on empty trajectories or out-of-range cells.
  void validate() const;
};

/// The perimeter cells in clockwise order from the top-left corner (2w + 2h - 4 cells).
std::vector<int> perimeter(int width, int height);

/// Grid with the goal walking the perimeter (period 2w + 2h - 4), start near the centre.
DriftGrid drifting_grid(int width = 6, int height = 6);

/// Same grid, goal fixed at the top-left corner.
DriftGrid stationary_grid(int width = 6, int height = 6);

struct StepOutcome {
  int next_state = 0;
  double reward = 0.0;
  bool reached_goal = false;
};

/// Deterministic move with wall clipping; goal_reward on entering the episode's goal,
/// step_penalty otherwise. Episode caps are enforced by the caller. Throws InputError on
/// an invalid state or action, RangeError on a negative episode.
StepOutcome env_step(const DriftGrid& grid, int state, int action, int episode);

/// Manhattan distance between two cells.
int grid_distance(const DriftGrid& grid, int a, int b);

/// Undiscounted return of a shortest path from start to the episode's goal.
double optimal_return(const DriftGrid& grid, int episode);

}  // namespace dw::rl
