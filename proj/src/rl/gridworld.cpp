#include "driftweight/rl/gridworld.hpp"

#include <cstdlib>

#include "driftweight/errors.hpp"

namespace dw::rl {

int DriftGrid::goal_at(int episode) const {
  if (episode < 0) throw RangeError("episode index must be >= 0");
  return goals[static_cast<std::size_t>(episode) % goals.size()];
}

void DriftGrid::validate() const {
  if (width < 2 || height < 2) throw ValidationError("grid must be at least 2x2");
  if (goals.empty()) throw ValidationError("grid needs at least one goal cell");
  for (int g : goals) {
    if (g < 0 || g >= states()) throw ValidationError("goal cell outside the grid");
    if (g == start) throw ValidationError("goal cell coincides with the start");
  }
  if (start < 0 || start >= states()) throw ValidationError("start cell outside the grid");
  if (episode_cap < 1) throw ValidationError("episode cap must be >= 1");
}

std::vector<int> perimeter(int width, int height) {
  std::vector<int> cells;
  for (int c = 0; c < width; ++c) cells.push_back(c);
  for (int r = 1; r < height; ++r) cells.push_back(r * width + width - 1);
  for (int c = width - 2; c >= 0; --c) cells.push_back((height - 1) * width + c);
  for (int r = height - 2; r >= 1; --r) cells.push_back(r * width);
  return cells;
}

DriftGrid drifting_grid(int width, int height) {
  DriftGrid g;
  g.width = width;
  g.height = height;
  g.goals = perimeter(width, height);
  g.start = g.cell(height / 2 - (height % 2 == 0 ? 1 : 0), width / 2);
  g.validate();
  return g;
}

DriftGrid stationary_grid(int width, int height) {
  auto g = drifting_grid(width, height);
  g.goals = {0};
  return g;
}

StepOutcome env_step(const DriftGrid& grid, int state, int action, int episode) {
  if (state < 0 || state >= grid.states()) throw InputError("env_step: invalid state");
  if (action < 0 || action >= kActions) throw InputError("env_step: invalid action");
  int row = state / grid.width;
  int col = state % grid.width;
  switch (static_cast<Action>(action)) {
    case Action::up: row = row > 0 ? row - 1 : row; break;
    case Action::down: row = row + 1 < grid.height ? row + 1 : row; break;
    case Action::left: col = col > 0 ? col - 1 : col; break;
    case Action::right: col = col + 1 < grid.width ? col + 1 : col; break;
  }
  StepOutcome out;
  out.next_state = grid.cell(row, col);
  out.reached_goal = out.next_state == grid.goal_at(episode);
  out.reward = out.reached_goal ? grid.goal_reward : grid.step_penalty;
  return out;
}

int grid_distance(const DriftGrid& grid, int a, int b) {
  return std::abs(a / grid.width - b / grid.width) + std::abs(a % grid.width - b % grid.width);
}

double optimal_return(const DriftGrid& grid, int episode) {
  const int steps = grid_distance(grid, grid.start, grid.goal_at(episode));
  if (steps > grid.episode_cap) return grid.step_penalty * grid.episode_cap;
  return grid.step_penalty * (steps - 1) + grid.goal_reward;
}

}  // namespace dw::rl
