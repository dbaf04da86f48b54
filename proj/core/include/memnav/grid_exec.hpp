#pragma once

#include <vector>

#include "memnav/execution.hpp"
#include "memnav/grid.hpp"

namespace memnav {

// What one start-to-goal run through a grid world produced. Costs are metric
// cell distance walked plus the observation charges; the record holds the
// first verdict reached for each navigation edge this task.
struct GridTaskOutcome {
  bool success = false;
  double cost = 0.0;
  int cell_steps = 0;
  int observations = 0;
  bool switched = false;
  int verdict_conflicts = 0;  // later re-resolutions that contradicted the record
  MapRecord record;
};

// Drives a graph-level controller through cell-level reality: the controller
// decides over the portal graph, this loop moves the robot cell by cell,
// sweeps the sensor after every step, feeds edge verdicts back as knowledge,
// and reroutes through the current submap when a corridor collapses mid-edge.
GridTaskOutcome execute_grid_task(const GridContext& ctx,
                                  const std::vector<GridCell>& overlay_cells,
                                  Controller& controller, double c_obs, int max_cell_steps);

}  // namespace memnav
