#pragma once

#include <string>

#include "memnav/environment.hpp"
#include "memnav/grid.hpp"

namespace memnav::test {

// Absolute path of a file under tests/data.
std::string data_path(const std::string& name);

EnvironmentSpec load_env_fixture(const std::string& name);
GridSpec load_grid_fixture(const std::string& name);

}  // namespace memnav::test
