#include "support/fixtures.hpp"

namespace memnav::test {

std::string data_path(const std::string& name) {
  return std::string(MEMNAV_TEST_DATA_DIR) + "/" + name;
}

EnvironmentSpec load_env_fixture(const std::string& name) {
  return load_environment_file(data_path(name));
}

GridSpec load_grid_fixture(const std::string& name) {
  return load_grid_spec_file(data_path(name));
}

}  // namespace memnav::test
