#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "lago/types.hpp"

namespace lago {

// The 20 fixed centre characteristics used by the fixed-Z scenario family.
const Eigen::VectorXd& fixed_centre_characteristics();

// Identifiers of scenarios compiled into the binary (also shipped as
// scenarios/<id>.cfg): table1_J6, table1_J20, null_tables, table3, table4,
// table5, table6, cubic_appendix.
const std::vector<std::string>& bundled_scenario_ids();

bool is_bundled_scenario(const std::string& id);

// Throws UnknownTable for unknown ids.
ScenarioConfig bundled_scenario(const std::string& id);

}  // namespace lago
