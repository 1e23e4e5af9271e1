#pragma once
// The physical conventions, echoed into every metadata sidecar.

#include "json.hpp"

namespace qftlab {

nlohmann::ordered_json conventions();

}  // namespace qftlab
