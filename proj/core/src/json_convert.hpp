#pragma once

// JSON conversions shared by the io and generator sources.

#include <json.hpp>

#include "skillspace/io.hpp"

namespace skillspace::detail {

using nlohmann::json;

json pose_json(const Pose& p);
Pose pose_from(const json& j);
json nullspace_json(const NullspaceModel& n);
NullspaceModel nullspace_from(const json& j);

/// Runs `f`, turning JSON access errors into Parse errors.
template <class F>
auto parsing(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, what + ": " + e.what());
  }
}

}  // namespace skillspace::detail
