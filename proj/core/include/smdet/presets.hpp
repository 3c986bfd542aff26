#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "smdet/scenario.hpp"

namespace smdet {

struct Preset {
  std::string name;
  std::string description;
  std::string json;  // scenario document; frame_len may list several values
};

const std::vector<Preset>& presets();
/// InvalidArgument for an unknown name.
const Preset& find_preset(std::string_view name);

/// Preset document with override_doc merged on top (RFC 7396), parsed as a family.
std::vector<Scenario> preset_family(std::string_view name, std::string_view override_doc = "{}");

}  // namespace smdet
