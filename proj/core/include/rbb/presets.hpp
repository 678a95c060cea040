#pragma once

#include <span>
#include <string_view>

namespace rbb {

// One shipped experiment config, embedded at build time from presets/.
struct Preset {
  const char* name;
  const char* description;
  const char* text;
};

// All shipped presets, sorted by name.
std::span<const Preset> shipped_presets();

// The preset with the given name, or nullptr.
const Preset* find_preset(std::string_view name);

}  // namespace rbb
