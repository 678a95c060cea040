#include "rbb/presets.hpp"

#include <cstddef>

namespace rbb {

namespace detail {
extern const Preset kPresets[];
extern const std::size_t kPresetCount;
}  // namespace detail

std::span<const Preset> shipped_presets() {
  return {detail::kPresets, detail::kPresetCount};
}

const Preset* find_preset(std::string_view name) {
  for (const Preset& preset : shipped_presets()) {
    if (name == preset.name) return &preset;
  }
  return nullptr;
}

}  // namespace rbb
