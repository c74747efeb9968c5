#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "besim/fly.hpp"
#include "besim/matrix.hpp"

namespace besim {

// One colored polyline per agent plus the chamber outline. Deterministic
// bytes for a given input; empty input yields a bare canvas and a warning.
std::string render_fly_svg(std::span<const std::vector<FlyPose>> trajectories,
                           const Chamber& chamber,
                           std::vector<std::string>* warnings = nullptr);

// Pen positions are the running sum of (dx, dy) from the origin; one line
// element per stroke whose z is 1, so visible segments can be recounted.
std::string render_strokes_svg(std::span<const Vec> strokes,
                               std::vector<std::string>* warnings = nullptr);

void save_svg(const std::filesystem::path& path, const std::string& svg);

}  // namespace besim
