#pragma once

#include <span>
#include <string>

#include "besim/param.hpp"

namespace besim {

// Checkpoint container, version "BESIM-CKPT v1".
//
// Layout:
//   line   "BESIM-CKPT v1\n"
//   per parameter, in order:
//     line "<name> <rows> <cols>\n"
//     rows*cols little-endian IEEE-754 32-bit floats, row-major
//
// Values are stored as float32; loading widens back to double.
void save_checkpoint(const std::string& path, std::span<Parameter* const> params);

// Parameters are matched by name; dimensions must agree.
void load_checkpoint(const std::string& path, std::span<Parameter*> params);

}  // namespace besim
