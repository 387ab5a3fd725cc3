#pragma once

#include <string_view>
#include <vector>

#include "islanding/netcase.hpp"

namespace island {

std::vector<Generator> apply_dynamics(std::vector<Generator> gens, std::string_view dyn_text, bool reorder,
                                      double* base_freq_hz);

}  // namespace island
