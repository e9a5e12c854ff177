#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mfsr/image.hpp"

namespace mfsr {

enum class TestCard { rings, blocks, disks, bars, checker, roads };

const char* to_string(TestCard card) noexcept;

/// Deterministic synthetic scene with integer values in [0, 255]. Shapes are
/// rendered with 4x4 supersampling so edges are anti-aliased.
Image make_test_card(TestCard card, int width, int height);

/// All cards at one size, named "card_<name>".
std::vector<std::pair<std::string, Image>> standard_test_cards(int size);

}  // namespace mfsr
