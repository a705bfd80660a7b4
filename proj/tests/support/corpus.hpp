#pragma once

// Fixture access and the simulated toggle corpus shared by tests.

#include <cstdint>
#include <filesystem>
#include <string>

#include "lifestate/pipeline.hpp"
#include "lifestate/trace.hpp"

namespace lifestate::testing {

std::filesystem::path fixture(const std::string& name);

/// Runs a fixture program under the seeded scheduler.
Trace simulate_fixture(const std::string& program, std::uint64_t seed, std::uint64_t fuel);

/// The toggle program under seeds 0..seeds-1, sliced and grouped by type.
Corpus toggle_corpus(std::uint64_t seeds = 20);

inline constexpr std::uint64_t kToggleFuel = 400;

}  // namespace lifestate::testing
