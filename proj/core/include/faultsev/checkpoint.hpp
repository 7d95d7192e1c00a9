#pragma once

#include <filesystem>
#include <string>

#include "faultsev/model.hpp"

namespace faultsev {

/// JSON checkpoint: dims, seed, fitted flag, graph, and every parameter in
/// declared order. Doubles are written in shortest round-trip form, so
/// save -> load reproduces every weight bit for bit.
std::string checkpoint_to_json(const TgcnModel& model);
TgcnModel checkpoint_from_json(const std::string& text);

void save_checkpoint(const TgcnModel& model, const std::filesystem::path& path);
TgcnModel load_checkpoint(const std::filesystem::path& path);

}  // namespace faultsev
