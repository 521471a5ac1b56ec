#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "erase/kmeanspp.hpp"
#include "erase/qkmeans.hpp"
#include "erase/selectors.hpp"

namespace erase {

inline constexpr int kSnapshotVersion = 1;

// IEEE-754 bit pattern as 16 lowercase hex digits.
std::string hex_bits(double value);
double double_from_hex(std::string_view hex);

nlohmann::json to_json(const LatticeSpec& spec);
LatticeSpec lattice_from_json(const nlohmann::json& j);
nlohmann::json to_json(const QkmModel& model);
QkmModel qkm_from_json(const nlohmann::json& j);
nlohmann::json to_json(const KmeansppModel& model);
KmeansppModel kmeanspp_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SelectionModel& model);
SelectionModel selection_from_json(const nlohmann::json& j);

// {"strategy", "k", "selected"}
nlohmann::json selection_summary(const SelectionModel& model);

// Sorted keys, compact, trailing newline. Equal snapshots are byte-equal.
std::string serialize_snapshot(const SelectionModel& model);
SelectionModel parse_snapshot(std::string_view text);
void save_snapshot(const SelectionModel& model, const std::filesystem::path& path);
SelectionModel load_snapshot(const std::filesystem::path& path);

// FNV-1a 64 of the serialized snapshot, as hex.
std::string snapshot_hash(const SelectionModel& model);

}  // namespace erase
