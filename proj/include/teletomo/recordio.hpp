// recordio.hpp
// File formats and experiment configuration for the CLI: state files,
// record files, estimate files (all JSON) and the verify metrics.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "teletomo/qstate.hpp"
#include "teletomo/teleportsim.hpp"
#include "teletomo/tomo.hpp"

namespace teletomo::expcli {

using json = nlohmann::ordered_json;

inline constexpr std::string_view kStateFormat = "teletomo-state/1";
inline constexpr std::string_view kRecordsFormat = "teletomo-records/1";
inline constexpr std::string_view kEstimateFormat = "teletomo-estimate/1";

enum class Mode { Exact, Sampled };

std::string_view to_string(Mode m);

struct ExperimentConfig {
    std::size_t qubits = 2;
    Mode mode = Mode::Exact;
    std::uint64_t shots_per_probe = 0;  // sampled mode only
    std::uint64_t seed = 0;
    teleportsim::OutcomeTuple designated_outcomes;
    std::array<qstate::InputState, 4> input_set = qstate::standard_inputs();

    // Mode-consistent fields, outcome-tuple length, four normalized and
    // pairwise distinct inputs.
    void validate() const;
};

struct RecordFile {
    ExperimentConfig config;
    std::string state_source;  // provenance: file path or seed descriptor
    std::vector<teleportsim::TildeRecord> records;
};

json state_to_json(const qstate::DensityMatrix& state);
qstate::DensityMatrix state_from_json(const json& j);

void write_state_file(const std::filesystem::path& path, const qstate::DensityMatrix& state);

// Accepts both state files and estimate files (reading the embedded state).
qstate::DensityMatrix read_state_file(const std::filesystem::path& path);

json records_to_json(const RecordFile& file);
RecordFile records_from_json(const json& j);
void write_records_file(const std::filesystem::path& path, const RecordFile& file);
RecordFile read_records_file(const std::filesystem::path& path);

json report_to_json(const tomo::ReconstructionReport& report);
void write_estimate_file(const std::filesystem::path& path, const tomo::ReconstructionReport& report);

struct VerifyMetrics {
    double trace_distance = 0.0;
    double frobenius = 0.0;
    double max_entry = 0.0;
};

VerifyMetrics compare_states(const qstate::DensityMatrix& truth, const qstate::DensityMatrix& estimate);
json to_json(const VerifyMetrics& m);

}  // namespace teletomo::expcli
