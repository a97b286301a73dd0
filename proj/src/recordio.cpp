// recordio.cpp

#include "teletomo/recordio.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "teletomo/errors.hpp"

namespace teletomo::expcli {

namespace {

using qla::Complex;
using qla::ComplexMatrix;

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw std::runtime_error("expected [re, im] pair");
    return Complex{j[0].get<double>(), j[1].get<double>()};
}

json matrix_to_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) rows.push_back(complex_to_json(m(r, c)));
    return rows;
}

ComplexMatrix matrix_from_json(const json& j, std::size_t dim) {
    if (!j.is_array() || j.size() != dim * dim) throw std::runtime_error("matrix entry count mismatch");
    std::vector<Complex> entries;
    entries.reserve(dim * dim);
    for (const json& e : j) entries.push_back(complex_from_json(e));
    return ComplexMatrix(dim, dim, std::move(entries));
}

std::string input_label(const qstate::InputState& in, std::size_t index) {
    if (in.label()) return *in.label();
    return "S" + std::to_string(index);
}

json write_text(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path.string());
    return j;
}

json read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + " is not valid JSON: " + e.what());
    }
    return j;
}

json config_to_json(const ExperimentConfig& config) {
    json j;
    j["qubits"] = config.qubits;
    j["mode"] = std::string(to_string(config.mode));
    if (config.mode == Mode::Sampled) j["shots_per_probe"] = config.shots_per_probe;
    j["seed"] = config.seed;
    json outs = json::array();
    for (qstate::BellOutcome o : config.designated_outcomes.outcomes) outs.push_back(std::string(qstate::to_string(o)));
    j["designated_outcomes"] = std::move(outs);
    json set = json::array();
    for (std::size_t k = 0; k < 4; ++k) {
        json in;
        in["label"] = input_label(config.input_set[k], k);
        in["alpha"] = complex_to_json(config.input_set[k].alpha());
        in["beta"] = complex_to_json(config.input_set[k].beta());
        set.push_back(std::move(in));
    }
    j["input_set"] = std::move(set);
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig config;
    config.qubits = j.at("qubits").get<std::size_t>();
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "exact") {
        config.mode = Mode::Exact;
    } else if (mode == "sampled") {
        config.mode = Mode::Sampled;
    } else {
        throw std::runtime_error("unknown mode '" + mode + "'");
    }
    if (config.mode == Mode::Sampled) config.shots_per_probe = j.at("shots_per_probe").get<std::uint64_t>();
    config.seed = j.at("seed").get<std::uint64_t>();
    config.designated_outcomes.outcomes.clear();
    for (const json& o : j.at("designated_outcomes")) {
        const auto parsed = qstate::bell_outcome_from_string(o.get<std::string>());
        if (!parsed) throw std::runtime_error("unknown Bell outcome label");
        config.designated_outcomes.outcomes.push_back(*parsed);
    }
    const json& set = j.at("input_set");
    if (!set.is_array() || set.size() != 4) throw std::runtime_error("input_set must list four states");
    std::vector<qstate::InputState> inputs;
    for (const json& in : set) {
        inputs.emplace_back(complex_from_json(in.at("alpha")), complex_from_json(in.at("beta")),
                            in.at("label").get<std::string>());
    }
    config.input_set = {inputs[0], inputs[1], inputs[2], inputs[3]};
    config.validate();
    return config;
}

}  // namespace

std::string_view to_string(Mode m) { return m == Mode::Exact ? "exact" : "sampled"; }

void ExperimentConfig::validate() const {
    if (qubits < 2 || qubits > 5) throw std::invalid_argument("config: qubits must be in [2, 5]");
    if (designated_outcomes.outcomes.size() != qubits - 1) {
        throw std::invalid_argument("config: designated outcome tuple must have one entry per wire");
    }
    if (mode == Mode::Sampled && shots_per_probe < 1) {
        throw std::invalid_argument("config: sampled mode needs shots_per_probe >= 1");
    }
    for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = a + 1; b < 4; ++b) {
            if (std::abs(input_set[a].alpha() - input_set[b].alpha()) < 1e-12 &&
                std::abs(input_set[a].beta() - input_set[b].beta()) < 1e-12) {
                throw std::invalid_argument("config: input set states must be pairwise distinct");
            }
        }
    }
}

json state_to_json(const qstate::DensityMatrix& state) {
    json j;
    j["format"] = std::string(kStateFormat);
    j["qubits"] = state.qubits();
    j["mat"] = matrix_to_json(state.mat());
    return j;
}

qstate::DensityMatrix state_from_json(const json& j) {
    const std::string format = j.at("format").get<std::string>();
    if (format == kEstimateFormat) return state_from_json(j.at("state"));
    if (format != kStateFormat) throw std::runtime_error("unexpected file format '" + format + "'");
    const std::size_t qubits = j.at("qubits").get<std::size_t>();
    return qstate::DensityMatrix(qubits, matrix_from_json(j.at("mat"), std::size_t{1} << qubits));
}

void write_state_file(const std::filesystem::path& path, const qstate::DensityMatrix& state) {
    write_text(path, state_to_json(state));
}

qstate::DensityMatrix read_state_file(const std::filesystem::path& path) {
    return state_from_json(read_text(path));
}

json records_to_json(const RecordFile& file) {
    json j;
    j["format"] = std::string(kRecordsFormat);
    j["config"] = config_to_json(file.config);
    j["state_source"] = file.state_source;
    json recs = json::array();
    for (const teleportsim::TildeRecord& rec : file.records) {
        json r;
        json arr = json::array();
        for (const qstate::InputState& in : rec.arrangement.inputs) {
            std::size_t idx = 4;
            for (std::size_t k = 0; k < 4; ++k) {
                if (std::abs(in.alpha() - file.config.input_set[k].alpha()) < 1e-12 &&
                    std::abs(in.beta() - file.config.input_set[k].beta()) < 1e-12) {
                    idx = k;
                    break;
                }
            }
            if (idx == 4) throw std::runtime_error("record arrangement input not found in the input set");
            arr.push_back(input_label(file.config.input_set[idx], idx));
        }
        r["arrangement"] = std::move(arr);
        json outs = json::array();
        for (qstate::BellOutcome o : rec.outcome.outcomes) outs.push_back(std::string(qstate::to_string(o)));
        r["outcome"] = std::move(outs);
        r["q"] = rec.q;
        r["tilde"] = matrix_to_json(rec.tilde);
        if (rec.shots) r["shots"] = *rec.shots;
        recs.push_back(std::move(r));
    }
    j["records"] = std::move(recs);
    return j;
}

RecordFile records_from_json(const json& j) {
    const std::string format = j.at("format").get<std::string>();
    if (format != kRecordsFormat) throw std::runtime_error("unexpected file format '" + format + "'");
    RecordFile file;
    file.config = config_from_json(j.at("config"));
    file.state_source = j.value("state_source", std::string{});

    std::array<std::string, 4> labels;
    for (std::size_t k = 0; k < 4; ++k) labels[k] = input_label(file.config.input_set[k], k);

    for (const json& r : j.at("records")) {
        teleportsim::TildeRecord rec;
        for (const json& a : r.at("arrangement")) {
            const std::string label = a.get<std::string>();
            std::size_t idx = 4;
            for (std::size_t k = 0; k < 4; ++k) {
                if (label == labels[k]) {
                    idx = k;
                    break;
                }
            }
            if (idx == 4) throw std::runtime_error("unknown arrangement label '" + label + "'");
            rec.arrangement.inputs.push_back(file.config.input_set[idx]);
        }
        for (const json& o : r.at("outcome")) {
            const auto parsed = qstate::bell_outcome_from_string(o.get<std::string>());
            if (!parsed) throw std::runtime_error("unknown Bell outcome label");
            rec.outcome.outcomes.push_back(*parsed);
        }
        rec.q = r.at("q").get<double>();
        rec.tilde = matrix_from_json(r.at("tilde"), 2);
        if (r.contains("shots")) rec.shots = r.at("shots").get<std::uint64_t>();
        file.records.push_back(std::move(rec));
    }
    return file;
}

void write_records_file(const std::filesystem::path& path, const RecordFile& file) {
    write_text(path, records_to_json(file));
}

RecordFile read_records_file(const std::filesystem::path& path) { return records_from_json(read_text(path)); }

json report_to_json(const tomo::ReconstructionReport& report) {
    json j;
    j["method"] = std::string(tomo::to_string(report.method));
    j["residual"] = report.residual;
    j["condition"] = report.condition;
    j["projected"] = report.projected;
    return j;
}

void write_estimate_file(const std::filesystem::path& path, const tomo::ReconstructionReport& report) {
    json j;
    j["format"] = std::string(kEstimateFormat);
    j["state"] = state_to_json(report.rho_hat);
    j["report"] = report_to_json(report);
    write_text(path, j);
}

VerifyMetrics compare_states(const qstate::DensityMatrix& truth, const qstate::DensityMatrix& estimate) {
    if (truth.qubits() != estimate.qubits()) {
        throw std::invalid_argument("compare_states: qubit counts differ");
    }
    VerifyMetrics m;
    m.trace_distance = qstate::trace_distance(truth, estimate);
    m.frobenius = qstate::frobenius_distance(truth, estimate);
    m.max_entry = (truth.mat() - estimate.mat()).max_abs();
    return m;
}

json to_json(const VerifyMetrics& m) {
    json j;
    j["trace_distance"] = m.trace_distance;
    j["frobenius"] = m.frobenius;
    j["max_entry"] = m.max_entry;
    return j;
}

}  // namespace teletomo::expcli
