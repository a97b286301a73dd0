// Unit tests for the JSON file formats.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "teletomo/errors.hpp"
#include "teletomo/recordio.hpp"

using namespace teletomo;
using namespace teletomo::expcli;
using qla::Complex;
using qla::ComplexMatrix;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("teletomo_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::filesystem::path file(const std::string& name) const { return path / name; }
};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

RecordFile sample_record_file() {
    const qstate::DensityMatrix rho = qstate::random_density(2, 4, 5);
    RecordFile file;
    file.config.qubits = 2;
    file.config.mode = Mode::Exact;
    file.config.seed = 11;
    file.config.designated_outcomes = teleportsim::OutcomeTuple::all_psi_minus(1);
    file.state_source = "memory";
    for (std::size_t idx = 0; idx < 4; ++idx) {
        teleportsim::TildeRecord rec;
        rec.arrangement = teleportsim::InputArrangement::from_index(idx, 1);
        rec.outcome = teleportsim::OutcomeTuple::all_psi_minus(1);
        rec.tilde = teleportsim::exact_tilde(rho.mat(), rec.arrangement, rec.outcome);
        rec.q = rec.tilde.trace().real();
        file.records.push_back(rec);
    }
    return file;
}

}  // namespace

TEST_CASE("state files round-trip") {
    TempDir tmp;
    const qstate::DensityMatrix rho = qstate::random_density(3, 5, 7);
    write_state_file(tmp.file("state.json"), rho);
    const qstate::DensityMatrix back = read_state_file(tmp.file("state.json"));
    CHECK(back.qubits() == 3);
    CHECK((back.mat() - rho.mat()).max_abs() <= 1e-12);

    // write -> read -> write is byte-identical
    write_state_file(tmp.file("state2.json"), back);
    CHECK(slurp(tmp.file("state.json")) == slurp(tmp.file("state2.json")));
}

TEST_CASE("state file rejects malformed input") {
    TempDir tmp;
    {
        std::ofstream out(tmp.file("bad.json"));
        out << "{\"format\":\"other/1\"}";
    }
    CHECK_THROWS_AS(read_state_file(tmp.file("bad.json")), std::runtime_error);
    {
        std::ofstream out(tmp.file("garbage.json"));
        out << "not json";
    }
    CHECK_THROWS_AS(read_state_file(tmp.file("garbage.json")), std::runtime_error);
    CHECK_THROWS_AS(read_state_file(tmp.file("missing.json")), std::runtime_error);
}

TEST_CASE("record files round-trip byte-identically") {
    TempDir tmp;
    const RecordFile file = sample_record_file();
    write_records_file(tmp.file("rec.json"), file);
    const RecordFile back = read_records_file(tmp.file("rec.json"));
    CHECK(back.records.size() == 4);
    CHECK(back.config.qubits == 2);
    CHECK(back.config.seed == 11);
    CHECK(back.state_source == "memory");
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK((back.records[i].tilde - file.records[i].tilde).max_abs() == 0.0);
        CHECK(back.records[i].q == file.records[i].q);
        CHECK(back.records[i].arrangement.index_in() == i);
        CHECK(!back.records[i].shots.has_value());
    }
    write_records_file(tmp.file("rec2.json"), back);
    CHECK(slurp(tmp.file("rec.json")) == slurp(tmp.file("rec2.json")));
}

TEST_CASE("record files carry sampled-mode metadata") {
    TempDir tmp;
    RecordFile file = sample_record_file();
    file.config.mode = Mode::Sampled;
    file.config.shots_per_probe = 64;
    for (auto& rec : file.records) rec.shots = 256;
    write_records_file(tmp.file("rec.json"), file);
    const RecordFile back = read_records_file(tmp.file("rec.json"));
    CHECK(back.config.mode == Mode::Sampled);
    CHECK(back.config.shots_per_probe == 64);
    for (const auto& rec : back.records) CHECK(*rec.shots == 256);
}

TEST_CASE("config validation") {
    ExperimentConfig config;
    config.qubits = 2;
    config.designated_outcomes = teleportsim::OutcomeTuple::all_psi_minus(1);
    CHECK_NOTHROW(config.validate());

    config.mode = Mode::Sampled;
    config.shots_per_probe = 0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);

    config.mode = Mode::Exact;
    config.designated_outcomes = teleportsim::OutcomeTuple::all_psi_minus(2);
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);

    config.designated_outcomes = teleportsim::OutcomeTuple::all_psi_minus(1);
    config.input_set[1] = config.input_set[0];
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("estimate files embed the state and the report") {
    TempDir tmp;
    const qstate::DensityMatrix rho = qstate::random_density(2, 4, 9);
    tomo::ReconstructionReport report{rho, rho.mat(), 0.0, 2.5, tomo::Method::ClosedForm2, false};
    write_estimate_file(tmp.file("est.json"), report);

    const qstate::DensityMatrix back = read_state_file(tmp.file("est.json"));
    CHECK((back.mat() - rho.mat()).max_abs() <= 1e-12);

    const json j = json::parse(slurp(tmp.file("est.json")));
    CHECK(j.at("format").get<std::string>() == kEstimateFormat);
    CHECK(j.at("report").at("method").get<std::string>() == "ClosedForm2");
    CHECK(j.at("report").at("condition").get<double>() == 2.5);
    CHECK(j.at("report").at("projected").get<bool>() == false);
}

TEST_CASE("verify metrics") {
    ComplexMatrix zero(2, 2);
    zero(0, 0) = 1.0;
    ComplexMatrix half = ComplexMatrix::identity(2);
    half *= Complex{0.5, 0.0};
    const VerifyMetrics m =
        compare_states(qstate::DensityMatrix(1, zero), qstate::DensityMatrix(1, half));
    CHECK(m.trace_distance == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m.max_entry == doctest::Approx(0.5).epsilon(1e-12));
    const json j = to_json(m);
    CHECK(j.contains("trace_distance"));
    CHECK(j.contains("frobenius"));
    CHECK(j.contains("max_entry"));

    CHECK_THROWS_AS(compare_states(qstate::DensityMatrix(1, half), qstate::random_density(2, 4, 1)),
                    std::invalid_argument);
}
