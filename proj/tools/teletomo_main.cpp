// teletomo_main.cpp
// Command-line front end: generate states, simulate the teleportation
// protocol (exactly or with finite shots), reconstruct shared states from
// record files, verify estimates and sweep shot-noise convergence.
//
// Exit codes: 0 success, 2 usage/config error, 3 insufficient data,
// 4 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "teletomo/errors.hpp"
#include "teletomo/qla.hpp"
#include "teletomo/qstate.hpp"
#include "teletomo/recordio.hpp"
#include "teletomo/teleportsim.hpp"
#include "teletomo/tomo.hpp"

namespace {

using namespace teletomo;
using expcli::json;

struct GenArgs {
    std::size_t qubits = 2;
    std::size_t rank = 0;  // 0 = full rank
    std::uint64_t seed = 0;
    std::string out;
};

struct SimulateArgs {
    std::string state;
    std::string mode = "exact";
    std::uint64_t shots = 1024;
    std::uint64_t seed = 0;
    std::vector<std::string> outcomes;
    bool all_outcomes = false;
    std::string out;
};

struct ReconstructArgs {
    std::string records;
    std::string method = "auto";
    std::string out;
};

struct VerifyArgs {
    std::string truth;
    std::string estimate;
};

struct ConvergenceArgs {
    std::string state;
    std::vector<std::uint64_t> shot_grid;
    std::size_t seeds = 10;
    std::uint64_t seed = 0;
    std::string out;
};

teleportsim::OutcomeTuple parse_outcomes(const std::vector<std::string>& labels, std::size_t wires) {
    if (labels.empty()) return teleportsim::OutcomeTuple::all_psi_minus(wires);
    teleportsim::OutcomeTuple t;
    for (const std::string& s : labels) {
        const auto o = qstate::bell_outcome_from_string(s);
        if (!o) throw std::invalid_argument("unknown Bell outcome label '" + s + "'");
        t.outcomes.push_back(*o);
    }
    if (t.outcomes.size() != wires) {
        throw std::invalid_argument("expected " + std::to_string(wires) + " outcome labels");
    }
    return t;
}

int cmd_gen(const GenArgs& args) {
    const std::size_t rank = args.rank == 0 ? (std::size_t{1} << args.qubits) : args.rank;
    const qstate::DensityMatrix state = qstate::random_density(args.qubits, rank, args.seed);
    expcli::write_state_file(args.out, state);

    const qla::EigenSystem eig = qla::hermitian_eigen(state.mat());
    json summary;
    summary["command"] = "gen";
    summary["qubits"] = args.qubits;
    summary["rank"] = rank;
    summary["seed"] = args.seed;
    summary["out"] = args.out;
    summary["eigenvalues"] = eig.values;
    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_simulate(const SimulateArgs& args) {
    const qstate::DensityMatrix shared = expcli::read_state_file(args.state);
    const std::size_t n = shared.qubits();
    if (n < 2) throw std::invalid_argument("simulate needs a shared state on at least 2 qubits");
    const std::size_t wires = n - 1;
    const std::size_t arr_count = std::size_t{1} << (2 * wires);

    expcli::RecordFile file;
    file.config.qubits = n;
    file.config.seed = args.seed;
    file.config.designated_outcomes = parse_outcomes(args.outcomes, wires);
    file.state_source = args.state;

    if (args.mode == "exact") {
        file.config.mode = expcli::Mode::Exact;
    } else if (args.mode == "sampled") {
        file.config.mode = expcli::Mode::Sampled;
        file.config.shots_per_probe = args.shots;
    } else {
        throw std::invalid_argument("mode must be 'exact' or 'sampled'");
    }
    if (args.all_outcomes && file.config.mode != expcli::Mode::Exact) {
        throw std::invalid_argument("--all-outcomes requires exact mode");
    }
    file.config.validate();

    for (std::size_t idx = 0; idx < arr_count; ++idx) {
        const teleportsim::InputArrangement arrangement =
            teleportsim::InputArrangement::from_index(idx, wires, file.config.input_set);
        if (file.config.mode == expcli::Mode::Exact) {
            if (args.all_outcomes) {
                for (teleportsim::TildeRecord& rec : teleportsim::outcome_table(shared, arrangement)) {
                    file.records.push_back(std::move(rec));
                }
            } else {
                teleportsim::TildeRecord rec;
                rec.arrangement = arrangement;
                rec.outcome = file.config.designated_outcomes;
                rec.tilde = teleportsim::exact_tilde(shared.mat(), arrangement, rec.outcome);
                rec.q = std::min(1.0, std::max(0.0, rec.tilde.trace().real()));
                file.records.push_back(std::move(rec));
            }
        } else {
            const std::vector<teleportsim::ShotRecord> shots = teleportsim::sample_shots(
                shared, arrangement, file.config.shots_per_probe, file.config.seed,
                static_cast<std::uint32_t>(idx));
            for (teleportsim::TildeRecord& rec :
                 teleportsim::estimate_records(shots, file.config.designated_outcomes, file.config.input_set)) {
                file.records.push_back(std::move(rec));
            }
        }
    }

    expcli::write_records_file(args.out, file);
    json summary;
    summary["command"] = "simulate";
    summary["mode"] = args.mode;
    summary["records"] = file.records.size();
    summary["out"] = args.out;
    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_reconstruct(const ReconstructArgs& args) {
    const expcli::RecordFile file = expcli::read_records_file(args.records);

    std::vector<teleportsim::TildeRecord> selected;
    for (const teleportsim::TildeRecord& rec : file.records) {
        if (rec.outcome == file.config.designated_outcomes) selected.push_back(rec);
    }

    tomo::MethodChoice choice = tomo::MethodChoice::Auto;
    if (args.method == "closed") {
        choice = tomo::MethodChoice::Closed;
    } else if (args.method == "linear") {
        choice = tomo::MethodChoice::Linear;
    } else if (args.method != "auto") {
        throw std::invalid_argument("method must be auto, closed or linear");
    }

    const tomo::ReconstructionReport report = tomo::reconstruct_records(selected, choice, file.config.input_set);
    expcli::write_estimate_file(args.out, report);

    json summary = expcli::report_to_json(report);
    summary["out"] = args.out;
    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_verify(const VerifyArgs& args) {
    const qstate::DensityMatrix truth = expcli::read_state_file(args.truth);
    const qstate::DensityMatrix estimate = expcli::read_state_file(args.estimate);
    const expcli::VerifyMetrics metrics = expcli::compare_states(truth, estimate);
    std::cout << expcli::to_json(metrics).dump() << "\n";
    return 0;
}

int cmd_convergence(const ConvergenceArgs& args) {
    const qstate::DensityMatrix truth = expcli::read_state_file(args.state);
    const std::size_t n = truth.qubits();
    if (n < 2) throw std::invalid_argument("convergence needs a shared state on at least 2 qubits");
    const std::size_t wires = n - 1;
    const std::size_t arr_count = std::size_t{1} << (2 * wires);
    if (args.shot_grid.empty()) throw std::invalid_argument("--shots grid must not be empty");
    const teleportsim::OutcomeTuple designated = teleportsim::OutcomeTuple::all_psi_minus(wires);

    std::ofstream csv(args.out, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot open " + args.out + " for writing");
    csv << "n_shots,seed,trace_distance\n";

    std::size_t rows = 0;
    for (std::uint64_t shots : args.shot_grid) {
        for (std::size_t s = 0; s < args.seeds; ++s) {
            const std::uint64_t run_seed = args.seed + s;
            std::vector<teleportsim::TildeRecord> records;
            for (std::size_t idx = 0; idx < arr_count; ++idx) {
                const teleportsim::InputArrangement arrangement =
                    teleportsim::InputArrangement::from_index(idx, wires);
                const std::vector<teleportsim::ShotRecord> shot_list = teleportsim::sample_shots(
                    truth, arrangement, shots, run_seed, static_cast<std::uint32_t>(idx));
                for (teleportsim::TildeRecord& rec : teleportsim::estimate_records(shot_list, designated)) {
                    records.push_back(std::move(rec));
                }
            }
            const tomo::ReconstructionReport report = tomo::reconstruct_records(records);
            const double err = qstate::trace_distance(truth, report.rho_hat);
            char line[96];
            std::snprintf(line, sizeof(line), "%llu,%llu,%.17g\n",
                          static_cast<unsigned long long>(shots),
                          static_cast<unsigned long long>(run_seed), err);
            csv << line;
            ++rows;
        }
    }
    csv.close();

    json summary;
    summary["command"] = "convergence";
    summary["rows"] = rows;
    summary["out"] = args.out;
    std::cout << summary.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"teletomo: teleportation-based quantum state tomography toolkit"};
    app.require_subcommand(1);

    GenArgs gen;
    CLI::App* gen_cmd = app.add_subcommand("gen", "generate a random density matrix file");
    gen_cmd->add_option("--qubits", gen.qubits, "number of qubits (1-5)")->required();
    gen_cmd->add_option("--rank", gen.rank, "state rank (default: full)");
    gen_cmd->add_option("--seed", gen.seed, "random seed");
    gen_cmd->add_option("--out", gen.out, "output state file")->required();

    SimulateArgs sim;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "run the teleportation protocol on a state file");
    sim_cmd->add_option("--state", sim.state, "shared state file")->required();
    sim_cmd->add_option("--mode", sim.mode, "exact or sampled (default exact)");
    sim_cmd->add_option("--shots", sim.shots, "shots per probe (sampled mode)");
    sim_cmd->add_option("--seed", sim.seed, "sampling seed");
    sim_cmd->add_option("--outcomes", sim.outcomes, "designated outcome labels, one per wire")
        ->delimiter(',');
    sim_cmd->add_flag("--all-outcomes", sim.all_outcomes, "emit every outcome tuple (exact mode)");
    sim_cmd->add_option("--out", sim.out, "output record file")->required();

    ReconstructArgs rec;
    CLI::App* rec_cmd = app.add_subcommand("reconstruct", "reconstruct the shared state from records");
    rec_cmd->add_option("--records", rec.records, "record file")->required();
    rec_cmd->add_option("--method", rec.method, "auto, closed or linear (default auto)");
    rec_cmd->add_option("--out", rec.out, "output estimate file")->required();

    VerifyArgs ver;
    CLI::App* ver_cmd = app.add_subcommand("verify", "compare an estimate against a reference state");
    ver_cmd->add_option("--truth", ver.truth, "reference state file")->required();
    ver_cmd->add_option("--estimate", ver.estimate, "estimate or state file")->required();

    ConvergenceArgs conv;
    CLI::App* conv_cmd = app.add_subcommand("convergence", "sweep reconstruction error against shot count");
    conv_cmd->add_option("--state", conv.state, "shared state file")->required();
    conv_cmd->add_option("--shots", conv.shot_grid, "comma-separated shots-per-probe grid")
        ->required()
        ->delimiter(',');
    conv_cmd->add_option("--seeds", conv.seeds, "number of seeds per grid point (default 10)");
    conv_cmd->add_option("--seed", conv.seed, "base seed");
    conv_cmd->add_option("--out", conv.out, "output CSV file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen_cmd->parsed()) return cmd_gen(gen);
        if (sim_cmd->parsed()) return cmd_simulate(sim);
        if (rec_cmd->parsed()) return cmd_reconstruct(rec);
        if (ver_cmd->parsed()) return cmd_verify(ver);
        if (conv_cmd->parsed()) return cmd_convergence(conv);
    } catch (const InsufficientDataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
