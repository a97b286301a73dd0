// End-to-end tests of the command-line tool, run as a subprocess. The test
// binary takes the CLI path as its first argument.

#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "teletomo/qstate.hpp"
#include "teletomo/recordio.hpp"
#include "teletomo/teleportsim.hpp"

using nlohmann::json;
using namespace teletomo;

namespace {

std::string g_cli;

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("teletomo_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run(const std::string& args, const TempDir& tmp, const std::string& tag) {
    const std::string out_path = tmp.file("stdout_" + tag + ".txt");
    const std::string cmd = g_cli + " " + args + " > " + out_path + " 2> " + tmp.file("stderr_" + tag + ".txt");
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream in(out_path, std::ios::binary);
    r.out = std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    return r;
}

std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_singlet(const std::string& path) {
    const qla::ComplexMatrix v = qstate::bell_state_vector(qstate::BellOutcome::PsiMinus);
    expcli::write_state_file(path, qstate::DensityMatrix(2, v * v.adjoint()));
}

}  // namespace

TEST_CASE("gen is deterministic and validates rank") {
    TempDir tmp;
    const std::string cmd = "gen --qubits 2 --rank 4 --seed 7 --out " + tmp.file("a.json");
    const RunResult a = run(cmd, tmp, "a");
    const std::string first = slurp(tmp.file("a.json"));
    const RunResult b = run(cmd, tmp, "b");
    CHECK(a.code == 0);
    CHECK(b.code == 0);
    CHECK(first == slurp(tmp.file("a.json")));
    CHECK(a.out == b.out);
    CHECK(json::parse(a.out).at("eigenvalues").size() == 4);

    const RunResult bad = run("gen --qubits 2 --rank 5 --seed 7 --out " + tmp.file("c.json"), tmp, "c");
    CHECK(bad.code == 2);
}

TEST_CASE("simulate exact emits one record per arrangement") {
    TempDir tmp;
    write_singlet(tmp.file("singlet.json"));
    const RunResult r = run("simulate --state " + tmp.file("singlet.json") + " --out " + tmp.file("rec.json"),
                            tmp, "sim");
    REQUIRE(r.code == 0);
    const json file = json::parse(slurp(tmp.file("rec.json")));
    CHECK(file.at("format").get<std::string>() == "teletomo-records/1");
    REQUIRE(file.at("records").size() == 4);
    // singlet channel: tilde for input Plus is |+><+| / 4
    const json& rec = file.at("records")[2];
    REQUIRE(rec.at("arrangement")[0].get<std::string>() == "Plus");
    for (const auto& entry : rec.at("tilde")) {
        CHECK(entry[0].get<double>() == doctest::Approx(0.125).epsilon(1e-12));
        CHECK(std::abs(entry[1].get<double>()) < 1e-13);
    }
    CHECK(rec.at("q").get<double>() == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("simulate three-qubit states and all-outcomes mode") {
    TempDir tmp;
    const RunResult g = run("gen --qubits 3 --seed 3 --out " + tmp.file("s3.json"), tmp, "g");
    REQUIRE(g.code == 0);
    const RunResult r =
        run("simulate --state " + tmp.file("s3.json") + " --out " + tmp.file("r3.json"), tmp, "r");
    REQUIRE(r.code == 0);
    CHECK(json::parse(slurp(tmp.file("r3.json"))).at("records").size() == 16);

    const RunResult all = run("simulate --state " + tmp.file("s3.json") + " --all-outcomes --out " +
                                  tmp.file("rall.json"),
                              tmp, "all");
    REQUIRE(all.code == 0);
    CHECK(json::parse(slurp(tmp.file("rall.json"))).at("records").size() == 16 * 16);

    // all-outcomes is an exact-mode feature
    const RunResult bad = run("simulate --state " + tmp.file("s3.json") +
                                  " --mode sampled --shots 10 --all-outcomes --out " + tmp.file("x.json"),
                              tmp, "bad");
    CHECK(bad.code == 2);
}

TEST_CASE("sampled simulation is byte-reproducible") {
    TempDir tmp;
    write_singlet(tmp.file("singlet.json"));
    const std::string base = "simulate --state " + tmp.file("singlet.json") +
                             " --mode sampled --shots 200 --seed 5 --out ";
    const RunResult a = run(base + tmp.file("sa.json"), tmp, "sa");
    const RunResult b = run(base + tmp.file("sb.json"), tmp, "sb");
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(slurp(tmp.file("sa.json")) == slurp(tmp.file("sb.json")));

    const RunResult c = run("simulate --state " + tmp.file("singlet.json") +
                                " --mode sampled --shots 200 --seed 6 --out " + tmp.file("sc.json"),
                            tmp, "sc");
    REQUIRE(c.code == 0);
    CHECK(slurp(tmp.file("sa.json")) != slurp(tmp.file("sc.json")));

    const json file = json::parse(slurp(tmp.file("sa.json")));
    CHECK(file.at("config").at("mode").get<std::string>() == "sampled");
    for (const auto& rec : file.at("records")) CHECK(rec.at("shots").get<int>() == 800);
}

TEST_CASE("reconstruct recovers exactly and honors the method flag") {
    TempDir tmp;
    const RunResult g = run("gen --qubits 3 --rank 8 --seed 21 --out " + tmp.file("s.json"), tmp, "g");
    REQUIRE(g.code == 0);
    REQUIRE(run("simulate --state " + tmp.file("s.json") + " --out " + tmp.file("r.json"), tmp, "s").code == 0);

    const RunResult closed =
        run("reconstruct --records " + tmp.file("r.json") + " --out " + tmp.file("ec.json"), tmp, "rc");
    REQUIRE(closed.code == 0);
    CHECK(json::parse(closed.out).at("method").get<std::string>() == "ClosedForm3");

    const RunResult linear = run("reconstruct --records " + tmp.file("r.json") + " --method linear --out " +
                                     tmp.file("el.json"),
                                 tmp, "rl");
    REQUIRE(linear.code == 0);
    CHECK(json::parse(linear.out).at("method").get<std::string>() == "LinearN");

    const RunResult truth = run("verify --truth " + tmp.file("s.json") + " --estimate " + tmp.file("ec.json"),
                                tmp, "v1");
    REQUIRE(truth.code == 0);
    CHECK(json::parse(truth.out).at("trace_distance").get<double>() <= 1e-10);

    const RunResult cross = run("verify --truth " + tmp.file("ec.json") + " --estimate " + tmp.file("el.json"),
                                tmp, "v2");
    REQUIRE(cross.code == 0);
    CHECK(json::parse(cross.out).at("frobenius").get<double>() <= 1e-9);
}

TEST_CASE("reconstruct rejects the closed method beyond three qubits") {
    TempDir tmp;
    REQUIRE(run("gen --qubits 4 --seed 8 --out " + tmp.file("s4.json"), tmp, "g").code == 0);
    REQUIRE(run("simulate --state " + tmp.file("s4.json") + " --out " + tmp.file("r4.json"), tmp, "s")
                .code == 0);
    CHECK(run("reconstruct --records " + tmp.file("r4.json") + " --method closed --out " +
                  tmp.file("e4.json"),
              tmp, "r")
              .code == 2);
    // auto falls through to the linear inversion
    const RunResult rec = run("reconstruct --records " + tmp.file("r4.json") + " --out " +
                                  tmp.file("e4.json"),
                              tmp, "r2");
    REQUIRE(rec.code == 0);
    CHECK(json::parse(rec.out).at("method").get<std::string>() == "LinearN");
}

TEST_CASE("reconstruct reports incomplete record sets with exit 3") {
    TempDir tmp;
    write_singlet(tmp.file("s.json"));
    REQUIRE(run("simulate --state " + tmp.file("s.json") + " --out " + tmp.file("r.json"), tmp, "s").code == 0);
    json file = json::parse(slurp(tmp.file("r.json")));
    file["records"].erase(1);
    {
        std::ofstream out(tmp.file("trunc.json"), std::ios::binary);
        out << file.dump(2) << "\n";
    }
    const RunResult r =
        run("reconstruct --records " + tmp.file("trunc.json") + " --out " + tmp.file("e.json"), tmp, "r");
    CHECK(r.code == 3);
}

TEST_CASE("reconstruct reports singular design matrices with exit 4") {
    TempDir tmp;
    // a degenerate custom input set (no imaginary component anywhere) cannot
    // span the Hermitian space, so the linear inversion must fail
    const double s = 1.0 / std::sqrt(2.0);
    expcli::RecordFile file;
    file.config.qubits = 2;
    file.config.mode = expcli::Mode::Exact;
    file.config.seed = 0;
    file.config.designated_outcomes = teleportsim::OutcomeTuple::all_psi_minus(1);
    file.config.input_set = {qstate::InputState(1.0, 0.0, "Zero"), qstate::InputState(0.0, 1.0, "One"),
                             qstate::InputState(s, s, "Plus"), qstate::InputState(s, -s, "Minus")};
    file.state_source = "degenerate";
    const qstate::DensityMatrix rho = qstate::random_density(2, 4, 17);
    for (std::size_t idx = 0; idx < 4; ++idx) {
        teleportsim::TildeRecord rec;
        rec.arrangement = teleportsim::InputArrangement::from_index(idx, 1, file.config.input_set);
        rec.outcome = file.config.designated_outcomes;
        rec.tilde = teleportsim::exact_tilde(rho.mat(), rec.arrangement, rec.outcome);
        rec.q = rec.tilde.trace().real();
        file.records.push_back(rec);
    }
    expcli::write_records_file(tmp.file("deg.json"), file);
    const RunResult r =
        run("reconstruct --records " + tmp.file("deg.json") + " --out " + tmp.file("e.json"), tmp, "r");
    CHECK(r.code == 4);
}

TEST_CASE("simulate honors a designated non-PsiMinus outcome tuple") {
    TempDir tmp;
    REQUIRE(run("gen --qubits 2 --seed 33 --out " + tmp.file("s.json"), tmp, "g").code == 0);
    const RunResult sim = run("simulate --state " + tmp.file("s.json") + " --outcomes PhiPlus --out " +
                                  tmp.file("r.json"),
                              tmp, "s");
    REQUIRE(sim.code == 0);
    const json file = json::parse(slurp(tmp.file("r.json")));
    CHECK(file.at("records")[0].at("outcome")[0].get<std::string>() == "PhiPlus");

    REQUIRE(run("reconstruct --records " + tmp.file("r.json") + " --out " + tmp.file("e.json"), tmp, "r")
                .code == 0);
    const RunResult v =
        run("verify --truth " + tmp.file("s.json") + " --estimate " + tmp.file("e.json"), tmp, "v");
    REQUIRE(v.code == 0);
    CHECK(json::parse(v.out).at("trace_distance").get<double>() <= 1e-10);
}

TEST_CASE("sampled simulation exits 3 when the designated outcome never occurs") {
    TempDir tmp;
    // |00><00| shared state: the PsiMinus outcome has zero probability for
    // the Zero input, so its estimation cells stay empty
    qla::ComplexMatrix zz(4, 4);
    zz(0, 0) = 1.0;
    expcli::write_state_file(tmp.file("zz.json"), qstate::DensityMatrix(2, zz));
    const RunResult r = run("simulate --state " + tmp.file("zz.json") +
                                " --mode sampled --shots 100 --seed 2 --out " + tmp.file("r.json"),
                            tmp, "s");
    CHECK(r.code == 3);
}

TEST_CASE("simulate rejects single-qubit states") {
    TempDir tmp;
    REQUIRE(run("gen --qubits 1 --seed 1 --out " + tmp.file("s1.json"), tmp, "g").code == 0);
    CHECK(run("simulate --state " + tmp.file("s1.json") + " --out " + tmp.file("r.json"), tmp, "s").code == 2);
}

TEST_CASE("verify output contract") {
    TempDir tmp;
    qla::ComplexMatrix zero(2, 2);
    zero(0, 0) = 1.0;
    expcli::write_state_file(tmp.file("zero.json"), qstate::DensityMatrix(1, zero));
    qla::ComplexMatrix half = qla::ComplexMatrix::identity(2);
    half *= qla::Complex{0.5, 0.0};
    expcli::write_state_file(tmp.file("half.json"), qstate::DensityMatrix(1, half));

    const RunResult same =
        run("verify --truth " + tmp.file("zero.json") + " --estimate " + tmp.file("zero.json"), tmp, "v0");
    REQUIRE(same.code == 0);
    const json j0 = json::parse(same.out);
    CHECK(j0.at("trace_distance").get<double>() == 0.0);
    CHECK(j0.at("frobenius").get<double>() == 0.0);
    CHECK(j0.at("max_entry").get<double>() == 0.0);

    const RunResult diff =
        run("verify --truth " + tmp.file("zero.json") + " --estimate " + tmp.file("half.json"), tmp, "v1");
    REQUIRE(diff.code == 0);
    CHECK(json::parse(diff.out).at("trace_distance").get<double>() == doctest::Approx(0.5).epsilon(1e-12));

    write_singlet(tmp.file("singlet.json"));
    const RunResult bad =
        run("verify --truth " + tmp.file("zero.json") + " --estimate " + tmp.file("singlet.json"), tmp, "v2");
    CHECK(bad.code == 2);
}

TEST_CASE("convergence sweeps and stays deterministic") {
    TempDir tmp;
    write_singlet(tmp.file("s.json"));
    const std::string base = "convergence --state " + tmp.file("s.json") +
                             " --shots 50,800 --seeds 3 --seed 1 --out ";
    const RunResult a = run(base + tmp.file("ca.csv"), tmp, "ca");
    REQUIRE(a.code == 0);
    const RunResult b = run(base + tmp.file("cb.csv"), tmp, "cb");
    REQUIRE(b.code == 0);
    CHECK(slurp(tmp.file("ca.csv")) == slurp(tmp.file("cb.csv")));

    const std::string csv = slurp(tmp.file("ca.csv"));
    std::size_t lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == 7);  // header + 2 grid points x 3 seeds
    REQUIRE(csv.rfind("n_shots,seed,trace_distance\n", 0) == 0);

    // median error shrinks as the grid grows
    std::array<std::vector<double>, 2> errs;
    std::istringstream rows(csv.substr(csv.find('\n') + 1));
    std::string line;
    while (std::getline(rows, line)) {
        const std::size_t c1 = line.find(','), c2 = line.rfind(',');
        const std::size_t grid = std::stoull(line.substr(0, c1)) == 50 ? 0 : 1;
        errs[grid].push_back(std::stod(line.substr(c2 + 1)));
    }
    const auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    CHECK(median(errs[1]) < median(errs[0]));
}

TEST_CASE("usage errors exit with code 2") {
    TempDir tmp;
    CHECK(run("simulate --out " + tmp.file("x.json"), tmp, "u1").code == 2);       // missing --state
    CHECK(run("frobnicate", tmp, "u2").code == 2);                                 // unknown subcommand
    CHECK(run("gen --qubits 2 --out " + tmp.file("x.json") + " --mode exact", tmp, "u3").code == 2);
    CHECK(run("--help", tmp, "u4").code == 0);
}

int main(int argc, char** argv) {
    if (argc > 1 && argv[1][0] != '-') {
        g_cli = argv[1];
        for (int i = 1; i + 1 < argc; ++i) argv[i] = argv[i + 1];
        --argc;
    }
    if (g_cli.empty()) {
        std::fprintf(stderr, "usage: test_cli <path-to-teletomo-binary> [doctest options]\n");
        return 1;
    }
    doctest::Context ctx;
    ctx.applyCommandLine(argc, argv);
    return ctx.run();
}
