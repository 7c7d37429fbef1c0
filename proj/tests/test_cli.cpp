// End-to-end tests that drive the installed command-line binary.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <catch2/catch_amalgamated.hpp>

#include "qcs/signals.hpp"

#ifndef QCS_CLI_PATH
#error "QCS_CLI_PATH must point at the pipeline binary"
#endif

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("qcs_cli_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run_cli(const TempDir& tmp, const std::string& args) {
    static int invocation = 0;
    const std::string out_path = tmp.file("stdout_" + std::to_string(invocation++) + ".txt");
    const std::string cmd =
        std::string(QCS_CLI_PATH) + " " + args + " > " + out_path + " 2> /dev/null";
    const int status = std::system(cmd.c_str());
    RunResult r;
    if (status != -1 && WIFEXITED(status)) r.code = WEXITSTATUS(status);
    std::ifstream is(out_path);
    std::stringstream ss;
    ss << is.rdbuf();
    r.out = ss.str();
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("synthesis is reproducible from the seed") {
    TempDir tmp;
    const std::string base = "synth --kind ar1 --r 0.95 --n 32 --segments 4 --seed 9 --out ";
    REQUIRE(run_cli(tmp, base + tmp.file("a.csv")).code == 0);
    REQUIRE(run_cli(tmp, base + tmp.file("b.csv")).code == 0);
    CHECK(slurp(tmp.file("a.csv")) == slurp(tmp.file("b.csv")));
    REQUIRE(run_cli(tmp, "synth --kind ar1 --r 0.95 --n 32 --segments 4 --seed 10 --out " +
                             tmp.file("c.csv"))
                .code == 0);
    CHECK(slurp(tmp.file("a.csv")) != slurp(tmp.file("c.csv")));
}

TEST_CASE("pulse synthesis writes the dataset and its rate track") {
    TempDir tmp;
    const auto r = run_cli(tmp,
                           "synth --kind ppg --duration 20 --fs 32 --bpm-profile const:90 "
                           "--artifact 0.1 --seed 4 --out " +
                               tmp.file("ppg.csv"));
    REQUIRE(r.code == 0);
    REQUIRE(fs::exists(tmp.file("ppg.csv")));
    REQUIRE(fs::exists(tmp.file("ppg.bpm.csv")));
    const auto ds = qcs::load_csv(tmp.file("ppg.csv"));
    CHECK(ds.channel_names ==
          std::vector<std::string>{"ppg", "ax", "ay", "az"});
    CHECK(ds.sample_rate == 32.0);
    const auto track = qcs::load_bpm_csv(tmp.file("ppg.bpm.csv"));
    REQUIRE(track.bpm.size() == 2);
    CHECK(track.bpm[0] == 90.0);
}

TEST_CASE("compress, recover and score a small recording") {
    TempDir tmp;
    const std::string data = tmp.file("data.csv");
    REQUIRE(run_cli(tmp, "synth --kind ar1 --r 0.95 --n 32 --segments 6 --seed 3 --out " + data)
                .code == 0);

    const std::string payloads = tmp.file("payloads");
    const auto comp = run_cli(
        tmp, "compress --in " + data + " --out " + payloads + " --n 32 --m 16 --b 3 --seed 5");
    REQUIRE(comp.code == 0);
    CHECK(comp.out.find("cr=0.500000") != std::string::npos);
    CHECK(comp.out.find("body_bytes=6") != std::string::npos);
    REQUIRE(fs::exists(payloads + "/sidecar.csv"));
    for (int i = 0; i < 6; ++i)
        CHECK(fs::exists(payloads + "/ar1_" + std::to_string(i) + ".qcsp"));

    const std::string rec = tmp.file("rec.csv");
    const auto recovered =
        run_cli(tmp, "recover --in " + payloads + " --out " + rec + " --algo bdq --jobs 1");
    REQUIRE(recovered.code == 0);
    REQUIRE(fs::exists(rec));
    REQUIRE(fs::exists(tmp.file("rec.diag.json")));
    const auto ds = qcs::load_csv(rec);
    REQUIRE(ds.channel_names == std::vector<std::string>{"ar1"});
    CHECK(ds.channels[0].size() == 6u * 32u);
    const std::string diag = slurp(tmp.file("rec.diag.json"));
    CHECK(diag.find("\"iterations\"") != std::string::npos);
    CHECK(diag.find("\"segment\"") != std::string::npos);

    SECTION("blind arm also runs") {
        const std::string rec2 = tmp.file("rec_blind.csv");
        REQUIRE(run_cli(tmp, "recover --in " + payloads + " --out " + rec2 +
                                 " --algo bdq-blind --jobs 1")
                    .code == 0);
        CHECK(fs::exists(rec2));
        CHECK(slurp(rec2) != slurp(rec));
    }
    SECTION("recovery output is independent of worker count") {
        const std::string rec4 = tmp.file("rec_jobs4.csv");
        REQUIRE(run_cli(tmp, "recover --in " + payloads + " --out " + rec4 +
                                 " --algo bdq --jobs 4")
                    .code == 0);
        CHECK(slurp(rec4) == slurp(rec));
    }
    SECTION("inline report against the source") {
        const std::string report = tmp.file("report.txt");
        REQUIRE(run_cli(tmp, "recover --in " + payloads + " --out " + tmp.file("rec_r.csv") +
                                 " --algo bdq --jobs 1 --truth " + data + " --report " + report)
                    .code == 0);
        const std::string text = slurp(report);
        CHECK(text.find("channel=ar1") != std::string::npos);
        CHECK(text.find("arsnr_db=") != std::string::npos);
    }
    SECTION("standalone metrics command") {
        const auto met =
            run_cli(tmp, "metrics --truth " + data + " --recovered " + rec + " --n 32");
        REQUIRE(met.code == 0);
        CHECK(met.out.find("channel=ar1") != std::string::npos);
        CHECK(met.out.find("arsnr_db=") != std::string::npos);
        CHECK(met.out.find("ssim[0]=") != std::string::npos);
    }
}

TEST_CASE("identical inputs produce byte-identical recoveries") {
    TempDir tmp;
    const std::string data = tmp.file("data.csv");
    REQUIRE(run_cli(tmp, "synth --kind ar1 --r 0.9 --n 32 --segments 3 --seed 7 --out " + data)
                .code == 0);
    const std::string payloads = tmp.file("p");
    REQUIRE(run_cli(tmp, "compress --in " + data + " --out " + payloads +
                             " --n 32 --m 16 --b 2")
                .code == 0);
    REQUIRE(run_cli(tmp, "recover --in " + payloads + " --out " + tmp.file("r1.csv") +
                             " --jobs 1")
                .code == 0);
    REQUIRE(run_cli(tmp, "recover --in " + payloads + " --out " + tmp.file("r2.csv") +
                             " --jobs 1")
                .code == 0);
    CHECK(slurp(tmp.file("r1.csv")) == slurp(tmp.file("r2.csv")));
}

TEST_CASE("parameter sweep emits one row per grid point") {
    TempDir tmp;
    const std::string data = tmp.file("data.csv");
    REQUIRE(run_cli(tmp, "synth --kind ar1 --r 0.95 --n 32 --segments 4 --seed 2 --out " + data)
                .code == 0);
    const std::string args = "sweep --in " + data +
                             " --n 32 --m 16 --b 2,3 --algo bdq --jobs 1 --out ";
    REQUIRE(run_cli(tmp, args + tmp.file("s1.csv")).code == 0);
    REQUIRE(run_cli(tmp, args + tmp.file("s2.csv")).code == 0);
    const std::string text = slurp(tmp.file("s1.csv"));
    CHECK(text == slurp(tmp.file("s2.csv")));

    std::istringstream is(text);
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "algo,m,b,mb_bits,arsnr_db,ssim,error1_bpm,sd_bpm,pearson_r,status");
    int rows = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        ++rows;
        CHECK(line.rfind("bdq,16,", 0) == 0);
        CHECK(line.find(",ok") != std::string::npos);
    }
    CHECK(rows == 2);
}

TEST_CASE("options can come from a config file with command-line overrides") {
    TempDir tmp;
    const std::string data = tmp.file("data.csv");
    REQUIRE(run_cli(tmp, "synth --kind ar1 --r 0.9 --n 32 --segments 3 --seed 12 --out " + data)
                .code == 0);
    {
        std::ofstream os(tmp.file("cfg.ini"));
        os << "[compress]\nn=32\nm=16\nb=2\n";
    }
    const auto from_cfg = run_cli(tmp, "--config " + tmp.file("cfg.ini") + " compress --in " +
                                           data + " --out " + tmp.file("p_cfg"));
    REQUIRE(from_cfg.code == 0);
    CHECK(from_cfg.out.find("body_bytes=4") != std::string::npos);  // 16 x 2 bits

    const auto overridden = run_cli(tmp, "--config " + tmp.file("cfg.ini") + " compress --in " +
                                             data + " --out " + tmp.file("p_ovr") + " --b 3");
    REQUIRE(overridden.code == 0);
    CHECK(overridden.out.find("body_bytes=6") != std::string::npos);  // 16 x 3 bits
}

TEST_CASE("per-segment sensing matrices are recorded in the payload headers") {
    TempDir tmp;
    const std::string data = tmp.file("data.csv");
    REQUIRE(run_cli(tmp, "synth --kind ar1 --r 0.9 --n 32 --segments 3 --seed 13 --out " + data)
                .code == 0);
    const std::string shared = tmp.file("shared");
    const std::string fresh = tmp.file("fresh");
    REQUIRE(run_cli(tmp, "compress --in " + data + " --out " + shared + " --n 32 --m 16 --b 3")
                .code == 0);
    REQUIRE(run_cli(tmp, "compress --in " + data + " --out " + fresh +
                             " --n 32 --m 16 --b 3 --per-segment-matrix")
                .code == 0);
    // Different matrices measure differently, so the payload bodies differ...
    CHECK(slurp(shared + "/ar1_1.qcsp") != slurp(fresh + "/ar1_1.qcsp"));
    // ...but both payload sets decode, because each header carries its seed.
    REQUIRE(run_cli(tmp, "recover --in " + fresh + " --out " + tmp.file("rec.csv") + " --jobs 1")
                .code == 0);
    const auto ds = qcs::load_csv(tmp.file("rec.csv"));
    CHECK(ds.channels[0].size() == 3u * 32u);
}

TEST_CASE("heart-rate truth is discovered from the dataset's sidecar") {
    TempDir tmp;
    const std::string data = tmp.file("ppg.csv");
    REQUIRE(run_cli(tmp, "synth --kind ppg --duration 20 --fs 31.75 --bpm-profile ramp:80:120"
                         " --artifact 0 --seed 21 --out " + data)
                .code == 0);
    REQUIRE(run_cli(tmp, "compress --in " + data + " --out " + tmp.file("pl") +
                             " --n 128 --m 64 --b 3 --channel ppg")
                .code == 0);
    REQUIRE(run_cli(tmp, "recover --in " + tmp.file("pl") + " --out " + tmp.file("rec.csv") +
                             " --jobs 1")
                .code == 0);

    // metrics finds ppg.bpm.csv next to the truth dataset without --bpm.
    const auto met = run_cli(tmp, "metrics --truth " + data + " --recovered " +
                                      tmp.file("rec.csv") + " --n 128 --channel ppg");
    REQUIRE(met.code == 0);
    CHECK(met.out.find("hr_recovered") != std::string::npos);
    CHECK(met.out.find("error1_bpm=") != std::string::npos);

    // sweep does the same, so its HR columns are populated for ppg datasets.
    const auto sw = run_cli(tmp, "sweep --in " + data + " --out " + tmp.file("sweep.csv") +
                                     " --m 64 --b 3 --algo bdq --jobs 1");
    REQUIRE(sw.code == 0);
    const std::string csv = slurp(tmp.file("sweep.csv"));
    const auto row_start = csv.find("bdq,64,3,");
    REQUIRE(row_start != std::string::npos);
    const std::string row = csv.substr(row_start, csv.find('\n', row_start) - row_start);
    CHECK(row.find("nan") == std::string::npos);
    CHECK(row.substr(row.size() - 3) == ",ok");
}

TEST_CASE("command failures map to distinct exit codes") {
    TempDir tmp;
    SECTION("usage errors exit 1") {
        CHECK(run_cli(tmp, "synth --kind ar1 --no-such-flag --out x.csv").code == 1);
        CHECK(run_cli(tmp, "recover --in nowhere --out x.csv --algo nonsense").code == 1);
        CHECK(run_cli(tmp, "synth --kind mystery --out " + tmp.file("x.csv")).code == 1);
        CHECK(run_cli(tmp, "").code == 1);
    }
    SECTION("data errors exit 2") {
        CHECK(run_cli(tmp, "compress --in " + tmp.file("absent.csv") + " --out " +
                               tmp.file("p"))
                  .code == 2);
        CHECK(run_cli(tmp, "recover --in " + tmp.file("absent_dir") + " --out " +
                               tmp.file("x.csv"))
                  .code == 2);
    }
}
