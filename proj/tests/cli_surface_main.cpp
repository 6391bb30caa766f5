// Exit-code and output-surface checks for the command-line binary.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

int g_failures = 0;

void expect(bool ok, const std::string& what) {
    std::printf("[%s] %s\n", ok ? "ok" : "FAIL", what.c_str());
    if (!ok) ++g_failures;
}

int run(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 4) {
        std::fprintf(stderr, "usage: %s <cli> <scenario_dir> <work_dir>\n", argv[0]);
        return 2;
    }
    const std::string cli = argv[1];
    const std::string scenarios = argv[2];
    const std::string work = argv[3];
    std::system(("mkdir -p " + work).c_str());
    const std::string lab = scenarios + "/paper_lab.json";

    expect(run(cli + " validate " + lab + " > " + work + "/v.log 2>&1") == 0,
           "validate on a shipped scenario exits 0");
    expect(slurp(work + "/v.log").find("no violations") != std::string::npos,
           "validate reports no violations");

    expect(run(cli + " tomography " + lab + " --shots 0 --out " + work + " > /dev/null 2>&1") == 1,
           "zero shots is a config error (exit 1)");

    expect(run(cli + " rate " + work + "/does_not_exist.json > /dev/null 2>&1") == 3,
           "missing scenario file is an I/O error (exit 3)");

    // a scenario with a broken field validates with a report and exit 1
    {
        std::ifstream in(lab);
        std::stringstream buf;
        buf << in.rdbuf();
        std::string text = buf.str();
        const auto pos = text.find("\"attenuation_db_per_km\": 0.77");
        text.replace(pos, std::string("\"attenuation_db_per_km\": 0.77").size(),
                     "\"attenuation_db_per_km\": -1.0");
        std::ofstream out(work + "/broken.json");
        out << text;
    }
    expect(run(cli + " validate " + work + "/broken.json > " + work + "/b.log 2>&1") == 1,
           "negative attenuation fails validation (exit 1)");
    expect(slurp(work + "/b.log").find("attenuation") != std::string::npos,
           "violation names the offending field");

    // dropping the seed makes stochastic commands refuse to run
    {
        std::ifstream in(lab);
        std::stringstream buf;
        buf << in.rdbuf();
        std::string text = buf.str();
        const auto pos = text.find("  \"seed\": 20260808,\n");
        text.erase(pos, std::string("  \"seed\": 20260808,\n").size());
        std::ofstream out(work + "/unseeded.json");
        out << text;
    }
    expect(run(cli + " validate " + work + "/unseeded.json > " + work + "/s.log 2>&1") == 1,
           "missing seed is reported by validate");
    expect(run(cli + " tomography " + work + "/unseeded.json --shots 100 --out " + work +
               " > /dev/null 2>&1") == 1,
           "stochastic command without a seed exits 1");

    expect(run(cli + " rate " + lab + " > " + work + "/r.log 2>&1") == 0, "rate exits 0");
    const std::string r = slurp(work + "/r.log");
    expect(r.find("468165/s") != std::string::npos, "rate prints the attempt rate");
    expect(r.find("350.6/s") != std::string::npos, "rate prints the analytic entanglement rate");

    if (g_failures == 0) {
        std::printf("cli surface checks passed\n");
        return 0;
    }
    std::printf("%d cli surface checks failed\n", g_failures);
    return 1;
}
