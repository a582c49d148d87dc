// Exit-code contract and byte-determinism checks for the CLI, driven through
// std::system against the built binary.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
    std::cout << (ok ? "ok   " : "FAIL ") << what << "\n";
    if (!ok) ++failures;
}

int run(const std::string& args) {
    std::string cmd = std::string(ANOSOV_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string models(const std::string& name) {
    return std::string(ANOSOV_MODELS_DIR) + "/" + name + ".json";
}

} // namespace

int main() {
    std::string out1 = "cli_out1", out2 = "cli_out2";

    check(run("certify --model " + models("linear") + " --out " + out1) == 0,
          "certify exits 0 on the linear model");
    check(run("periodic --model " + models("conjugated_ref") + " --nmax 2 --out " + out1) == 0,
          "periodic exits 0 on the conjugated model");
    check(run("spectrum --matrix 0,1,0;0,0,1;3,1,0 --out " + out1) == 0,
          "spectrum accepts a 3x3 integer matrix");
    check(run("periodic --model no_such_file.json --out " + out1) != 0,
          "missing model file fails loudly");
    check(run("certify --model " + models("linear")) == 0, "default out dir works");

    // the defective model trips the Livsic obstruction gate -> exit 2
    check(run("livsic --model " + models("trig_eps005") + " --N 64 --F 8 --out " + out1) == 2,
          "livsic exits 2 on the obstructed model");

    // determinism: identical config + seed => byte-identical outputs
    check(run("conformal --model " + models("linear") + " --pairs 6 --N 64 --F 4 --seed 11 --out " +
              out1) == 0,
          "conformal run 1");
    check(run("conformal --model " + models("linear") + " --pairs 6 --N 64 --F 4 --seed 11 --out " +
              out2) == 0,
          "conformal run 2");
    check(slurp(out1 + "/conformal.csv") == slurp(out2 + "/conformal.csv"),
          "conformal CSV is byte-identical across runs");
    check(!slurp(out1 + "/conformal.csv").empty(), "conformal CSV is nonempty");

    check(run("periodic --model " + models("linear") + " --nmax 3 --seed 5 --out " + out1) == 0,
          "periodic run 1");
    check(run("periodic --model " + models("linear") + " --nmax 3 --seed 5 --out " + out2) == 0,
          "periodic run 2");
    check(slurp(out1 + "/periodic.csv") == slurp(out2 + "/periodic.csv"),
          "periodic CSV is byte-identical across runs");

    std::system(("rm -rf " + out1 + " " + out2 + " out").c_str());
    if (failures) {
        std::cout << failures << " cli checks failed\n";
        return 1;
    }
    std::cout << "all cli checks passed\n";
    return 0;
}
