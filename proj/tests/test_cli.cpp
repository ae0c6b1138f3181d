#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <random>

#include "lambdar/json_io.hpp"
#include "lambdar/oracle.hpp"

using namespace lambdar;

namespace {

struct RunResult {
    int exit_code;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    std::string cmd = std::string(LAMBDAR_CLI_PATH) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    std::string out;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    int st = pclose(p);
    return {WEXITSTATUS(st), out};
}

}  // namespace

TEST_CASE("reduce traces and exit codes") {
    auto r = run_cli("reduce --strategy flneed '(\\x.(\\i.i)((\\i.i) x))(\\y.y (\\i.i))'");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("normal form:") != std::string::npos);
    // the displayed run has nine steps: three dB, then spl/1s alternating
    CHECK(r.out.find("9. [1s]") != std::string::npos);

    auto fuel = run_cli("reduce --strategy name --fuel 20 '(\\x.x x)(\\x.x x)'");
    CHECK(fuel.exit_code == 2);

    auto bad = run_cli("reduce --strategy name 'x[y//z]'");
    CHECK(bad.exit_code == 1);

    auto explore = run_cli("reduce --strategy r-explore --depth 2 '(\\x.x x)(y z)'");
    CHECK(explore.exit_code == 0);
    CHECK(explore.out.find("confluent") != std::string::npos);
}

TEST_CASE("measure subcommands") {
    auto cl = run_cli("measure --kind cl '(y y)[y/(\\z.x) w]'");
    CHECK(cl.exit_code == 0);
    CHECK(cl.out == "[a(1, 4)]\n");

    auto lv = run_cli("measure --kind level 'x[x/z[y/w]][w/w1]'");
    CHECK(lv.out.find("z: 1") != std::string::npos);
    CHECK(lv.out.find("w1: 3") != std::string::npos);

    // the inferred derivation leaves the non-needed z untyped
    auto d = run_cli("measure --kind d 'x[x/y z]'");
    CHECK(d.exit_code == 0);
    CHECK(d.out == "(1, 2, 2)\n");

    auto omega = run_cli("measure --kind d --fuel 100 '(\\x.x x)(\\x.x x)'");
    CHECK(omega.exit_code == 2);
}

TEST_CASE("skeleton subcommands") {
    auto mfe = run_cli("skeleton --mode mfe --theta y '((\\i.i) y) (\\i.i) (\\z.z y w)'");
    CHECK(mfe.out == "[\\i.i; \\i.i; w]\n");
    auto sk = run_cli("skeleton --mode skeleton --theta y '((\\i.i) y) (\\i.i) (\\z.z y w)'");
    CHECK(sk.out == "<> y <> (\\z.z y <>)\n");
    auto big = run_cli("skeleton --mode bigstep --theta y,z '(y w) z'");
    CHECK(big.exit_code == 0);
    auto small = run_cli("skeleton --mode smallstep --theta y 'x[q/w]'");
    CHECK(small.exit_code == 1);  // not pure
}

TEST_CASE("check subcommands") {
    CHECK(run_cli("check --grammar t '\\x.(y z)[y/\\w.w][z/\\w.w]'").out == "true\n");
    CHECK(run_cli("check --grammar t '\\x.(y y)[y/\\w.w]'").out == "false\n");
    CHECK(run_cli("check --grammar u '(y z)[y//\\x.x]'").out == "true\n");
    CHECK(run_cli("check --grammar ne 'x[y//\\w.w] (\\u.u)'").out == "true\n");
}

TEST_CASE("infer and derivation files round trip") {
    auto j = run_cli("infer --format json 'x[x/y z]'");
    REQUIRE(j.exit_code == 0);
    json parsed = json::parse(j.out);
    CHECK(parsed["measure"] == "(1, 2, 2)");

    // write to a file, check it
    std::string path = "/tmp/lambdar_deriv_test.json";
    std::ofstream(path) << j.out;
    auto chk = run_cli("check --derivation " + path);
    CHECK(chk.exit_code == 0);
    CHECK(chk.out.find("valid derivation") != std::string::npos);

    // corrupt the rule and watch it fail
    json bad = parsed;
    bad["premises"][1]["multi"] = "[a]";
    std::ofstream(path) << bad.dump();
    auto chk2 = run_cli("check --derivation " + path);
    CHECK(chk2.exit_code == 1);
}

TEST_CASE("json trace lines follow the schema") {
    auto r = run_cli("reduce --strategy name --format json '(\\x.x x)(y z)'");
    REQUIRE(r.exit_code == 0);
    std::istringstream lines(r.out);
    std::string line;
    size_t steps = 0;
    bool saw_status = false;
    while (std::getline(lines, line)) {
        json j = json::parse(line);
        if (j.contains("status")) {
            saw_status = true;
            CHECK(j["status"] == "normal-form");
            continue;
        }
        ++steps;
        CHECK(j.contains("step"));
        CHECK(j.contains("kind"));
        CHECK(j.contains("path"));
        CHECK(j.contains("term"));
        CHECK(j.contains("cl"));
        CHECK(j.contains("lv"));
        // the printed term reparses
        CHECK_NOTHROW(parse(j["term"].get<std::string>()));
    }
    CHECK(saw_status);
    CHECK(steps >= 4);

    auto rw = run_cli("reduce --strategy sub --format json '(x x)[x/y z]'");
    std::istringstream lines2(rw.out);
    while (std::getline(lines2, line)) {
        json j = json::parse(line);
        if (!j.contains("status")) CHECK(j.contains("rule"));
    }
}

TEST_CASE("identical invocations are byte identical") {
    std::string cmd = "reduce --strategy flneed --format json '(\\x.(\\i.i)((\\i.i) x))(\\y.y (\\i.i))'";
    auto a = run_cli(cmd);
    auto b = run_cli(cmd);
    CHECK(a.out == b.out);
    CHECK(a.exit_code == b.exit_code);
}

TEST_CASE("unicode flag") {
    auto r = run_cli("reduce --strategy name --unicode '(\\x.x)(\\y.y)'");
    CHECK(r.out.find("\xCE\xBB") != std::string::npos);
    // unicode lambda accepted on input
    auto r2 = run_cli("measure --kind cl '(\xCE\xBBx.x) y'");
    CHECK(r2.out == "[]\n");
}

TEST_CASE("generated terms round trip through the printer") {
    std::mt19937_64 rng(111);
    for (int i = 0; i < 1000; ++i) {
        GenConfig cfg;
        cfg.seed = rng();
        cfg.grammar = i % 2 ? GenGrammar::U : GenGrammar::PureLambda;
        Term t = gen_term(cfg);
        CHECK(alpha_eq(parse(print(t)), t));
    }
}

TEST_CASE("stdin input") {
    std::string cmd = "echo '(\\x.x) y' | " + std::string(LAMBDAR_CLI_PATH) +
                      " reduce --strategy name - 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    std::string out;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    int st = pclose(p);
    CHECK(WEXITSTATUS(st) == 0);
    CHECK(out.find("normal form: y") != std::string::npos);
}
