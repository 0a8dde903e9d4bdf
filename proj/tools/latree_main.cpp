// Command line front end. Everything computational goes through the shared
// library's C interface; this file only shuffles files and flags.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "latree.h"

namespace fs = std::filesystem;
using OJson = nlohmann::ordered_json;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitInternal = 4;

struct TreeDeleter {
    void operator()(lt_tree* t) const { lt_tree_free(t); }
};
using TreePtr = std::unique_ptr<lt_tree, TreeDeleter>;

struct StringDeleter {
    void operator()(char* s) const { lt_string_free(s); }
};
using CStr = std::unique_ptr<char, StringDeleter>;

[[noreturn]] void die(int code, const std::string& msg) {
    std::cerr << "latree: " << msg << "\n";
    std::exit(code);
}

int check(lt_status rc) {
    if (rc != LT_OK) die(int(rc), lt_last_error());
    return 0;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) die(kExitInput, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& data) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) die(kExitInput, "cannot write " + path.string());
    out << data;
}

// --tree accepts inline Newick or @file
std::string tree_text(const std::string& arg) {
    if (!arg.empty() && arg[0] == '@') return read_file(arg.substr(1));
    return arg;
}

OJson parse_json_file(const std::string& path) {
    try {
        return OJson::parse(read_file(path));
    } catch (const std::exception& e) {
        die(kExitInput, path + ": " + e.what());
    }
}

TreePtr make_tree(const std::string& newick) {
    lt_tree* raw = nullptr;
    check(lt_tree_parse(newick.c_str(), &raw));
    return TreePtr(raw);
}

// the tree comes from --tree when given, else from the file's "tree" field
TreePtr resolve_tree(const std::string& tree_flag, const OJson& file) {
    if (!tree_flag.empty()) return make_tree(tree_text(tree_flag));
    if (file.contains("tree") && file["tree"].is_string())
        return make_tree(file["tree"].get<std::string>());
    die(kExitInput, "no tree: pass --tree or use a file with a tree field");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"binary latent tree models: moments, tree cumulants and fiber analysis"};
    app.require_subcommand(1);

    std::string tree_flag, params_path, out_path, csv_path, chart, input_path, nodes;
    std::string suite;
    double eps = 1e-9;
    int precision = 4;
    unsigned long seed = 20110517UL;

    auto* fwd = app.add_subcommand("forward", "evaluate a parameter file into p/λ/μ/κ(/ρ)");
    fwd->add_option("--tree", tree_flag, "Newick text or @file");
    fwd->add_option("--params", params_path, "parameter JSON")->required();
    fwd->add_option("--chart", chart, "override the file's chart (theta|omega|rho)");
    fwd->add_option("--out", out_path, "output directory")->required();
    fwd->add_option("--csv", csv_path, "also write the table as CSV here");
    fwd->add_option("--precision", precision, "CSV decimals (default 4)");

    auto* rec = app.add_subcommand("recover", "fiber report with recovered parameters/points");
    rec->add_option("input", input_path, "coordinate JSON (kind p, lambda, mu or kappa)")
        ->required();
    rec->add_option("--tree", tree_flag, "Newick text or @file");
    rec->add_option("--eps", eps, "zero tolerance (default 1e-9)");
    rec->add_option("--out", out_path, "report path (default stdout)");

    auto* fib = app.add_subcommand("fiber", "fiber classification only");
    fib->add_option("input", input_path, "coordinate JSON")->required();
    fib->add_option("--tree", tree_flag, "Newick text or @file");
    fib->add_option("--eps", eps, "zero tolerance (default 1e-9)");
    fib->add_option("--out", out_path, "report path (default stdout)");

    auto* sw = app.add_subcommand("switch", "apply local sign switches to an omega file");
    sw->add_option("--params", params_path, "omega-chart parameter JSON")->required();
    sw->add_option("--nodes", nodes, "comma separated inner nodes")->required();
    sw->add_option("--tree", tree_flag, "Newick text or @file");
    sw->add_option("--out", out_path, "output path (default stdout)");

    auto* st = app.add_subcommand("selftest", "run the built-in golden and property suites");
    st->add_option("--suite", suite, "table1|roundtrip|psi|mobius|fiber (default all)");
    st->add_option("--seed", seed, "seed for randomized suites");

    CLI11_PARSE(app, argc, argv);

    if (fwd->parsed()) {
        OJson params = parse_json_file(params_path);
        if (!chart.empty()) params["chart"] = chart;
        TreePtr tree = resolve_tree(tree_flag, params);
        char* raw = nullptr;
        check(lt_forward(tree.get(), params.dump().c_str(), precision, &raw));
        CStr bundle(raw);
        OJson b = OJson::parse(bundle.get());
        fs::path dir(out_path);
        fs::create_directories(dir);
        for (const char* kind : {"p", "lambda", "mu", "kappa", "rho"}) {
            if (!b.contains(kind) || b[kind].is_null()) continue;
            write_file(dir / (std::string(kind) + ".json"), b[kind].dump(2) + "\n");
        }
        if (!csv_path.empty()) write_file(csv_path, b["csv"].get<std::string>());
        return 0;
    }

    if (rec->parsed() || fib->parsed()) {
        if (eps <= 0.0) die(kExitInput, "--eps must be positive");
        OJson coords = parse_json_file(input_path);
        TreePtr tree = resolve_tree(tree_flag, coords);
        char* raw = nullptr;
        check(lt_fiber(tree.get(), coords.dump().c_str(), eps, rec->parsed() ? 1 : 0, &raw));
        CStr report(raw);
        if (out_path.empty())
            std::cout << report.get() << "\n";
        else
            write_file(out_path, std::string(report.get()) + "\n");
        return 0;
    }

    if (sw->parsed()) {
        OJson params = parse_json_file(params_path);
        TreePtr tree = resolve_tree(tree_flag, params);
        char* raw = nullptr;
        check(lt_switch(tree.get(), params.dump().c_str(), nodes.c_str(), &raw));
        CStr out(raw);
        if (out_path.empty())
            std::cout << out.get() << "\n";
        else
            write_file(out_path, std::string(out.get()) + "\n");
        return 0;
    }

    if (st->parsed()) {
        char* raw = nullptr;
        lt_status rc = lt_selftest(suite.c_str(), seed, &raw);
        CStr summary(raw);
        if (summary) {
            OJson j = OJson::parse(summary.get());
            for (const auto& s : j["suites"]) {
                std::cout << "suite " << s["name"].get<std::string>() << ": "
                          << s["passed"].get<int>() << " passed, " << s["failed"].get<int>()
                          << " failed\n";
                for (const auto& f : s["failures"])
                    std::cout << "  FAIL " << f.get<std::string>() << "\n";
            }
        }
        if (rc != LT_OK) {
            std::cerr << "latree: selftest failed\n";
            return rc == LT_ERR_INPUT ? kExitInput : kExitInternal;
        }
        return 0;
    }

    return kExitInput;
}
