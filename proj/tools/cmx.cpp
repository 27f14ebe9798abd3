// cmx: maximum-entropy circulant band extension and reciprocal model identification.
//
// Exit codes: 0 success, 1 input error, 2 infeasible or degenerate, 3 verification failure.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cmx/cmx.hpp"
#include "cmx/io.hpp"

namespace {

namespace fs = std::filesystem;
using cmx::io::json;

constexpr int exit_ok = 0;
constexpr int exit_input = 1;
constexpr int exit_infeasible = 2;
constexpr int exit_verify = 3;

int exit_code(cmx::errc code)
{
    switch (code) {
    case cmx::errc::infeasible_band:
    case cmx::errc::infeasible:
    case cmx::errc::horizon_exhausted:
    case cmx::errc::degenerate_data:
    case cmx::errc::degenerate_process:
    case cmx::errc::no_convergence:
        return exit_infeasible;
    default:
        return exit_input;
    }
}

json error_json(const cmx::error& e)
{
    return json{{"status", "error"}, {"code", cmx::to_string(e.code())}, {"message", e.what()}};
}

void prepare_dir(const std::string& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw cmx::error(cmx::errc::input, "cannot create " + dir + ": " + ec.message());
    }
}

std::string in_dir(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

struct ExtendArgs {
    std::string band;
    int N = 0;
    double tol = cmx::SolverConfig{}.grad_tol;
    int max_iter = cmx::SolverConfig{}.max_iter;
    std::string out;
};

int run_extend(const ExtendArgs& a)
{
    prepare_dir(a.out);
    const std::string diag_path = in_dir(a.out, "diagnostics.json");
    try {
        const cmx::CovBand band = cmx::io::band_from_json(cmx::io::read_file(a.band));
        cmx::SolverConfig cfg;
        cfg.grad_tol = a.tol;
        cfg.max_iter = a.max_iter;
        const cmx::MaxEntSolution sol = cmx::solve(band, a.N, cfg);
        cmx::io::write_file(in_dir(a.out, "covariance.json"), cmx::io::to_json(sol.covariance));
        cmx::io::write_file(in_dir(a.out, "model.json"), cmx::io::to_json(sol.model));
        cmx::io::write_file(diag_path, cmx::io::to_json(sol.diagnostics));
        return exit_ok;
    } catch (const cmx::solver_error& e) {
        json d = cmx::io::to_json(e.diagnostics());
        d["message"] = e.what();
        cmx::io::write_file(diag_path, d);
        std::cerr << "cmx extend: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const cmx::error& e) {
        cmx::io::write_file(diag_path, error_json(e));
        std::cerr << "cmx extend: " << e.what() << "\n";
        return exit_code(e.code());
    }
}

struct IdentifyArgs {
    std::string data;
    int n = 0;
    double ridge = 0.0;
    int extend_N = 0;
    std::string out;
};

int run_identify(const IdentifyArgs& a)
{
    prepare_dir(a.out);
    const std::string diag_path = in_dir(a.out, "diagnostics.json");
    try {
        const cmx::Dataset data = cmx::io::dataset_from_json(cmx::io::read_file(a.data));
        cmx::IdentifyConfig cfg;
        cfg.ridge = a.ridge;
        cfg.extend_N = a.extend_N;
        const cmx::IdentifyResult res = cmx::identify(data, a.n, cfg);
        cmx::io::write_file(in_dir(a.out, "model.json"), cmx::io::to_json(res.model));
        cmx::io::write_file(diag_path, cmx::io::to_json(res.diagnostics));
        return exit_ok;
    } catch (const cmx::solver_error& e) {
        json d = cmx::io::to_json(e.diagnostics());
        d["message"] = e.what();
        cmx::io::write_file(diag_path, d);
        std::cerr << "cmx identify: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const cmx::error& e) {
        cmx::io::write_file(diag_path, error_json(e));
        std::cerr << "cmx identify: " << e.what() << "\n";
        return exit_code(e.code());
    }
}

int run_sample(const std::string& model_path, int T, std::uint64_t seed, const std::string& out)
{
    const cmx::ReciprocalModel model = cmx::io::model_from_json(cmx::io::read_file(model_path));
    cmx::io::write_file(out, cmx::io::to_json(cmx::sample(model, T, seed)));
    return exit_ok;
}

int run_feasibility(const std::string& band_path, int n_max)
{
    const cmx::CovBand band = cmx::io::band_from_json(cmx::io::read_file(band_path));
    try {
        const cmx::FeasibleExtension ext = cmx::find_feasible_N(band, n_max);
        std::cout << cmx::io::dump(json{{"status", "feasible"},
                                        {"N", ext.N},
                                        {"min_eigenvalue", ext.trace.back().min_eigenvalue},
                                        {"trace", cmx::io::to_json(ext.trace)}});
        return exit_ok;
    } catch (const cmx::horizon_exhausted_error& e) {
        std::cout << cmx::io::dump(json{{"status", "horizon_exhausted"}, {"trace", cmx::io::to_json(e.trace())}});
        return exit_infeasible;
    }
}

int run_verify(const std::string& model_path, const std::string& cov_path)
{
    const cmx::ReciprocalModel model = cmx::io::model_from_json(cmx::io::read_file(model_path));
    const cmx::BlockCirculant cov = cmx::io::circulant_from_json(cmx::io::read_file(cov_path));
    if (model.N != cov.N() || model.m() != cov.m()) {
        throw cmx::error(cmx::errc::dimension, "model and covariance differ in shape");
    }
    const cmx::VerificationReport report = cmx::verify_model(model, cov);
    json j = cmx::io::to_json(report);
    j["ok"] = report.ok();
    std::cout << cmx::io::dump(j);
    return report.ok() ? exit_ok : exit_verify;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Maximum-entropy band extension and reciprocal process identification on Z_N"};
    app.require_subcommand(1);

    ExtendArgs ext;
    auto* extend = app.add_subcommand("extend", "Maximum-entropy circulant completion of a covariance band");
    extend->add_option("--band", ext.band, "band JSON")->required()->check(CLI::ExistingFile);
    extend->add_option("--N", ext.N, "period")->required()->check(CLI::PositiveNumber);
    extend->add_option("--tol", ext.tol, "relative gradient tolerance")->check(CLI::PositiveNumber);
    extend->add_option("--max-iter", ext.max_iter, "iteration limit")->check(CLI::PositiveNumber);
    extend->add_option("--out", ext.out, "output directory")->required();

    IdentifyArgs idf;
    auto* ident = app.add_subcommand("identify", "Maximum-likelihood reciprocal model from data");
    ident->add_option("--data", idf.data, "dataset JSON")->required()->check(CLI::ExistingFile);
    ident->add_option("--n", idf.n, "bandwidth")->required()->check(CLI::NonNegativeNumber);
    ident->add_option("--ridge", idf.ridge, "added to the lag-0 sample covariance")->check(CLI::NonNegativeNumber);
    ident->add_option("--extend-N", idf.extend_N, "fit on a larger period")->check(CLI::PositiveNumber);
    ident->add_option("--out", idf.out, "output directory")->required();

    std::string sample_model;
    std::string sample_out;
    int sample_T = 0;
    std::uint64_t sample_seed = 0;
    auto* smp = app.add_subcommand("sample", "Draw periods from a reciprocal model");
    smp->add_option("--model", sample_model, "model JSON")->required()->check(CLI::ExistingFile);
    smp->add_option("--T", sample_T, "number of periods")->required()->check(CLI::PositiveNumber);
    smp->add_option("--seed", sample_seed, "random seed")->required();
    smp->add_option("--out", sample_out, "dataset JSON")->required();

    std::string feas_band;
    int feas_n_max = 0;
    auto* feas = app.add_subcommand("feasibility", "Smallest N whose AR wrap is positive definite");
    feas->add_option("--band", feas_band, "band JSON")->required()->check(CLI::ExistingFile);
    feas->add_option("--n-max", feas_n_max, "largest N to scan")->check(CLI::PositiveNumber);

    std::string verify_model;
    std::string verify_cov;
    auto* ver = app.add_subcommand("verify", "Check that a model and a covariance are mutual inverses");
    ver->add_option("--model", verify_model, "model JSON")->required()->check(CLI::ExistingFile);
    ver->add_option("--cov", verify_cov, "covariance JSON")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_input;
    }

    try {
        if (extend->parsed()) {
            return run_extend(ext);
        }
        if (ident->parsed()) {
            return run_identify(idf);
        }
        if (smp->parsed()) {
            return run_sample(sample_model, sample_T, sample_seed, sample_out);
        }
        if (feas->parsed()) {
            return run_feasibility(feas_band, feas_n_max);
        }
        return run_verify(verify_model, verify_cov);
    } catch (const cmx::error& e) {
        std::cerr << "cmx: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "cmx: " << e.what() << "\n";
        return exit_input;
    }
}
