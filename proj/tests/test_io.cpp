#include <cstring>
#include <random>

#include <gtest/gtest.h>

#include "cmx/io.hpp"
#include "oracles.hpp"

using namespace cmx;

namespace {

bool bit_equal(const Matrix& a, const Matrix& b)
{
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

template <class F>
void expect_input_error(F&& f)
{
    try {
        f();
        FAIL() << "expected an input error";
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::input) << e.what();
    }
}

} // namespace

TEST(Io, RealsUseSeventeenSignificantDigits)
{
    const std::string s = io::dump(io::json::array({0.1, 1.0 / 3.0, -2.5e-300}), 0);
    EXPECT_EQ(s, "[1.0000000000000001e-01, 3.3333333333333331e-01, -2.5000000000000000e-300]");
    EXPECT_EQ(io::dump(io::json{{"a", 1}, {"b", "x"}}, 0), "{\"a\":1,\"b\":\"x\"}");
}

TEST(Io, BandCirculantModelAndDatasetRoundTripBitExactly)
{
    std::mt19937_64 rng(61);
    const auto inst = oracle::random_feasible(rng, 3, 2, 9);
    const CovBand band = io::band_from_json(io::parse(io::dump(io::to_json(inst.band))));
    for (int k = 0; k <= 2; ++k) {
        EXPECT_TRUE(bit_equal(band.sigma[k], inst.band.sigma[k]));
    }

    const BlockCirculant c = io::circulant_from_json(io::parse(io::dump(io::to_json(inst.generator))));
    for (int k = 0; k < 9; ++k) {
        EXPECT_TRUE(bit_equal(c.block(k), inst.generator.block(k)));
    }

    const ReciprocalModel model = oracle::random_model(rng, 2, 2, 7);
    const ReciprocalModel back = io::model_from_json(io::parse(io::dump(io::to_json(model))));
    EXPECT_EQ(back.N, 7);
    for (int k = 0; k <= 2; ++k) {
        EXPECT_TRUE(bit_equal(back.M[k], model.M[k]));
    }

    const Dataset data = sample(model, 3, 5);
    const Dataset data_back = io::dataset_from_json(io::parse(io::dump(io::to_json(data))));
    ASSERT_EQ(data_back.T(), 3);
    for (int r = 0; r < 3; ++r) {
        EXPECT_TRUE(bit_equal(data_back.realizations[r], data.realizations[r]));
    }
}

TEST(Io, DatasetRowsAreTimeMajor)
{
    const Dataset data = io::dataset_from_json(
        io::parse(R"({"m": 2, "N": 2, "T": 1, "realizations": [[1, 2, 3, 4]]})"));
    EXPECT_EQ(data.realizations[0](0, 0), 1.0);
    EXPECT_EQ(data.realizations[0](1, 0), 2.0);
    EXPECT_EQ(data.realizations[0](0, 1), 3.0);
}

TEST(Io, MalformedDocumentsAreInputErrors)
{
    expect_input_error([] { io::parse("{\"m\": 1,"); });
    expect_input_error([] { io::band_from_json(io::parse(R"({"m": 1, "sigma": [[1]]})")); });
    expect_input_error([] { io::band_from_json(io::parse(R"({"m": 1, "n": 1, "sigma": [[1]]})")); });
    expect_input_error([] { io::band_from_json(io::parse(R"({"m": 2, "n": 0, "sigma": [[1, 2, 3]]})")); });
    expect_input_error([] { io::band_from_json(io::parse(R"({"m": 1, "n": 0, "sigma": [["a"]]})")); });
    expect_input_error([] { io::band_from_json(io::parse(R"({"m": 1.5, "n": 0, "sigma": [[1]]})")); });
    expect_input_error([] { io::dataset_from_json(io::parse(R"({"m": 1, "N": 2, "T": 2, "realizations": [[1, 2]]})")); });
    expect_input_error([] { io::read_file("/nonexistent/cmx/band.json"); });
}

TEST(Io, DiagnosticsCarryTracesAndCertificate)
{
    SolverDiagnostics d;
    d.status = "infeasible";
    d.objective = {1.0, 0.5};
    d.certificate = InfeasibilityCertificate{"divergence", -0.2, 0.0, false, -0.4, 4};
    const io::json j = io::parse(io::dump(io::to_json(d)));
    EXPECT_EQ(j["status"], "infeasible");
    EXPECT_EQ(j["objective"].size(), 2u);
    EXPECT_EQ(j["certificate"]["smallest_feasible_N"], 4);
    EXPECT_DOUBLE_EQ(j["certificate"]["ray_pairing"].get<double>(), -0.2);
}
