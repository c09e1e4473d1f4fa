#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "barrier/amplitude.hpp"
#include "barrier/cross_section.hpp"
#include "barrier/dynamics.hpp"
#include "barrier/manifolds.hpp"
#include "barrier/oscillatory.hpp"
#include "barrier/quasimode.hpp"
#include "barrier/transport.hpp"

using namespace barrier;

namespace {

PotentialModel cubic_model() {
  Eigen::MatrixXd Q(2, 2);
  Q << 1, 0, 0, 4;
  return PotentialModel::gaussian_plus_cubic(0.5, Q, {{MultiIndex{2, 1}, 0.1}});
}

void BM_EikonalTaylor(benchmark::State& state) {
  const auto frame = diagonal_frame(cubic_model(), 10);
  const int N = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(eikonal_taylor(frame, N));
}
BENCHMARK(BM_EikonalTaylor)->Arg(4)->Arg(6)->Arg(8)->Arg(10);

void BM_TransportAnalysis(benchmark::State& state) {
  const auto frame = diagonal_frame(cubic_model(), 6);
  const auto phi = eikonal_taylor(frame, 6);
  const double mu = 2.0 * frame.spec.lambda1();
  for (auto _ : state) benchmark::DoNotOptimize(analyze_transport(phi, mu, 6));
}
BENCHMARK(BM_TransportAnalysis);

void BM_FlowGaussian(benchmark::State& state) {
  const auto m = PotentialModel::gaussian(0.5, 2);
  PhasePoint s;
  s.x = Eigen::Vector2d(-4.0, 0.3);
  s.xi = Eigen::Vector2d(1.1, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(flow(m, s, 0.0, 10.0, {}, {10.0}));
}
BENCHMARK(BM_FlowGaussian);

void BM_VariationalFlowGaussian(benchmark::State& state) {
  const auto m = PotentialModel::gaussian(0.5, 2);
  PhasePoint s;
  s.x = Eigen::Vector2d(-4.0, 0.3);
  s.xi = Eigen::Vector2d(1.1, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(variational_flow(m, s, 0.0, 10.0, {}, {10.0}));
}
BENCHMARK(BM_VariationalFlowGaussian);

void BM_TrappedRadial(benchmark::State& state) {
  const auto m = PotentialModel::gaussian(0.5, 2);
  const auto frame = diagonal_frame(m, 6);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        analyze_trapped(m, frame, Eigen::Vector2d(1, 0), Side::Incoming, Eigen::VectorXd::Zero(2)));
}
BENCHMARK(BM_TrappedRadial)->Unit(benchmark::kMillisecond);

void BM_CrossSection(benchmark::State& state) {
  const auto m = PotentialModel::gaussian(0.5, 2);
  const double h = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(total_cross_section(m, Eigen::Vector2d(1, 0), 0.5, h));
}
BENCHMARK(BM_CrossSection)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_OscillatoryIntegral(benchmark::State& state) {
  const double lambda = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(oscillatory_integral(lambda, 0.5, 1.0));
}
BENCHMARK(BM_OscillatoryIntegral)->Arg(1000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_QuasimodeNorms(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(quasimode_norms({1.0}, 1e-3));
}
BENCHMARK(BM_QuasimodeNorms)->Unit(benchmark::kMillisecond);

void BM_GammaIdentity(benchmark::State& state) {
  std::vector<double> z;
  for (int k = 0; k <= 100; ++k) z.push_back(-5.0 + 0.1 * k);
  for (auto _ : state) benchmark::DoNotOptimize(gamma_factor_identity_check(1.0, z));
}
BENCHMARK(BM_GammaIdentity);

}  // namespace

BENCHMARK_MAIN();
