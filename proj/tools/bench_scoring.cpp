// Times the per-round scoring kernel (all users x all candidates) in its
// serial and OpenMP variants and checks the outputs stay bitwise identical.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <vector>

#include "cab/scoring.hpp"

namespace {

using Clock = std::chrono::steady_clock;

Eigen::VectorXd random_context(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x[i] = unif(rng);
  return x / std::sqrt(static_cast<double>(d));  // norm <= 1 by construction
}

double time_ms(const std::function<void()>& fn, int reps) {
  const auto start = Clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto stop = Clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() /
         static_cast<double>(reps);
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 400;
  const int d = argc > 2 ? std::atoi(argv[2]) : 25;
  const int c = argc > 3 ? std::atoi(argv[3]) : 20;
  const int reps = argc > 4 ? std::atoi(argv[4]) : 20;
  if (n < 1 || d < 1 || c < 1 || reps < 1) {
    std::fprintf(stderr, "usage: bench_scoring [n] [d] [c] [reps]\n");
    return 2;
  }

  auto rng = cab::make_rng(7, 0xBE4C);
  std::vector<cab::CorrelationState> states;
  states.reserve(n);
  Eigen::MatrixXd proxies = Eigen::MatrixXd::Zero(n, d);
  std::uniform_real_distribution<double> payoff(-1.0, 1.0);
  for (int u = 0; u < n; ++u) {
    cab::CorrelationState st = cab::CorrelationState::new_identity(d);
    const int updates = 5 + u % 16;
    for (int k = 0; k < updates; ++k)
      st.rank_one_update(random_context(d, rng), payoff(rng));
    proxies.row(u) = st.proxy().transpose();
    states.push_back(std::move(st));
  }
  std::vector<cab::ContextVector> candidates;
  for (int k = 0; k < c; ++k) candidates.push_back({k, random_context(d, rng)});
  const std::vector<std::uint8_t> active(n, 1);
  cab::PolicyConfig cfg;

  cab::ScoreTable serial_table, parallel_table;
  serial_table.resize(n, c);
  parallel_table.resize(n, c);
  const auto score = [&](cab::ExecMode mode, cab::ScoreTable& out) {
    cab::score_all_users(states, proxies, candidates, 1000, cfg, n, active,
                         mode, out);
  };
  score(cab::ExecMode::serial, serial_table);    // warm-up
  score(cab::ExecMode::parallel, parallel_table);

  const double t_serial =
      time_ms([&] { score(cab::ExecMode::serial, serial_table); }, reps);
  const double t_parallel =
      time_ms([&] { score(cab::ExecMode::parallel, parallel_table); }, reps);

  const bool identical =
      std::memcmp(serial_table.proj.data(), parallel_table.proj.data(),
                  sizeof(double) * n * c) == 0 &&
      std::memcmp(serial_table.width.data(), parallel_table.width.data(),
                  sizeof(double) * n * c) == 0;

  std::printf("scoring kernel: n=%d d=%d c=%d reps=%d\n", n, d, c, reps);
  std::printf("  serial    %10.3f ms/round\n", t_serial);
  std::printf("  parallel  %10.3f ms/round\n", t_parallel);
  std::printf("  speedup   %10.2fx\n", t_serial / t_parallel);
  std::printf("  bitwise identical: %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
