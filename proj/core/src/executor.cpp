#include "polycode/executor.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <semaphore>
#include <string>
#include <thread>

#include "polycode/encoding.hpp"
#include "polycode/interp.hpp"

namespace polycode {

namespace {

using Clock = std::chrono::steady_clock;

struct Encoded {
  std::vector<WorkerTask> tasks;
  // evaluation points, per scheme family
  std::vector<std::vector<double>> upc_points;  // per worker, per stored index
  std::vector<EvalPoint> hermite_points;        // per worker
  std::vector<double> grid_x;
  std::vector<double> grid_y;
};

std::vector<double> chebyshev_nodes(std::size_t n, std::mt19937_64& rng) {
  std::vector<double> nodes(n);
  for (std::size_t t = 0; t < n; ++t) {
    nodes[t] = std::cos((2.0 * static_cast<double>(t) + 1.0) * std::numbers::pi / (2.0 * static_cast<double>(n)));
  }
  std::shuffle(nodes.begin(), nodes.end(), rng);
  return nodes;
}

Encoded encode(const Partitions& parts, const SchemeConfig& cfg, const DelayModel& delay,
               const JobOptions& opt) {
  std::mt19937_64 speed_rng(opt.seed);
  std::mt19937_64 point_rng(derive_seed(opt.seed, 0x5eed));
  Encoded enc;
  const int N = cfg.workers;
  enc.tasks.resize(static_cast<std::size_t>(N));
  for (int w = 0; w < N; ++w) {
    auto& task = enc.tasks[static_cast<std::size_t>(w)];
    task.worker = w;
    task.unit_duration = sample_worker_speed(delay.speed, speed_rng);
  }
  // B-PROC orders draw from the same stream as the simulator
  for (int w = 0; w < N; ++w) {
    enc.tasks[static_cast<std::size_t>(w)].order = computation_order(cfg, w, &speed_rng);
  }

  switch (cfg.scheme) {
    case Scheme::UPC:
    case Scheme::UPC_PC: {
      std::size_t total = 0;
      for (const auto& st : cfg.storage) total += static_cast<std::size_t>(st.m_a);
      auto nodes = chebyshev_nodes(total, point_rng);
      if (opt.duplicate_points) std::fill(nodes.begin(), nodes.end(), nodes.front());
      std::size_t at = 0;
      enc.upc_points.resize(static_cast<std::size_t>(N));
      for (int w = 0; w < N; ++w) {
        auto& task = enc.tasks[static_cast<std::size_t>(w)];
        for (int j = 0; j < cfg.storage[static_cast<std::size_t>(w)].m_a; ++j) {
          const double x = nodes[at++];
          enc.upc_points[static_cast<std::size_t>(w)].push_back(x);
          task.a_blocks.push_back(eval_poly_A(parts.a, x, 0).payload);
          task.b_blocks.push_back(eval_upc_B(parts.b, x, cfg.plan.K).payload);
        }
      }
      break;
    }
    case Scheme::B_PROC: {
      const Storage st = cfg.storage.front();
      enc.grid_x = chebyshev_nodes(static_cast<std::size_t>(cfg.n_a * st.m_a), point_rng);
      enc.grid_y = chebyshev_nodes(static_cast<std::size_t>(cfg.n_b * st.m_b), point_rng);
      if (opt.duplicate_points) {
        std::fill(enc.grid_x.begin(), enc.grid_x.end(), enc.grid_x.front());
        std::fill(enc.grid_y.begin(), enc.grid_y.end(), enc.grid_y.front());
      }
      for (int w = 0; w < N; ++w) {
        auto& task = enc.tasks[static_cast<std::size_t>(w)];
        const int a = w / cfg.n_b;
        const int b = w % cfg.n_b;
        for (int k = 0; k < st.m_a; ++k) {
          task.a_blocks.push_back(eval_poly_A(parts.a, enc.grid_x[static_cast<std::size_t>(a * st.m_a + k)], 0).payload);
        }
        for (int l = 0; l < st.m_b; ++l) {
          task.b_blocks.push_back(eval_poly_B(parts.b, enc.grid_y[static_cast<std::size_t>(b * st.m_b + l)], 0).payload);
        }
      }
      break;
    }
    case Scheme::BPC_VO:
    case Scheme::BPC_HO:
    case Scheme::BPC_NZO:
    case Scheme::BPC_ZZO: {
      auto xs = sample_stratified(static_cast<std::size_t>(N), point_rng);
      auto ys = sample_stratified(static_cast<std::size_t>(N), point_rng);
      if (opt.duplicate_points) {
        std::fill(xs.begin(), xs.end(), xs.front());
        std::fill(ys.begin(), ys.end(), ys.front());
      }
      for (int w = 0; w < N; ++w) {
        auto& task = enc.tasks[static_cast<std::size_t>(w)];
        const Storage st = cfg.storage[static_cast<std::size_t>(w)];
        const EvalPoint p{xs[static_cast<std::size_t>(w)], ys[static_cast<std::size_t>(w)]};
        enc.hermite_points.push_back(p);
        for (int k = 0; k < st.m_a; ++k) task.a_blocks.push_back(eval_poly_A(parts.a, p.x, k).payload);
        for (int l = 0; l < st.m_b; ++l) task.b_blocks.push_back(eval_poly_B(parts.b, p.y, l).payload);
      }
      break;
    }
    case Scheme::LOWER_BOUND:
      throw ConfigError("LOWER-BOUND is a simulation-only pseudo-scheme");
  }
  return enc;
}

}  // namespace

JobResult run_job(const Block& A, const Block& B, const SchemeConfig& cfg, const DelayModel& delay,
                  const JobOptions& options) {
  validate(cfg);
  if (cfg.scheme == Scheme::LOWER_BOUND) {
    throw ConfigError("LOWER-BOUND is a simulation-only pseudo-scheme");
  }
  const Partitions parts = partition(A, B, cfg.plan);
  const Encoded enc = encode(parts, cfg, delay, options);
  const int N = cfg.workers;
  const int K = cfg.K();
  const int L = cfg.L();
  const int KL = K * L;

  StopRule rule(cfg);
  std::int64_t capacity = 0;
  for (const auto& t : enc.tasks) capacity += static_cast<std::int64_t>(t.order.size());
  if (auto fixed = fixed_stop_count(cfg); fixed && capacity < *fixed) {
    throw CapacityError("workers can deliver " + std::to_string(capacity) + " computations, " +
                        std::to_string(*fixed) + " required");
  }

  Channel<ResponseMessage> channel(options.queue_capacity);
  std::atomic<bool> stop{false};
  std::atomic<int> running{N};
  const int parallelism = options.parallelism > 0 ? std::min(options.parallelism, N) : N;
  std::counting_semaphore<> slots(parallelism);
  std::vector<std::vector<ComputationStamp>> stamps(static_cast<std::size_t>(N));
  const auto epoch = Clock::now();
  auto seconds_since = [&](Clock::time_point t) {
    return std::chrono::duration<double>(t - epoch).count();
  };

  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(N));
  for (int w = 0; w < N; ++w) {
    threads.emplace_back([&, w] {
      const WorkerTask& task = enc.tasks[static_cast<std::size_t>(w)];
      auto& log = stamps[static_cast<std::size_t>(w)];
      slots.acquire();
      const auto begin = Clock::now();
      const auto per = std::chrono::duration<double>(task.unit_duration * delay.seconds_per_unit);
      for (std::size_t seq = 0; seq < task.order.size(); ++seq) {
        if (stop.load(std::memory_order_acquire)) break;
        ComputationStamp st{w, static_cast<int>(seq), seconds_since(Clock::now()), 0.0, false};
        if (delay.seconds_per_unit > 0.0) {
          std::this_thread::sleep_until(
              begin + std::chrono::duration_cast<Clock::duration>(per * static_cast<double>(seq + 1)));
        }
        const Cell c = task.order[seq];
        Block payload = task.a_blocks[static_cast<std::size_t>(c.k)] * task.b_blocks[static_cast<std::size_t>(c.l)];
        st.finish = seconds_since(Clock::now());
        if (stop.load(std::memory_order_acquire)) {
          log.push_back(st);
          break;
        }
        st.delivered = channel.push({w, static_cast<int>(seq), c, std::move(payload)});
        log.push_back(st);
        if (!st.delivered) break;
      }
      slots.release();
      if (running.fetch_sub(1) == 1) channel.close();
    });
  }

  std::vector<ResponseMessage> received;
  int stopper = -1;
  double stop_time = 0.0;
  while (auto msg = channel.pop()) {
    const int w = msg->worker;
    const Cell c = msg->cell;
    received.push_back(std::move(*msg));
    if (rule.on_arrival(w, c)) {
      stop.store(true, std::memory_order_release);
      stop_time = seconds_since(Clock::now());
      stopper = w;
      channel.close();
      break;
    }
  }
  for (auto& t : threads) t.join();
  const int late = static_cast<int>(channel.drain());

  JobReport rep;
  rep.scheme = cfg.scheme;
  rep.stop_time = stop_time;
  rep.arrivals = static_cast<int>(received.size());
  for (auto& log : stamps) rep.stamps.insert(rep.stamps.end(), log.begin(), log.end());
  rep.workers.resize(static_cast<std::size_t>(N));
  for (int w = 0; w < N; ++w) {
    rep.workers[static_cast<std::size_t>(w)] = {w, static_cast<int>(enc.tasks[static_cast<std::size_t>(w)].order.size()), 0, 0};
  }
  for (const auto& m : received) ++rep.workers[static_cast<std::size_t>(m.worker)].delivered;
  if (!rule.done()) {
    throw CapacityError("all computations delivered without reaching decodability");
  }

  DecodeResult dec;
  switch (cfg.scheme) {
    case Scheme::UPC:
    case Scheme::UPC_PC: {
      std::vector<double> pts;
      std::vector<Block> payloads;
      for (const auto& m : received) {
        pts.push_back(enc.upc_points[static_cast<std::size_t>(m.worker)][static_cast<std::size_t>(m.cell.k)]);
        payloads.push_back(m.payload);
        rep.used_responses.emplace_back(m.worker, m.sequence);
        rep.used_cells.push_back(m.cell);
      }
      try {
        dec = decode_univariate(pts, payloads, K, L);
      } catch (const DuplicateRowError& e) {
        throw SingularSystemError(e.what(), 0.0);
      }
      break;
    }
    case Scheme::B_PROC: {
      const auto cols = enc.grid_x.size();
      const auto rows = enc.grid_y.size();
      std::vector<std::optional<Block>> values(cols * rows);
      for (const auto& m : received) {
        const auto [col, row] = rule.grid_cell(m.worker, m.cell);
        values[static_cast<std::size_t>(col) * rows + static_cast<std::size_t>(row)] = m.payload;
        rep.used_responses.emplace_back(m.worker, m.sequence);
        rep.used_cells.push_back(m.cell);
      }
      dec = decode_bproc(enc.grid_x, enc.grid_y, std::move(values), K, L);
      break;
    }
    default: {
      std::vector<DerivativeSet> sets(static_cast<std::size_t>(N));
      std::vector<std::vector<const ResponseMessage*>> by_worker(static_cast<std::size_t>(N));
      for (int w = 0; w < N; ++w) sets[static_cast<std::size_t>(w)].point = enc.hermite_points[static_cast<std::size_t>(w)];
      for (const auto& m : received) {
        sets[static_cast<std::size_t>(m.worker)].orders.push_back(m.cell);
        by_worker[static_cast<std::size_t>(m.worker)].push_back(&m);
      }
      const Selection sel = select_responses(sets, cfg.scheme, K, L, cfg.mu_a, cfg.mu_b);
      if (!sel.complete) {
        throw SingularSystemError("discard policy left fewer than K*L usable computations", 0.0);
      }
      std::vector<Block> payloads;
      for (const auto& [set, pos] : sel.source) {
        const ResponseMessage* m = by_worker[static_cast<std::size_t>(set)][static_cast<std::size_t>(pos)];
        payloads.push_back(m->payload);
        rep.used_responses.emplace_back(m->worker, m->sequence);
        rep.used_cells.push_back(m->cell);
      }
      rep.used_rows = sel.retained;
      InterpolationSystem sys;
      try {
        sys = build_interpolation_matrix(sel.retained, K, L);
      } catch (const DuplicateRowError& e) {
        throw SingularSystemError(e.what(), 0.0);
      }
      dec = decode_bivariate(sys, payloads);
      break;
    }
  }

  for (const auto& [w, seq] : rep.used_responses) {
    (void)seq;
    ++rep.workers[static_cast<std::size_t>(w)].used;
  }
  rep.used = KL;
  rep.discarded = rep.arrivals - KL;
  int aborted = 0;
  for (const auto& s : rep.stamps) {
    if (!s.delivered) ++aborted;
  }
  (void)stopper;
  rep.ongoing_at_stop = aborted + late;
  rep.realized_wasted_fraction = static_cast<double>(rep.discarded + rep.ongoing_at_stop) / KL;
  rep.singular_value_ratio = dec.singular_value_ratio;
  rep.condition_number = dec.condition_number;
  return {assemble_product(dec.coefficients, cfg.plan), std::move(rep)};
}

}  // namespace polycode
