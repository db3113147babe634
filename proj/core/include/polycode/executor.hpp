#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <vector>

#include "polycode/matrix.hpp"
#include "polycode/schemes.hpp"
#include "polycode/simkit.hpp"

namespace polycode {

/// Bounded multi-producer queue. close() wakes every blocked caller; push on
/// a closed channel drops the value and returns false.
template <typename T>
class Channel {
 public:
  explicit Channel(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

  bool push(T value) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(value));
    not_empty_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return v;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_full_.notify_all();
    not_empty_.notify_all();
  }

  /// Remaining items after close(); used to account late deliveries.
  std::size_t drain() {
    std::lock_guard lock(mu_);
    const std::size_t n = items_.size();
    items_.clear();
    return n;
  }

 private:
  std::size_t capacity_;
  std::mutex mu_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
  std::deque<T> items_;
  bool closed_ = false;
};

/// Per-computation delays for the executor. seconds_per_unit == 0 runs
/// without sleeping; otherwise worker i sleeps (nu + E_i) * seconds_per_unit
/// per computation with the same draws as the simulator for that seed.
struct DelayModel {
  SpeedModel speed;
  double seconds_per_unit = 0.0;
};

struct JobOptions {
  int parallelism = 0;  // concurrent workers, 0 = all
  std::uint64_t seed = 1;
  bool duplicate_points = false;  // every worker gets the same evaluation point
  std::size_t queue_capacity = 64;
};

struct WorkerTask {
  int worker = 0;
  std::vector<Block> a_blocks;  // m_A coded partitions
  std::vector<Block> b_blocks;  // m_B coded partitions
  std::vector<Cell> order;      // indices into a_blocks / b_blocks
  double unit_duration = 0.0;   // time units per computation
};

struct ResponseMessage {
  int worker = 0;
  int sequence = 0;
  Cell cell;
  Block payload;
};

struct ComputationStamp {
  int worker = 0;
  int sequence = 0;
  double start = 0.0;  // seconds since job start
  double finish = 0.0;
  bool delivered = false;
};

struct WorkerStats {
  int worker = 0;
  int capacity = 0;   // eta_i
  int delivered = 0;  // consumed by the master before stop
  int used = 0;       // contributed to the decode
};

struct JobReport {
  Scheme scheme = Scheme::BPC_VO;
  std::vector<WorkerStats> workers;
  int arrivals = 0;
  int used = 0;
  int discarded = 0;
  int ongoing_at_stop = 0;
  double realized_wasted_fraction = 0.0;
  double singular_value_ratio = 0.0;
  double condition_number = 0.0;
  double stop_time = 0.0;
  std::vector<ComputationStamp> stamps;
  std::vector<std::pair<int, int>> used_responses;  // (worker, sequence)
  std::vector<Cell> used_cells;                     // cell of each used response
  std::vector<Response> used_rows;                  // Hermite schemes only
};

struct JobResult {
  Block product;
  JobReport report;
};

/// Encodes A and B for every worker, runs the workers concurrently, stops
/// at the scheme's stop rule and decodes AB. LOWER-BOUND is not executable.
JobResult run_job(const Block& A, const Block& B, const SchemeConfig& cfg, const DelayModel& delay,
                  const JobOptions& options);

}  // namespace polycode
