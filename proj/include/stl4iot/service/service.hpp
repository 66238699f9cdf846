#pragma once

// Live simulation service. One thread owns the Simulation; HTTP handlers only
// push onto the command queue and read published snapshots.

#include <chrono>
#include <condition_variable>
#include <deque>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "stl4iot/sim/simulation.hpp"

namespace stl4iot::service {

using sim::Json;

struct ServiceOptions {
  std::int64_t duration_ms = 60'000;  // virtual end of the session
  sim::Speed speed;                   // initial pacing
};

class Service {
 public:
  Service(std::unique_ptr<sim::Simulation> simulation, ServiceOptions opt)
      : sim_(std::move(simulation)), opt_(opt), speed_(opt.speed) {
    if (!sim_->started()) sim_->start();
    sim_->on_sample = [this](const sim::TelemetrySample& s) { pending_samples_.push_back(sim::to_json(s).dump()); };
    for (const auto& s : sim_->samples()) pending_samples_.push_back(sim::to_json(s).dump());
    catalog_ = sim::catalog_json(sim_->catalog()).dump();
    publish();
  }

  ~Service() { stop(); }
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  void start() {
    std::lock_guard lk(mu_);
    if (thread_.joinable()) return;
    running_ = true;
    thread_ = std::thread([this] { loop(); });
  }

  /// Ends the session early; pending commands fail with SimulationNotRunning.
  void stop() {
    {
      std::lock_guard lk(mu_);
      stop_requested_ = true;
    }
    cv_.notify_all();
    if (thread_.joinable()) thread_.join();
  }

  /// Blocks until the simulation has finished its virtual duration or was stopped.
  void wait() {
    std::unique_lock lk(mu_);
    done_cv_.wait(lk, [this] { return !running_ && finished_; });
  }

  /// Queues `cmd` for the next macro-step boundary and waits for the result.
  sim::CommandResult submit(const sim::Command& cmd) {
    std::future<Outcome> fut;
    {
      std::lock_guard lk(mu_);
      if (!running_) throw sim::CommandError(sim::CommandErrorKind::SimulationNotRunning, "simulation is not running");
      queue_.push_back({cmd, {}});
      fut = queue_.back().promise.get_future();
    }
    cv_.notify_all();
    auto out = fut.get();
    if (auto* e = std::get_if<std::exception_ptr>(&out)) std::rethrow_exception(*e);
    return std::get<sim::CommandResult>(out);
  }

  bool running() const {
    std::lock_guard lk(mu_);
    return running_;
  }

  std::string state_json() const {
    std::lock_guard lk(mu_);
    return state_;
  }

  const std::string& systems_json() const { return catalog_; }

  /// Samples with index >= `from`, waiting up to `timeout` for at least one.
  /// The bool is false once the session is over, so nothing more will come.
  std::pair<std::vector<std::string>, bool> samples_from(std::size_t from, std::chrono::milliseconds timeout) const {
    std::unique_lock lk(mu_);
    data_cv_.wait_for(lk, timeout, [&] { return samples_.size() > from || !running_; });
    std::vector<std::string> out;
    for (std::size_t i = from; i < samples_.size(); ++i) out.push_back(samples_[i]);
    return {out, running_};
  }

  std::size_t sample_count() const {
    std::lock_guard lk(mu_);
    return samples_.size();
  }

  std::vector<std::string> report_from(std::size_t from) const {
    std::lock_guard lk(mu_);
    std::vector<std::string> out;
    for (std::size_t i = from; i < report_.size(); ++i) out.push_back(report_[i]);
    return out;
  }

  /// The simulation, for writing result files once the loop has ended.
  const sim::Simulation& simulation() const {
    std::lock_guard lk(mu_);
    if (running_) throw sim::CommandError(sim::CommandErrorKind::SimulationNotRunning, "simulation still running");
    return *sim_;
  }

  /// Set when the loop ended on an engine error.
  std::optional<std::string> failure() const {
    std::lock_guard lk(mu_);
    return failure_;
  }

 private:
  using Outcome = std::variant<sim::CommandResult, std::exception_ptr>;
  struct Pending {
    sim::Command command;
    std::promise<Outcome> promise;
  };
  using Clock = std::chrono::steady_clock;

  void loop() {
    auto anchor_wall = Clock::now();
    std::int64_t anchor_virtual = sim_->now();
    auto virtual_at = [&](Clock::time_point w) {
      const double ms = std::chrono::duration<double, std::milli>(w - anchor_wall).count();
      return anchor_virtual + static_cast<std::int64_t>(ms * speed_.factor);
    };
    auto wall_at = [&](std::int64_t v) {
      const double ms = static_cast<double>(v - anchor_virtual) / speed_.factor;
      return anchor_wall + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double, std::milli>(ms));
    };
    try {
      for (;;) {
        const std::int64_t next = std::min(sim_->next_instant(), opt_.duration_ms);
        std::int64_t t = next;
        {
          std::unique_lock lk(mu_);
          if (stop_requested_) break;
          if (!speed_.max) {
            cv_.wait_until(lk, wall_at(next), [&] { return stop_requested_ || !queue_.empty(); });
            if (stop_requested_) break;
            if (!queue_.empty()) t = std::clamp(virtual_at(Clock::now()), sim_->now() + 1, next);
          }
        }
        if (t > sim_->now()) {
          const auto before = sim_->speed();
          sim_->step_to(t, [&] { drain(); });
          if (!(sim_->speed() == before)) {
            speed_ = sim_->speed();
            anchor_wall = Clock::now();
            anchor_virtual = sim_->now();
          }
          publish();
        }
        if (sim_->now() >= opt_.duration_ms) break;
      }
    } catch (const std::exception& e) {
      std::lock_guard lk(mu_);
      failure_ = e.what();
    }
    finish();
  }

  void drain() {
    std::deque<Pending> batch;
    {
      std::lock_guard lk(mu_);
      batch.swap(queue_);
    }
    for (auto& p : batch) {
      try {
        p.promise.set_value(sim_->apply(p.command));
      } catch (const sim::CommandError&) {
        p.promise.set_value(std::current_exception());
      }
    }
  }

  void publish() {
    auto snap = sim::to_json(sim_->snapshot()).dump();
    const auto& rep = sim_->report();
    std::lock_guard lk(mu_);
    state_ = std::move(snap);
    for (auto& s : pending_samples_) samples_.push_back(std::move(s));
    pending_samples_.clear();
    for (std::size_t i = report_.size(); i < rep.size(); ++i) report_.push_back(sim::format_entry(rep[i]));
    data_cv_.notify_all();
  }

  void finish() {
    std::deque<Pending> left;
    {
      std::lock_guard lk(mu_);
      running_ = false;
      finished_ = true;
      left.swap(queue_);
    }
    publish();
    for (auto& p : left)
      p.promise.set_value(std::make_exception_ptr(
          sim::CommandError(sim::CommandErrorKind::SimulationNotRunning, "simulation ended before the command was applied")));
    data_cv_.notify_all();
    done_cv_.notify_all();
  }

  std::unique_ptr<sim::Simulation> sim_;  // touched only by the loop thread once started
  ServiceOptions opt_;
  sim::Speed speed_;
  std::vector<std::string> pending_samples_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  mutable std::condition_variable data_cv_;
  std::condition_variable done_cv_;
  std::deque<Pending> queue_;
  bool running_ = false;
  bool finished_ = false;
  bool stop_requested_ = false;
  std::optional<std::string> failure_;
  std::string state_;
  std::string catalog_;
  std::vector<std::string> samples_;
  std::vector<std::string> report_;
  std::thread thread_;
};

}  // namespace stl4iot::service
