#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace saferl {

inline constexpr int kTraceFormatVersion = 1;

// One optimizer iteration. lambda is the multiplier vector after this
// iteration's dual update; steps is the batch-mean trajectory length, which
// normalizes the returns to per-step units.
struct StepRecord {
  std::int64_t iteration = 0;
  Eigen::VectorXd lambda;
  Eigen::VectorXd u_hat;
  double lagrangian_return = 0.0;
  double plain_return = 0.0;
  double steps = 0.0;
};

// One evaluation block (joint safety per constraint plus normalized reward).
struct EvalRecord {
  std::int64_t iteration = 0;
  Eigen::VectorXd safety_mean;
  Eigen::VectorXd safety_sd;
  double reward_per_step_mean = 0.0;
  double reward_per_step_sd = 0.0;
};

class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void on_step(const StepRecord& record) = 0;
  virtual void on_eval(const EvalRecord& record) = 0;

 protected:
  // Every sink rejects negative multipliers; a violation here is a bug in
  // the optimizer, not in the caller.
  static void check_record(const StepRecord& record);
};

class MemoryTraceSink final : public TraceSink {
 public:
  void on_step(const StepRecord& record) override {
    check_record(record);
    steps.push_back(record);
  }
  void on_eval(const EvalRecord& record) override { evals.push_back(record); }

  std::vector<StepRecord> steps;
  std::vector<EvalRecord> evals;
};

// Delimiter-separated trace with a format-version comment line, a header
// row, and one row per iteration or evaluation block. Step rows carry the
// optimizer columns, eval rows the evaluation columns; unused cells stay
// empty. Doubles are written in shortest round-trip form.
class CsvTraceSink final : public TraceSink {
 public:
  CsvTraceSink(std::ostream& out, std::size_t num_constraints);
  void on_step(const StepRecord& record) override;
  void on_eval(const EvalRecord& record) override;

 private:
  std::ostream& out_;
  std::size_t m_;
};

// Forwards to several sinks (e.g. file plus in-memory for tests).
class TeeTraceSink final : public TraceSink {
 public:
  explicit TeeTraceSink(std::vector<TraceSink*> sinks) : sinks_(std::move(sinks)) {}
  void on_step(const StepRecord& record) override {
    for (auto* s : sinks_) s->on_step(record);
  }
  void on_eval(const EvalRecord& record) override {
    for (auto* s : sinks_) s->on_eval(record);
  }

 private:
  std::vector<TraceSink*> sinks_;
};

// Shortest representation that parses back to the identical double.
std::string format_double(double value);

}  // namespace saferl
