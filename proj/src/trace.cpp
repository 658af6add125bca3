#include "saferl/trace.hpp"

#include <charconv>
#include <stdexcept>
#include <system_error>

namespace saferl {

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

void TraceSink::check_record(const StepRecord& record) {
  for (Eigen::Index i = 0; i < record.lambda.size(); ++i)
    if (!(record.lambda[i] >= 0.0))
      throw std::logic_error("trace: negative or non-finite multiplier recorded");
}

CsvTraceSink::CsvTraceSink(std::ostream& out, std::size_t num_constraints)
    : out_(out), m_(num_constraints) {
  out_ << "# trace-format-version: " << kTraceFormatVersion << "\n";
  out_ << "type,iteration";
  for (std::size_t i = 1; i <= m_; ++i) out_ << ",lambda_" << i;
  for (std::size_t i = 1; i <= m_; ++i) out_ << ",u_hat_" << i;
  out_ << ",lagrangian_return,plain_return,steps";
  for (std::size_t i = 1; i <= m_; ++i) out_ << ",safety_" << i;
  for (std::size_t i = 1; i <= m_; ++i) out_ << ",safety_sd_" << i;
  out_ << ",reward_per_step,reward_per_step_sd\n";
}

void CsvTraceSink::on_step(const StepRecord& record) {
  check_record(record);
  if (static_cast<std::size_t>(record.lambda.size()) != m_ ||
      static_cast<std::size_t>(record.u_hat.size()) != m_)
    throw std::invalid_argument("trace: step record has the wrong constraint count");
  out_ << "step," << record.iteration;
  for (Eigen::Index i = 0; i < record.lambda.size(); ++i)
    out_ << ',' << format_double(record.lambda[i]);
  for (Eigen::Index i = 0; i < record.u_hat.size(); ++i)
    out_ << ',' << format_double(record.u_hat[i]);
  out_ << ',' << format_double(record.lagrangian_return) << ','
       << format_double(record.plain_return) << ',' << format_double(record.steps);
  for (std::size_t i = 0; i < 2 * m_ + 2; ++i) out_ << ',';
  out_ << '\n';
}

void CsvTraceSink::on_eval(const EvalRecord& record) {
  if (static_cast<std::size_t>(record.safety_mean.size()) != m_ ||
      static_cast<std::size_t>(record.safety_sd.size()) != m_)
    throw std::invalid_argument("trace: eval record has the wrong constraint count");
  out_ << "eval," << record.iteration;
  for (std::size_t i = 0; i < 2 * m_ + 3; ++i) out_ << ',';
  for (Eigen::Index i = 0; i < record.safety_mean.size(); ++i)
    out_ << format_double(record.safety_mean[i]) << ',';
  for (Eigen::Index i = 0; i < record.safety_sd.size(); ++i)
    out_ << format_double(record.safety_sd[i]) << ',';
  out_ << format_double(record.reward_per_step_mean) << ','
       << format_double(record.reward_per_step_sd) << '\n';
}

}  // namespace saferl
