#ifndef CFPO_ERRORS_HPP_
#define CFPO_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace cfpo {

// |log p_cur - log p_old| (or the reference-KL log gap) exceeded the
// overflow guard. Signals degenerate policy divergence; the trainer turns
// this into a recorded collapse instead of letting ratios go infinite.
class RatioOverflowError : public std::runtime_error {
 public:
  RatioOverflowError(double log_gap, long response_index, long token_index,
                     const std::string& what)
      : std::runtime_error(what),
        log_gap_(log_gap),
        response_index_(response_index),
        token_index_(token_index) {}

  double log_gap() const { return log_gap_; }
  long response_index() const { return response_index_; }
  long token_index() const { return token_index_; }

 private:
  double log_gap_;
  long response_index_;  // -1 when not attributable to a batch position
  long token_index_;
};

// Config-file problem with an optional line reference.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                    : message),
        line_(line) {}

  explicit ConfigError(const std::string& message) : ConfigError(0, message) {}

  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace cfpo

#endif  // CFPO_ERRORS_HPP_
