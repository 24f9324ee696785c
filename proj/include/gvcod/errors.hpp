#ifndef GVCOD_ERRORS_HPP_
#define GVCOD_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <utility>

namespace gvcod {

// Every failure surfaced by the library carries a short machine-readable
// code plus a human-readable detail. The CLI prints them as
// "error: <code>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(std::string code, std::string detail)
      : std::runtime_error(code + ": " + detail),
        code_(std::move(code)),
        detail_(std::move(detail)) {}

  const std::string& code() const { return code_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string code_;
  std::string detail_;
};

[[noreturn]] inline void fail(std::string code, std::string detail) {
  throw Error(std::move(code), std::move(detail));
}

}  // namespace gvcod

#endif  // GVCOD_ERRORS_HPP_
