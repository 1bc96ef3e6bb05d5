#ifndef HIERVIS_ERROR_HPP
#define HIERVIS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hiervis {

// All domain failures are thrown as Error with a short machine-checkable
// category ("schema", "parse", "duplicate", "coverage", "config", "numeric",
// "io", "domain") followed by a human-readable message.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(category + ": " + message),
        category_(std::move(category)) {}

  const std::string& category() const { return category_; }

 private:
  std::string category_;
};

[[noreturn]] inline void fail(const std::string& category,
                              const std::string& message) {
  throw Error(category, message);
}

}  // namespace hiervis

#endif  // HIERVIS_ERROR_HPP
