#pragma once

#include <stdexcept>
#include <string>

namespace botstack {

// Every failure raised by the library derives from Error. The subclasses
// mirror the error kinds the public operations document, so callers (and
// the CLI exit-code mapping) can dispatch on category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class UsageError : public Error { using Error::Error; };
class TapeError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class ValidationError : public Error { using Error::Error; };
class SchemaError : public Error { using Error::Error; };
class ConsistencyError : public Error { using Error::Error; };
class FoldError : public Error { using Error::Error; };
class IntegrityError : public Error { using Error::Error; };
class VersionError : public Error { using Error::Error; };
class UndefinedMetricError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };

// Raised for non-finite values during training or optimisation. The CLI
// maps this category (and only this one) to exit code 3.
class NumericError : public Error { using Error::Error; };

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

inline std::string in_context(const std::string& context, const char* what) {
  const std::string w = what;
  return w.rfind(context, 0) == 0 ? w : context + ": " + w;
}

/// Runs `body`; an Error escaping it is rethrown as the same category with
/// `context` prepended to the message (unless it already starts with it).
template <class F>
auto with_context(const std::string& context, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const NumericError& e) {
    throw NumericError(in_context(context, e.what()));
  } catch (const UsageError& e) {
    throw UsageError(in_context(context, e.what()));
  } catch (const ConfigError& e) {
    throw ConfigError(in_context(context, e.what()));
  } catch (const ValidationError& e) {
    throw ValidationError(in_context(context, e.what()));
  } catch (const DimensionError& e) {
    throw DimensionError(in_context(context, e.what()));
  } catch (const FoldError& e) {
    throw FoldError(in_context(context, e.what()));
  } catch (const DomainError& e) {
    throw DomainError(in_context(context, e.what()));
  }
}

}  // namespace botstack
