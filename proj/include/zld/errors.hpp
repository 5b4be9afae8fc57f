#pragma once

#include <stdexcept>
#include <string>

namespace zld {

// invalid argument for a mathematical operation
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// bad user configuration; cli maps this to exit code 2
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// a cap or representable range was exceeded; exit code 3
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// an identity that must hold exactly did not
class ConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace zld
