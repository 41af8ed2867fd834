#pragma once

#include <stdexcept>
#include <string>

namespace cyto {

// Error taxonomy mirrored by the CLI exit codes:
//   config 2, data 3, training 4, io 5.
enum class ErrorClass { config, data, training, io };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& msg)
        : std::runtime_error(msg), cls_(cls) {}

    ErrorClass error_class() const noexcept { return cls_; }

    const char* class_name() const noexcept {
        switch (cls_) {
        case ErrorClass::config: return "config";
        case ErrorClass::data: return "data";
        case ErrorClass::training: return "training";
        case ErrorClass::io: return "io";
        }
        return "unknown";
    }

    int exit_code() const noexcept {
        switch (cls_) {
        case ErrorClass::config: return 2;
        case ErrorClass::data: return 3;
        case ErrorClass::training: return 4;
        case ErrorClass::io: return 5;
        }
        return 1;
    }

private:
    ErrorClass cls_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(ErrorClass::config, msg) {}
};

struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(ErrorClass::data, msg) {}
};

struct TrainingError : Error {
    explicit TrainingError(const std::string& msg) : Error(ErrorClass::training, msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(ErrorClass::io, msg) {}
};

} // namespace cyto
