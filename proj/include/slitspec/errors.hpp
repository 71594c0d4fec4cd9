#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace slitspec {

/// Error taxonomy shared with the CLI exit codes:
/// 1 = numeric check failed, 2 = bad usage/input, 3 = resource/convergence.
class Error : public std::runtime_error {
public:
    enum class Code { Numeric = 1, Usage = 2, Resource = 3 };

    Error(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const { return code_; }
    int exit_code() const { return static_cast<int>(code_); }

private:
    Code code_;
};

class InvalidCrackError : public Error {
public:
    explicit InvalidCrackError(const std::string& what)
        : Error(Code::Usage, "invalid crack: " + what) {}
};

class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(Code::Usage, what) {}
};

class RangeError : public Error {
public:
    explicit RangeError(const std::string& what) : Error(Code::Usage, what) {}
};

class DegenerateInputError : public Error {
public:
    explicit DegenerateInputError(const std::string& what) : Error(Code::Usage, what) {}
};

/// Evaluation requested on the crack closure without a side flag.
class BranchError : public Error {
public:
    explicit BranchError(const std::string& what) : Error(Code::Usage, what) {}
};

class AssemblyError : public Error {
public:
    explicit AssemblyError(const std::string& what) : Error(Code::Numeric, what) {}
};

class QuadratureError : public Error {
public:
    explicit QuadratureError(const std::string& what) : Error(Code::Resource, what) {}
};

class ResourceError : public Error {
public:
    explicit ResourceError(const std::string& what) : Error(Code::Resource, what) {}
};

/// Eigensolver ran out of its iteration budget. Carries the best residuals
/// reached so the caller can decide whether they are usable.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::vector<double> best_residuals)
        : Error(Code::Resource, what), best_residuals_(std::move(best_residuals)) {}
    const std::vector<double>& best_residuals() const { return best_residuals_; }

private:
    std::vector<double> best_residuals_;
};

} // namespace slitspec
