#pragma once

#include <stdexcept>
#include <string>

namespace forcelab {

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or mismatched input (length mismatch, bad digits, unknown label).
class input_error : public error {
public:
    using error::error;
};

// A stated precondition of an operation does not hold. `clause` names it.
class precondition_error : public error {
public:
    precondition_error(std::string clause, const std::string& what)
        : error(what), clause_(std::move(clause)) {}
    const std::string& clause() const noexcept { return clause_; }

private:
    std::string clause_;
};

class capacity_error : public error {
public:
    using error::error;
};

class budget_exceeded : public error {
public:
    using error::error;
};

class inapplicable_error : public error {
public:
    using error::error;
};

// Raised when a result that the mathematics guarantees fails to materialize.
class internal_inconsistency : public error {
public:
    using error::error;
};

class theorem_violation : public error {
public:
    using error::error;
};

class model_inconsistency : public error {
public:
    using error::error;
};

// Counts inspections against a fixed allowance.
class Budget {
public:
    explicit Budget(unsigned long long limit = 1000000ULL) : limit_(limit) {}

    void spend(unsigned long long n = 1, const char* what = "search") {
        used_ += n;
        if (used_ > limit_)
            throw budget_exceeded(std::string(what) + ": budget of " + std::to_string(limit_) +
                                  " inspections exceeded");
    }
    unsigned long long used() const noexcept { return used_; }
    unsigned long long limit() const noexcept { return limit_; }

private:
    unsigned long long limit_;
    unsigned long long used_ = 0;
};

}  // namespace forcelab
