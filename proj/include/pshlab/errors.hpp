#pragma once

#include <stdexcept>
#include <string>

namespace pshlab {

// Base class for all library failures. Every subtype carries enough state to
// reproduce the failing call in a report.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ParameterError : public Error {
public:
    explicit ParameterError(const std::string& msg) : Error("parameter: " + msg) {}
};

class NormalizationError : public Error {
public:
    NormalizationError(const std::string& msg, double measured)
        : Error("normalization: " + msg + " (measured " + std::to_string(measured) + ")"),
          measured_(measured) {}
    double measured() const { return measured_; }
private:
    double measured_;
};

class NonConvergence : public Error {
public:
    NonConvergence(const std::string& where, int iterations, double residual)
        : Error("no convergence in " + where + " after " + std::to_string(iterations) +
                " iterations, residual " + std::to_string(residual)),
          iterations_(iterations), residual_(residual) {}
    int iterations() const { return iterations_; }
    double residual() const { return residual_; }
private:
    int iterations_;
    double residual_;
};

class LossOfPositivity : public Error {
public:
    LossOfPositivity(const std::string& where, double lambda_min)
        : Error("positivity lost in " + where + ", lambda_min " + std::to_string(lambda_min)),
          lambda_min_(lambda_min) {}
    double lambda_min() const { return lambda_min_; }
private:
    double lambda_min_;
};

class PositivityViolation : public Error {
public:
    explicit PositivityViolation(const std::string& msg) : Error("positivity: " + msg) {}
};

class ZeroMass : public Error {
public:
    explicit ZeroMass(const std::string& msg) : Error("zero mass: " + msg) {}
};

// A density construction produced no usable total mass to rescale.
class NonNormalizable : public Error {
public:
    explicit NonNormalizable(const std::string& msg) : Error("non-normalizable: " + msg) {}
};

class NonIntegrable : public Error {
public:
    explicit NonIntegrable(const std::string& msg) : Error("non-integrable: " + msg) {}
};

class FitUnstable : public Error {
public:
    FitUnstable(const std::string& msg, double residual)
        : Error("fit unstable: " + msg + " (residual " + std::to_string(residual) + ")") {}
};

class EmptyCandidates : public Error {
public:
    explicit EmptyCandidates(const std::string& msg) : Error("empty candidates: " + msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error("io: " + msg) {}
};

} // namespace pshlab
