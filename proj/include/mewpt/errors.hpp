#pragma once

#include <stdexcept>
#include <string>

namespace mewpt {

/// Malformed user input: files, schemas, sample sets, configuration values.
class input_error : public std::runtime_error {
public:
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

/// Brute-force transient run failed to reach a steady state.
class oracle_error : public std::runtime_error {
public:
    explicit oracle_error(const std::string& what) : std::runtime_error(what) {}
};

/// Simulation energy ledger failed to close within tolerance.
class energy_balance_error : public std::runtime_error {
public:
    explicit energy_balance_error(const std::string& what) : std::runtime_error(what) {}
};

/// Requested metric cannot be computed from the given trace.
class metric_error : public std::runtime_error {
public:
    explicit metric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mewpt
