#pragma once

#include <stdexcept>
#include <string>

namespace tilingaf {

// Input/serialization failure (malformed JSON, bad field-element syntax, ...).
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Arithmetic between elements of distinct quadratic fields.
struct FieldMismatch : std::runtime_error {
    explicit FieldMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

// A queried point is not the puncture of any tile in the patch at hand.
struct NotAPuncture : std::runtime_error {
    explicit NotAPuncture(const std::string& msg) : std::runtime_error(msg) {}
};

// A translation target lies outside every supertile reachable at the allowed depth.
struct OutOfSupertile : std::runtime_error {
    explicit OutOfSupertile(const std::string& msg) : std::runtime_error(msg) {}
};

// No admissible chart data exists for the requested (prototile, edge).
struct NoChart : std::runtime_error {
    explicit NoChart(const std::string& msg) : std::runtime_error(msg) {}
};

// The tile expected across a supertile edge is context-dependent.
struct NotBorderForcing : std::runtime_error {
    explicit NotBorderForcing(const std::string& msg) : std::runtime_error(msg) {}
};

// An operation requires every periodic boundary class to have period one first.
struct NormalizationRequired : std::runtime_error {
    explicit NormalizationRequired(const std::string& msg) : std::runtime_error(msg) {}
};

// Fixed-point iteration exceeded its configured bound.
struct ClosureTooLarge : std::runtime_error {
    explicit ClosureTooLarge(const std::string& msg) : std::runtime_error(msg) {}
};

// The substitution matrix is not primitive.
struct NotPrimitive : std::runtime_error {
    explicit NotPrimitive(const std::string& msg) : std::runtime_error(msg) {}
};

// The given path does not describe a sector-boundary (type III) class.
struct NotTypeIII : std::runtime_error {
    explicit NotTypeIII(const std::string& msg) : std::runtime_error(msg) {}
};

// The given path is outside the domain of the requested chart.
struct NotInDomain : std::runtime_error {
    explicit NotInDomain(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tilingaf
