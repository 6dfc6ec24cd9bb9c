#pragma once

#include "drccp/model.hpp"
#include "drccp/transport.hpp"

#include <string>

namespace drccp {

/// JSON text whose field names mirror the model types.
std::string problem_to_text(const DrccpProblem& p);

/// Parses problem JSON; throws ValidationError on malformed input. Does not validate invariants.
DrccpProblem problem_from_text(const std::string& text);

DrccpProblem load_problem(const std::string& path);
void save_problem(const DrccpProblem& p, const std::string& path);

/** @brief Transportation instance plus the training costs it is solved against. */
struct TransportProblem {
    TransportInstance instance;
    std::vector<Vector> samples;
    double clip_rate = 0.0;
};

std::string transport_to_text(const TransportProblem& t);
TransportProblem transport_from_text(const std::string& text);

/// Value of the "type" field of a problem file ("DrccpProblem" when absent).
std::string problem_file_type(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace drccp
