#pragma once

// Deterministic lowering of a validated FLA program into a CSP# model.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fla2csp/cspast.hpp"
#include "fla2csp/pyast.hpp"

namespace fla2csp::xlate {

struct TranslationConfig {
  int no_nodes = 0;
  std::optional<int> fl_srv_id;  // absent for decentralized algorithms
  int no_iterations = 0;
  std::string node_channel_capacity = "NoNodes-1";
  // FIFO-list channel capacities, declaration order preserved.
  std::vector<std::pair<std::string, std::string>> fifo_capacities;
  // Extra #defines (e.g. NoNeighbors = NoNodes-1), order preserved.
  std::vector<std::pair<std::string, std::string>> extra_defines;
  std::map<std::string, std::string> name_map = py::default_name_map();
  std::string system_name = "System";

  std::string fifo_capacity(const std::string& list) const;

  // key=value text; keys: no_nodes, fl_srv_id, no_iterations,
  // node_channel_capacity, system_name, fifo.<list>, define.<NAME>, map.<name>
  static TranslationConfig parse(const std::string& text);
  std::string to_text() const;
};

csp::CspModel translate(const py::ValidatedProgram& program, const TranslationConfig& config,
                        const py::MessageShapeMap& shapes);

// Convenience: parse + validate + infer shapes + translate.
csp::CspModel translate_source(const std::string& python_source,
                               const TranslationConfig& config);

}  // namespace fla2csp::xlate
