#pragma once

#include <optional>
#include <string>

#include "pcfactor/fuchsian.hpp"
#include "pcfactor/index_engine.hpp"
#include "pcfactor/reducibility.hpp"
#include "pcfactor/resolver.hpp"
#include "pcfactor/symbol.hpp"

namespace pcfactor {

// JSON text interchange. Complex numbers serialize as [re, im], matrices as
// nested row-major arrays, polynomials as coefficient lists by ascending
// degree. Keys are emitted sorted, so equal values give identical text.
// Parsers throw InvalidArgument on malformed input.

std::string symbol_to_json(const PiecewiseSymbol& symbol, int indent = 2);
PiecewiseSymbol symbol_from_json(const std::string& text);

std::string system_to_json(const RationalSystem& sys, int indent = 2);
RationalSystem system_from_json(const std::string& text);

std::string data_pair_to_json(const DataPair& data, int indent = 2);

std::string reducibility2_to_json(const Reducibility2& rep, int indent = 2);
std::string reducibility3_to_json(const Reducibility3& rep, int indent = 2);

std::string index_result_to_json(const IndexResult& result, int indent = 2);

std::string request_to_json(const ResolverRequest& req, int indent = 2);
ResolverRequest request_from_json(const std::string& text);

std::string verdict_to_json(const ResolverVerdict& verdict, int indent = 2);

// Bundled output of the full analysis pipeline.
struct AnalysisReport {
  double p = 2.0;
  PhiReport phi;
  std::optional<DataPair> data;
  std::optional<Reducibility2> red2;
  std::optional<Reducibility3> red3;
  std::optional<IndexResult> indices;
  std::optional<ResolverVerdict> verdict;
};

std::string analysis_to_json(const AnalysisReport& report, int indent = 2);
AnalysisReport analysis_from_json(const std::string& text);

// Distinguishes the two accepted input schemas by their keys: "arc_values"
// marks a symbol file, "numerators" a system file.
enum class InputKind { Symbol, System };
InputKind classify_input(const std::string& text);

}  // namespace pcfactor
