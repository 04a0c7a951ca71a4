#pragma once

#include <string>

#include <json.hpp>

#include "mtlab/blowup.hpp"
#include "mtlab/minimizer.hpp"
#include "mtlab/surface.hpp"

namespace mtlab {

using nlohmann::json;

// Mesh round-trip; rebuilding from the document is bit-identical.
json mesh_to_json(const SurfaceMesh& mesh);
SurfaceMesh mesh_from_json(const json& j);

json field_to_json(const SurfaceMesh& mesh, const ScalarField& f);
ScalarField field_from_json(const SurfaceMesh& mesh, const json& j);

json expansion_to_json(const GreenExpansion& e);
json minimizer_result_to_json(const MinimizerResult& r);
json continuation_to_json(const ContinuationReport& rep);
std::string continuation_csv(const ContinuationReport& rep);
json blowup_report_to_json(const BlowupReport& rep);

// RFC-4180-ish CSV with '.' decimals, '\n' endings, 17 significant digits.
class CsvWriter {
  public:
    explicit CsvWriter(std::string header);
    void row_start();
    void cell(double v);
    void cell(long long v);
    void cell(const std::string& s);
    void row_end();
    const std::string& str() const { return body_; }

  private:
    std::string body_;
    bool first_in_row_ = true;
};

void write_text_file(const std::string& path, const std::string& body);

}  // namespace mtlab
