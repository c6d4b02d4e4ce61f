#pragma once

// JSON forms of the library's values. Matrices are flat row-major arrays;
// nested arrays of rows are accepted on input. Doubles are written in the
// shortest form that parses back to the same bits.

#include <string>

#include <json.hpp>

#include "rkhm/bounds.hpp"
#include "rkhm/model.hpp"
#include "rkhm/pfnorm.hpp"

namespace rkhm {

using Json = nlohmann::json;

Json matrix_to_json(const Matrix& m);
/// Accepts flat row-major (length rows * cols) or nested rows.
Matrix matrix_from_json(const Json& j, Eigen::Index rows, Eigen::Index cols);

/// {"kind": "full" | "block_diag" | "circulant", "sizes": [...], "d": d}
Json descriptor_to_json(const AlgebraDescriptor& desc);
AlgebraDescriptor descriptor_from_json(const Json& j);

/// {"desc": {...}, "entries": row-major d x d}
Json element_to_json(const AlgebraElement& a);
AlgebraElement element_from_json(const Json& j);

/// {"variant": "separable" | "product_conv", "scalar": {"kind": "laplacian", "c": c}, "a": <element>}
Json kernel_to_json(const MatrixKernel& k);
MatrixKernel kernel_from_json(const Json& j);
ScalarKernel scalar_kernel_from_json(const Json& j);

/// Dense: {"n", "d", "entries": dn x dn}. Factored: {"n", "d", "scalar_gram": n x n, "factor": <element>}.
Json gram_to_json(const GramMatrix& g);
GramMatrix gram_from_json(const Json& j);

/// {"anchors": [...], "layers": [{"kernel", "coeff_desc", "coeffs": [...]}]}
Json model_to_json(const DeepModel& model);
DeepModel model_from_json(const Json& j);

Json pf_report_to_json(const PfReport& r);
Json bound_report_to_json(const BoundReport& r);
Json bound_inputs_to_json(const BoundInputs& in);
BoundInputs bound_inputs_from_json(const Json& j);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace rkhm
