#include "rkhm/serialize.hpp"

#include <fstream>
#include <sstream>

namespace rkhm {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidInput, what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing JSON field '") + key + "'");
  return j.at(key);
}

template <class T>
T as(const Json& j, const char* what) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    bad(std::string("JSON field '") + what + "' has the wrong type");
  }
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) bad(std::string("JSON field '") + what + "' must be a number");
  return j.get<double>();
}

ScalarKernelKind scalar_kind_from(const std::string& s) {
  if (s == "laplacian") return ScalarKernelKind::Laplacian;
  if (s == "gaussian") return ScalarKernelKind::Gaussian;
  bad("unknown scalar kernel kind '" + s + "'");
}

const char* scalar_kind_name(ScalarKernelKind k) {
  return k == ScalarKernelKind::Laplacian ? "laplacian" : "gaussian";
}

std::vector<Matrix> matrices_from_json(const Json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array()) bad("expected an array of matrices");
  std::vector<Matrix> out;
  out.reserve(j.size());
  for (const auto& m : j) out.push_back(matrix_from_json(m, rows, cols));
  return out;
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) arr.push_back(m(i, k));
  }
  return arr;
}

Matrix matrix_from_json(const Json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array()) bad("matrix must be an array");
  Matrix m(rows, cols);
  if (!j.empty() && j.front().is_array()) {
    if (static_cast<Eigen::Index>(j.size()) != rows) bad("matrix has the wrong number of rows");
    for (Eigen::Index i = 0; i < rows; ++i) {
      const Json& row = j[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) bad("matrix row has the wrong length");
      for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = number(row[static_cast<std::size_t>(k)], "entries");
    }
    return m;
  }
  if (static_cast<Eigen::Index>(j.size()) != rows * cols) bad("matrix has the wrong number of entries");
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) {
      m(i, k) = number(j[static_cast<std::size_t>(i * cols + k)], "entries");
    }
  }
  return m;
}

Json descriptor_to_json(const AlgebraDescriptor& desc) {
  return Json{{"kind", desc.kind_name()}, {"sizes", desc.sizes()}, {"d", desc.dim()}};
}

AlgebraDescriptor descriptor_from_json(const Json& j) {
  const auto kind = as<std::string>(field(j, "kind"), "kind");
  const int d = j.contains("d") ? as<int>(j.at("d"), "d") : -1;
  if (kind == "block_diag") {
    const auto sizes = as<std::vector<int>>(field(j, "sizes"), "sizes");
    AlgebraDescriptor desc = AlgebraDescriptor::block_diag(sizes);
    if (d >= 0 && desc.dim() != d) bad("block sizes do not sum to d");
    return desc;
  }
  if (d < 0) bad("descriptor needs 'd'");
  if (kind == "full") return AlgebraDescriptor::full(d);
  if (kind == "circulant") return AlgebraDescriptor::circulant(d);
  bad("unknown descriptor kind '" + kind + "'");
}

Json element_to_json(const AlgebraElement& a) {
  return Json{{"desc", descriptor_to_json(a.desc())}, {"entries", matrix_to_json(a.dense())}};
}

AlgebraElement element_from_json(const Json& j) {
  const AlgebraDescriptor desc = descriptor_from_json(field(j, "desc"));
  return make_element(desc, matrix_from_json(field(j, "entries"), desc.dim(), desc.dim()));
}

ScalarKernel scalar_kernel_from_json(const Json& j) {
  ScalarKernel k;
  k.kind = scalar_kind_from(as<std::string>(field(j, "kind"), "kind"));
  if (j.contains("c")) k.c = number(j.at("c"), "c");
  if (!(k.c > 0.0)) bad("scalar kernel bandwidth c must be positive");
  return k;
}

Json kernel_to_json(const MatrixKernel& k) {
  return Json{{"variant", k.is_separable() ? "separable" : "product_conv"},
              {"scalar", {{"kind", scalar_kind_name(k.scalar().kind)}, {"c", k.scalar().c}}},
              {"a", element_to_json(k.factor())}};
}

MatrixKernel kernel_from_json(const Json& j) {
  const auto variant = as<std::string>(field(j, "variant"), "variant");
  const ScalarKernel scalar = scalar_kernel_from_json(field(j, "scalar"));
  AlgebraElement a = element_from_json(field(j, "a"));
  if (variant == "separable") return MatrixKernel::separable(scalar, std::move(a));
  if (variant == "product_conv") return MatrixKernel::product_conv(scalar, std::move(a));
  bad("unknown kernel variant '" + variant + "'");
}

Json gram_to_json(const GramMatrix& g) {
  Json j{{"n", g.n()}, {"d", g.d()}};
  if (g.is_factored()) {
    j["scalar_gram"] = matrix_to_json(g.as_factored().scalar_gram);
    j["factor"] = element_to_json(g.as_factored().factor);
  } else {
    j["entries"] = matrix_to_json(g.materialize());
  }
  return j;
}

GramMatrix gram_from_json(const Json& j) {
  const int n = as<int>(field(j, "n"), "n");
  const int d = as<int>(field(j, "d"), "d");
  if (n <= 0 || d <= 0) bad("Gram sizes must be positive");
  if (j.contains("scalar_gram")) {
    AlgebraElement factor = element_from_json(field(j, "factor"));
    if (factor.dim() != d) bad("Gram factor dimension differs from d");
    return GramMatrix::factored(matrix_from_json(j.at("scalar_gram"), n, n), std::move(factor));
  }
  const Eigen::Index size = static_cast<Eigen::Index>(n) * d;
  return GramMatrix::dense(matrix_from_json(field(j, "entries"), size, size), d);
}

Json model_to_json(const DeepModel& model) {
  Json anchors = Json::array();
  for (const auto& z : model.anchors()) anchors.push_back(matrix_to_json(z));
  Json layers = Json::array();
  for (const auto& layer : model.layers()) {
    Json coeffs = Json::array();
    for (const auto& c : layer.coeffs) coeffs.push_back(matrix_to_json(c.dense()));
    layers.push_back(Json{{"kernel", kernel_to_json(layer.kernel)},
                          {"coeff_desc", descriptor_to_json(layer.coeff_desc)},
                          {"coeffs", std::move(coeffs)}});
  }
  return Json{{"d", model.dim()}, {"anchors", std::move(anchors)}, {"layers", std::move(layers)}};
}

DeepModel model_from_json(const Json& j) {
  const int d = as<int>(field(j, "d"), "d");
  std::vector<Matrix> anchors = matrices_from_json(field(j, "anchors"), d, d);
  const Json& jl = field(j, "layers");
  if (!jl.is_array()) bad("'layers' must be an array");
  std::vector<Layer> layers;
  for (const auto& entry : jl) {
    MatrixKernel kernel = kernel_from_json(field(entry, "kernel"));
    AlgebraDescriptor desc = descriptor_from_json(field(entry, "coeff_desc"));
    std::vector<AlgebraElement> coeffs;
    for (const auto& m : matrices_from_json(field(entry, "coeffs"), d, d)) coeffs.push_back(make_element(desc, m));
    layers.push_back(Layer{std::move(kernel), std::move(desc), std::move(coeffs)});
  }
  return DeepModel(std::move(layers), std::move(anchors));
}

Json pf_report_to_json(const PfReport& r) {
  Json j{{"bound", r.bound},
         {"regularizer", r.regularizer},
         {"eigen_min", r.eigen_extrema.first},
         {"eigen_max", r.eigen_extrema.second}};
  j["exact"] = r.exact ? Json(*r.exact) : Json(nullptr);
  return j;
}

Json bound_report_to_json(const BoundReport& r) {
  return Json{{"K_tilde", r.K_tilde},
              {"M_tilde", r.M_tilde},
              {"term_empirical", r.term_empirical},
              {"term_complexity", r.term_complexity},
              {"term_confidence", r.term_confidence},
              {"total", r.total}};
}

Json bound_inputs_to_json(const BoundInputs& in) {
  return Json{{"D", in.D},         {"B", in.B},   {"E", in.E},
              {"delta", in.delta}, {"n", in.n},   {"trace_sum", in.trace_sum},
              {"empirical", in.empirical}};
}

BoundInputs bound_inputs_from_json(const Json& j) {
  BoundInputs in;
  in.D = number(field(j, "D"), "D");
  in.B = as<std::vector<double>>(field(j, "B"), "B");
  in.E = number(field(j, "E"), "E");
  if (j.contains("delta")) in.delta = number(j.at("delta"), "delta");
  in.n = as<int>(field(j, "n"), "n");
  in.trace_sum = number(field(j, "trace_sum"), "trace_sum");
  if (j.contains("empirical")) in.empirical = number(j.at("empirical"), "empirical");
  return in;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    bad(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace rkhm
