// SPDX-License-Identifier: Apache-2.0
#include "kjepa/analysis/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "kjepa/errors.hpp"

namespace kjepa::analysis {

namespace fs = std::filesystem;

void validate(const EmbeddingSet& e) {
  if (e.size() == 0 || e.dim == 0) throw ContractError("embedding set is empty");
  if (e.rows.size() != e.size() * e.dim)
    throw ContractError("embedding set: " + std::to_string(e.rows.size()) + " values for " +
                        std::to_string(e.size()) + " rows of width " + std::to_string(e.dim));
  for (double v : e.rows)
    if (!std::isfinite(v)) throw ContractError("embedding set contains non-finite values");
}

EmbeddingSet embed_split(models::ModelParams<float>& params, const synth::Dataset& ds,
                         models::Window which, Encoder encoder, std::size_t batch_size) {
  if (ds.empty()) throw ConfigError("cannot embed an empty split");
  if (ds.context_len() != params.config.input_len)
    throw ConfigError("split window length " + std::to_string(ds.context_len()) +
                      " does not match model input length " +
                      std::to_string(params.config.input_len));
  if (encoder == Encoder::ema && params.ema.empty())
    throw ContractError("model has no EMA encoder");
  ParamSet<float>& set = encoder == Encoder::ema ? params.ema : params.online;

  EmbeddingSet out;
  out.dim = params.config.latent_dim;
  out.labels = ds.labels();
  out.source_digest = params.config.digest();
  out.rows.reserve(ds.size() * out.dim);
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, idx.size() - start);
    Tape<float> tape(Tape<float>::Mode::inference);
    auto x = tape.constant(models::gather_batch<float>(ds, std::span(idx).subspan(start, n), which));
    const Tensor<float>& z = tape.value(models::encode(tape, set, params.config, x));
    out.rows.insert(out.rows.end(), z.values().begin(), z.values().end());
  }
  validate(out);
  return out;
}

void export_embeddings(const EmbeddingSet& e, const fs::path& path) {
  validate(e);
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os << "id,label";
  for (std::size_t j = 0; j < e.dim; ++j) os << ",z" << j;
  os << '\n';
  char buf[32];
  for (std::size_t i = 0; i < e.size(); ++i) {
    os << i << ',' << e.labels[i];
    for (double v : e.row(i)) {
      std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(static_cast<float>(v)));
      os << ',' << buf;
    }
    os << '\n';
  }
  if (!os) throw IoError("write failed: " + path.string());
}

EmbeddingSet import_embeddings(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw ParseError(path.string() + ": missing header", 1);
  const std::size_t fields = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (fields < 3 || !line.starts_with("id,label,z0"))
    throw ParseError(path.string() + ": bad header", 1);

  EmbeddingSet e;
  e.dim = fields - 2;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos;) {
      cells.push_back(rest.substr(0, pos));
      rest.remove_prefix(pos + 1);
    }
    cells.push_back(rest);
    if (cells.size() != fields)
      throw ParseError(path.string() + ": expected " + std::to_string(fields) + " fields", lineno);
    unsigned label = 0;
    auto [p, ec] = std::from_chars(cells[1].data(), cells[1].data() + cells[1].size(), label);
    if (ec != std::errc() || p != cells[1].data() + cells[1].size() || label > 0xffff)
      throw ParseError(path.string() + ": bad label", lineno);
    e.labels.push_back(static_cast<std::uint16_t>(label));
    for (std::size_t j = 2; j < fields; ++j) {
      float v = 0.0f;
      auto [q, ec2] = std::from_chars(cells[j].data(), cells[j].data() + cells[j].size(), v);
      if (ec2 != std::errc() || q != cells[j].data() + cells[j].size())
        throw ParseError(path.string() + ": bad value '" + std::string(cells[j]) + "'", lineno);
      e.rows.push_back(v);
    }
  }
  validate(e);
  return e;
}

double pathwise_invariance(const EmbeddingSet& context, const EmbeddingSet& target) {
  validate(context);
  validate(target);
  if (context.size() != target.size() || context.dim != target.dim)
    throw DimensionError("pathwise_invariance: context and target sets differ in shape");
  double sum = 0.0;
  for (std::size_t i = 0; i < context.size(); ++i) {
    double diff = 0.0, norm = 0.0;
    const auto c = context.row(i), t = target.row(i);
    for (std::size_t j = 0; j < context.dim; ++j) {
      diff += (t[j] - c[j]) * (t[j] - c[j]);
      norm += c[j] * c[j];
    }
    sum += std::sqrt(diff) / (std::sqrt(norm) + 1e-12);
  }
  return sum / static_cast<double>(context.size());
}

double pathwise_invariance(models::ModelParams<float>& params, const synth::Dataset& ds,
                           Encoder encoder, std::size_t batch_size) {
  return pathwise_invariance(embed_split(params, ds, models::Window::context, encoder, batch_size),
                             embed_split(params, ds, models::Window::target, encoder, batch_size));
}

}  // namespace kjepa::analysis
