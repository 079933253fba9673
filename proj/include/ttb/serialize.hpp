#pragma once

/// \file
/// Tensor serialization.
///
/// Binary pair: a JSON header {"row_dims", "col_dims", "dtype": "c128",
/// "payload": <file name>} next to a payload of little-endian IEEE-754
/// doubles, interleaved (re, im), in the row-major entry order.
///
/// Pure JSON: {"row_dims", "col_dims", "entries"} where "entries" is nested
/// one array level per mode and each leaf is a number (real) or [re, im].

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ttb/error.hpp"
#include "ttb/tensor.hpp"

namespace ttb {

using json = nlohmann::json;

namespace detail {

inline Dims read_dims(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("tensor JSON is missing '") + key + "'");
  const json& d = j.at(key);
  if (!d.is_array()) throw ConfigError(std::string("'") + key + "' must be an array");
  Dims out;
  for (const json& v : d) {
    if (!v.is_number_integer() || v.get<long long>() < 1)
      throw ConfigError(std::string("'") + key + "' must hold positive integers");
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

inline complex read_leaf(const json& v) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw ConfigError("tensor entry must be a number or a [re, im] pair");
}

inline void read_nested(const json& node, const Dims& dims, std::size_t mode,
                        std::vector<complex>& out) {
  if (mode == dims.size()) {
    out.push_back(read_leaf(node));
    return;
  }
  if (!node.is_array() || node.size() != dims[mode])
    throw ConfigError("nested entries do not match extent " + std::to_string(dims[mode]) +
                      " of mode " + std::to_string(mode));
  for (const json& child : node) read_nested(child, dims, mode + 1, out);
}

inline json write_nested(std::span<const complex> data, const Dims& dims, std::size_t mode,
                         std::size_t& pos) {
  if (mode == dims.size()) {
    const complex z = data[pos++];
    if (z.imag() == 0.0) return z.real();
    return json::array({z.real(), z.imag()});
  }
  json arr = json::array();
  for (std::size_t k = 0; k < dims[mode]; ++k) arr.push_back(write_nested(data, dims, mode + 1, pos));
  return arr;
}

inline void put_le(double v, char* dst) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) dst[b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
}

inline double get_le(const char* src) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b)
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(src[b])) << (8 * b);
  return std::bit_cast<double>(bits);
}

}  // namespace detail

inline json to_json(const DenseTensor& t) {
  std::size_t pos = 0;
  json j;
  j["row_dims"] = t.shape().row_dims();
  j["col_dims"] = t.shape().col_dims();
  j["entries"] = detail::write_nested(t.entries(), t.shape().all_dims(), 0, pos);
  return j;
}

inline DenseTensor tensor_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("tensor JSON must be an object");
  Shape shape(detail::read_dims(j, "row_dims"), detail::read_dims(j, "col_dims"));
  if (j.contains("dtype") && j.at("dtype") != "c128")
    throw ConfigError("unsupported dtype " + j.at("dtype").dump());
  if (!j.contains("entries")) throw ConfigError("tensor JSON is missing 'entries'");
  std::vector<complex> v;
  v.reserve(shape.size());
  detail::read_nested(j.at("entries"), shape.all_dims(), 0, v);
  return DenseTensor(std::move(shape), std::move(v));
}

/// Raw payload bytes: interleaved little-endian (re, im) doubles.
inline std::string encode_payload(const DenseTensor& t) {
  std::string out(t.size() * 16, '\0');
  auto e = t.entries();
  for (std::size_t k = 0; k < e.size(); ++k) {
    detail::put_le(e[k].real(), &out[16 * k]);
    detail::put_le(e[k].imag(), &out[16 * k + 8]);
  }
  return out;
}

inline DenseTensor decode_payload(const std::string& bytes, Shape shape) {
  if (bytes.size() != shape.size() * 16)
    throw ConfigError("payload holds " + std::to_string(bytes.size()) + " bytes, expected " +
                      std::to_string(shape.size() * 16));
  std::vector<complex> v(shape.size());
  for (std::size_t k = 0; k < v.size(); ++k)
    v[k] = {detail::get_le(&bytes[16 * k]), detail::get_le(&bytes[16 * k + 8])};
  return DenseTensor(std::move(shape), std::move(v));
}

/// Writes `<stem>.json` and `<stem>.bin`; returns the header path.
inline std::filesystem::path save_binary(const DenseTensor& t, const std::filesystem::path& stem) {
  std::filesystem::path header = stem;
  header += ".json";
  std::filesystem::path payload = stem;
  payload += ".bin";
  json h;
  h["row_dims"] = t.shape().row_dims();
  h["col_dims"] = t.shape().col_dims();
  h["dtype"] = "c128";
  h["payload"] = payload.filename().string();
  {
    std::ofstream os(header);
    if (!os) throw ConfigError("cannot write " + header.string());
    os << h.dump(2) << '\n';
  }
  std::ofstream bs(payload, std::ios::binary);
  if (!bs) throw ConfigError("cannot write " + payload.string());
  const std::string bytes = encode_payload(t);
  bs.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  return header;
}

/// Loads either form: a header with "payload" or a pure-JSON tensor.
inline DenseTensor load_tensor(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open tensor file " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
  if (!j.contains("payload")) return tensor_from_json(j);
  if (j.value("dtype", std::string("c128")) != "c128")
    throw ConfigError("unsupported dtype in " + path.string());
  Shape shape(detail::read_dims(j, "row_dims"), detail::read_dims(j, "col_dims"));
  const std::filesystem::path payload = path.parent_path() / j.at("payload").get<std::string>();
  std::ifstream bs(payload, std::ios::binary);
  if (!bs) throw ConfigError("cannot open payload " + payload.string());
  std::string bytes((std::istreambuf_iterator<char>(bs)), std::istreambuf_iterator<char>());
  return decode_payload(bytes, std::move(shape));
}

}  // namespace ttb
