#include "matchsim/serialize.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace matchsim::io {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  return json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const json& j) {
  Matrix m(j.at("rows").get<int>(), j.at("cols").get<int>());
  m.data = j.at("data").get<std::vector<double>>();
  if (m.data.size() != static_cast<std::size_t>(m.rows) * m.cols)
    throw std::runtime_error("matrix payload size mismatch");
  return m;
}

}  // namespace

std::string realization_to_json(const model::MarketRealization& real) {
  json j;
  j["X"] = matrix_to_json(real.X);
  j["eps"] = matrix_to_json(real.eps);
  j["eta"] = matrix_to_json(real.eta);
  j["omega"] = matrix_to_json(real.omega);
  j["lambda"] = real.lambda;
  j["outside_eps"] = real.outside_eps;
  j["Z"] = matrix_to_json(real.Z);
  j["xi"] = real.xi;
  j["c"] = real.c;
  j["quotas"] = real.quotas.values;
  j["sigma_n"] = real.sigma_n;
  j["outside_value"] = real.outside_value;
  j["outside_noise"] = real.outside_noise;
  j["g"] = real.g == model::GSpec::dot ? "dot" : "zero";
  return j.dump(2) + "\n";
}

model::MarketRealization realization_from_json(const std::string& text) {
  const json j = json::parse(text);
  model::MarketRealization real;
  real.X = matrix_from_json(j.at("X"));
  real.eps = matrix_from_json(j.at("eps"));
  real.eta = matrix_from_json(j.at("eta"));
  real.omega = matrix_from_json(j.at("omega"));
  real.lambda = j.at("lambda").get<std::vector<double>>();
  real.outside_eps = j.at("outside_eps").get<std::vector<double>>();
  real.Z = matrix_from_json(j.at("Z"));
  real.xi = j.at("xi").get<std::vector<double>>();
  real.c = j.at("c").get<std::vector<double>>();
  real.quotas.values = j.at("quotas").get<std::vector<int>>();
  real.sigma_n = j.at("sigma_n").get<double>();
  real.outside_value = j.at("outside_value").get<double>();
  real.outside_noise = j.at("outside_noise").get<bool>();
  real.g = j.at("g").get<std::string>() == "dot" ? model::GSpec::dot : model::GSpec::zero;
  return real;
}

void write_realization_json(const model::MarketRealization& real, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << realization_to_json(real);
}

model::MarketRealization read_realization_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return realization_from_json(ss.str());
}

namespace {

constexpr char kMagic[4] = {'M', 'S', 'R', 'B'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void put_vec(std::ofstream& out, const std::vector<T>& v) {
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
T get(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

template <typename T>
std::vector<T> get_vec(std::ifstream& in, std::size_t count) {
  std::vector<T> v(count);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(T)));
  return v;
}

}  // namespace

void write_realization_binary(const model::MarketRealization& real, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.write(kMagic, 4);
  put(out, kVersion);
  const std::int32_t n = real.students();
  const std::int32_t m = real.colleges();
  put(out, n);
  put(out, m);
  put(out, static_cast<std::int32_t>(real.X.cols));
  put(out, static_cast<std::int32_t>(real.Z.cols));
  put(out, real.sigma_n);
  put(out, real.outside_value);
  put(out, static_cast<std::uint8_t>(real.outside_noise));
  put(out, static_cast<std::uint8_t>(real.g == model::GSpec::dot ? 0 : 1));
  put_vec(out, real.X.data);
  put_vec(out, real.eps.data);
  put_vec(out, real.eta.data);
  put_vec(out, real.omega.data);
  put_vec(out, real.lambda);
  put_vec(out, real.outside_eps);
  put_vec(out, real.Z.data);
  put_vec(out, real.xi);
  put_vec(out, real.c);
  std::vector<std::int32_t> quotas(real.quotas.values.begin(), real.quotas.values.end());
  put_vec(out, quotas);
  if (!out) throw std::runtime_error("write failed: " + path);
}

model::MarketRealization read_realization_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("bad magic in " + path);
  if (get<std::uint32_t>(in) != kVersion) throw std::runtime_error("unsupported version");
  const auto n = get<std::int32_t>(in);
  const auto m = get<std::int32_t>(in);
  const auto x_dim = get<std::int32_t>(in);
  const auto z_dim = get<std::int32_t>(in);

  model::MarketRealization real;
  real.sigma_n = get<double>(in);
  real.outside_value = get<double>(in);
  real.outside_noise = get<std::uint8_t>(in) != 0;
  real.g = get<std::uint8_t>(in) == 0 ? model::GSpec::dot : model::GSpec::zero;
  real.X = Matrix(n, x_dim);
  real.X.data = get_vec<double>(in, static_cast<std::size_t>(n) * x_dim);
  real.eps = Matrix(n, m);
  real.eps.data = get_vec<double>(in, static_cast<std::size_t>(n) * m);
  real.eta = Matrix(n, m);
  real.eta.data = get_vec<double>(in, static_cast<std::size_t>(n) * m);
  real.omega = Matrix(n, m);
  real.omega.data = get_vec<double>(in, static_cast<std::size_t>(n) * m);
  real.lambda = get_vec<double>(in, n);
  real.outside_eps = get_vec<double>(in, n);
  real.Z = Matrix(m, z_dim);
  real.Z.data = get_vec<double>(in, static_cast<std::size_t>(m) * z_dim);
  real.xi = get_vec<double>(in, m);
  real.c = get_vec<double>(in, m);
  const auto quotas = get_vec<std::int32_t>(in, m);
  real.quotas.values.assign(quotas.begin(), quotas.end());
  if (!in) throw std::runtime_error("truncated realization dump: " + path);
  return real;
}

std::string trace_to_jsonl(const algo::RestabTrace& trace) {
  std::string out;
  for (const auto& step : trace.steps) {
    json record{{"student", step.satisfied.student}, {"college", step.satisfied.college}};
    record["displaced"] = step.displaced ? json(*step.displaced) : json(nullptr);
    out += record.dump();
    out += '\n';
  }
  return out;
}

}  // namespace matchsim::io
