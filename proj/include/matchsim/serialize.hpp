#pragma once

#include <string>

#include "matchsim/algorithms.hpp"
#include "matchsim/model.hpp"

namespace matchsim::io {

// Realization fixtures. The JSON form is for small markets and is exact
// (doubles round-trip). The binary dump is columnar:
//   magic "MSRB", u32 version = 1,
//   i32 n, m, x_dim, z_dim,
//   f64 sigma_n, outside_value, u8 outside_noise, u8 g (0 = dot, 1 = zero),
//   f64 columns: X (n*x_dim row-major), eps (n*m), eta (n*m), omega (n*m),
//                lambda (n), outside_eps (n), Z (m*z_dim), xi (m), c (m),
//   i32 quotas (m),
// all in native little-endian byte order.
std::string realization_to_json(const model::MarketRealization& real);
model::MarketRealization realization_from_json(const std::string& text);
void write_realization_json(const model::MarketRealization& real, const std::string& path);
model::MarketRealization read_realization_json(const std::string& path);

void write_realization_binary(const model::MarketRealization& real, const std::string& path);
model::MarketRealization read_realization_binary(const std::string& path);

// One step per line: {"student":..,"college":..,"displaced":..|null}.
std::string trace_to_jsonl(const algo::RestabTrace& trace);

}  // namespace matchsim::io
