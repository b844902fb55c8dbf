#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gmmot/gmm.hpp"
#include "gmmot/mw2.hpp"
#include "gmmot/mw2_kl.hpp"
#include "gmmot/transport_lp.hpp"

namespace gmmot {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

/// {"covs": [d x d ...], "d": d, "means": [[...]...], "weights": [...]}.
/// Numbers are written in shortest round-trip form, so load + save is
/// byte-stable.
std::string gmm_to_json(const Gmm& gmm);
/// Weights must sum to one within 1e-6; they are renormalized only when the
/// sum is off by more than rounding.
Gmm gmm_from_json(std::string_view text);
Gmm load_gmm(const std::string& path);
void save_gmm(const Gmm& gmm, const std::string& path);

/// {"weights": K0 x K1, "maps": [{"k", "l", "linear", "offset"}]} listing
/// positive-weight pairs with an available map.
std::string plan_to_json(const TransportPlan& plan);

/// {"shape": [...], "entries": [{"index": [...], "weight": w}]} for the
/// positive entries.
std::string coupling_to_json(const MultiCoupling& coupling);

/// Comma-separated numbers, one point per line. Blank lines are skipped and
/// a non-numeric first line is taken as a header.
PointCloud parse_csv(std::string_view text);
PointCloud load_csv(const std::string& path);
std::string to_csv(const Matrix& rows);

std::string mw2kl_params_to_json(const CouplingParams1D& params, double lambda, double sigma_min,
                                 std::uint64_t seed);
/// "iteration,energy" rows.
std::string energy_trace_csv(const std::vector<double>& energy);

/// "%.16e"; independent of the global locale.
std::string format_double(double value);

}  // namespace gmmot
