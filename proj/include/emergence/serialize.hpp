#pragma once

// JSON encoding of lattices, operators, spectra and states.
//
// Real vectors are arrays of numbers, complex vectors arrays of [re, im]
// pairs, dense matrices arrays of rows. nlohmann::json prints doubles with
// the shortest round-tripping representation, so decode(encode(x)) is exact.
// Klein-Gordon operators and spectra store only the mass and lattice and
// are rebuilt on load; everything else carries its dense data.

#include <Eigen/Dense>
#include <fstream>
#include <json.hpp>
#include <string>

#include "emergence/error.hpp"
#include "emergence/lattice.hpp"
#include "emergence/modes.hpp"
#include "emergence/newton_wigner.hpp"
#include "emergence/spectral.hpp"

namespace emergence::serial {

using nlohmann::json;

inline constexpr int format_version = 1;

namespace detail {

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InvalidArgument(std::string("serialized record lacks '") + key + "'");
  return j.at(key);
}

inline void expect_kind(const json& j, const std::string& kind) {
  const auto& k = field(j, "kind");
  if (k != kind) throw InvalidArgument("expected a '" + kind + "' record, got '" + k.dump() + "'");
}

}  // namespace detail

inline json encode(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

inline json encode(const Eigen::VectorXcd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v[i].real(), v[i].imag()});
  return out;
}

inline json encode(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(encode(Eigen::VectorXd(m.row(i).transpose())));
  return out;
}

inline json encode(const Eigen::MatrixXcd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(encode(Eigen::VectorXcd(m.row(i).transpose())));
  return out;
}

inline Eigen::VectorXd decode_real(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Eigen::VectorXcd decode_complex(const json& j) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != 2) throw InvalidArgument("complex entries must be [re, im] pairs");
    v[static_cast<Eigen::Index>(i)] = cplx(j[i][0].get<double>(), j[i][1].get<double>());
  }
  return v;
}

inline Eigen::MatrixXd decode_real_matrix(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(i)].size()) != cols) throw InvalidArgument("ragged matrix");
    m.row(i) = decode_real(j[static_cast<std::size_t>(i)]).transpose();
  }
  return m;
}

inline Eigen::MatrixXcd decode_complex_matrix(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(i)].size()) != cols) throw InvalidArgument("ragged matrix");
    m.row(i) = decode_complex(j[static_cast<std::size_t>(i)]).transpose();
  }
  return m;
}

inline json encode(const Lattice& lat) {
  return {{"kind", "lattice"}, {"extents", lat.extents()}, {"spacing", lat.spacing()}, {"sites", lat.site_count()}};
}

inline Lattice decode_lattice(const json& j) {
  detail::expect_kind(j, "lattice");
  Lattice lat(detail::field(j, "extents").get<std::vector<int>>(), detail::field(j, "spacing").get<double>());
  if (j.contains("sites") && j.at("sites").get<std::size_t>() != lat.site_count())
    throw InvalidArgument("lattice site count disagrees with its extents");
  return lat;
}

inline json encode(const ROperator& op) {
  json j{{"kind", "operator"},
         {"format", format_version},
         {"lattice", encode(op.lattice())},
         {"stencil_radius", op.stencil_radius()},
         {"translation_invariant", op.translation_invariant()}};
  if (op.kg_mass()) {
    j["kg_mass"] = *op.kg_mass();
  } else {
    j["matrix"] = encode(op.matrix());
  }
  return j;
}

inline ROperator decode_operator(const json& j) {
  detail::expect_kind(j, "operator");
  const Lattice lat = decode_lattice(detail::field(j, "lattice"));
  if (j.contains("kg_mass")) return build_klein_gordon(j.at("kg_mass").get<double>(), lat);
  return ROperator(lat, decode_real_matrix(detail::field(j, "matrix")), detail::field(j, "stencil_radius").get<int>(),
                   std::nullopt, detail::field(j, "translation_invariant").get<bool>());
}

inline json encode(const Spectrum& spec) {
  json j{{"kind", "spectrum"},
         {"format", format_version},
         {"lattice", encode(spec.lattice())},
         {"eigenvalues", encode(spec.eigenvalues())}};
  if (spec.kg_mass()) {
    j["kg_mass"] = *spec.kg_mass();
  } else {
    j["modes"] = encode(spec.modes());
    j["fourier"] = spec.fourier();
    j["wavevectors"] = spec.wavevectors();
  }
  return j;
}

inline Spectrum decode_spectrum(const json& j) {
  detail::expect_kind(j, "spectrum");
  const Lattice lat = decode_lattice(detail::field(j, "lattice"));
  Eigen::VectorXd ev = decode_real(detail::field(j, "eigenvalues"));
  if (j.contains("kg_mass")) {
    Spectrum spec = diagonalize(build_klein_gordon(j.at("kg_mass").get<double>(), lat));
    if (spec.eigenvalues() != ev) throw InvalidArgument("stored Klein-Gordon eigenvalues do not match the rebuilt basis");
    return spec;
  }
  return Spectrum(lat, std::move(ev), decode_complex_matrix(detail::field(j, "modes")),
                  detail::field(j, "fourier").get<bool>(),
                  detail::field(j, "wavevectors").get<std::vector<std::array<double, 3>>>());
}

inline json encode(const PhaseVector& u) {
  return {{"kind", "phase_vector"}, {"lattice", encode(u.lattice)}, {"phi", encode(u.phi)}, {"pi", encode(u.pi)}};
}

inline PhaseVector decode_phase_vector(const json& j) {
  detail::expect_kind(j, "phase_vector");
  PhaseVector u{decode_lattice(detail::field(j, "lattice")), decode_real(detail::field(j, "phi")),
                decode_real(detail::field(j, "pi"))};
  u.validate();
  return u;
}

inline json encode(const ModeVector& m) { return {{"kind", "mode_vector"}, {"alpha", encode(m.alpha)}}; }

inline ModeVector decode_mode_vector(const json& j) {
  detail::expect_kind(j, "mode_vector");
  return {decode_complex(detail::field(j, "alpha"))};
}

inline json encode(const NWWavefunction& w) {
  return {{"kind", "nw_wavefunction"}, {"lattice", encode(w.lattice)}, {"psi", encode(w.psi)}};
}

inline NWWavefunction decode_nw(const json& j) {
  detail::expect_kind(j, "nw_wavefunction");
  NWWavefunction w{decode_lattice(detail::field(j, "lattice")), decode_complex(detail::field(j, "psi"))};
  w.validate();
  return w;
}

inline void write_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw Error("write to '" + path + "' failed");
}

inline json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace emergence::serial
