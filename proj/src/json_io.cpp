#include "gbdt/json_io.hpp"

namespace gbdt {

Json to_json(const CMat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

CMat cmat_from_json(const Json& j) {
  if (!j.is_array()) throw ValidationError("matrix JSON must be an array of rows");
  const int r = static_cast<int>(j.size());
  if (r == 0) return CMat(0, 0);
  const int c = static_cast<int>(j[0].size());
  CMat m(r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(j[i].size()) != c)
      throw ValidationError("matrix JSON has ragged rows");
    for (int k = 0; k < c; ++k) {
      const Json& e = j[i][k];
      if (!e.is_array() || e.size() != 2)
        throw ValidationError("matrix entries must be [re, im] pairs");
      m(i, k) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

namespace {

// Plain row-major nested arrays of [re, im] pairs; matrices with a zero
// dimension cannot round-trip that way, so only they carry explicit sizes.
Json sized(const CMat& m) {
  if (m.rows() > 0 && m.cols() > 0) return to_json(m);
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", to_json(m)}};
}

CMat sized_from(const Json& j) {
  if (j.is_array()) return cmat_from_json(j);
  const int r = j.at("rows").get<int>(), c = j.at("cols").get<int>();
  CMat m = CMat::Zero(r, c);
  if (r > 0 && !j.at("data").empty()) {
    CMat d = cmat_from_json(j.at("data"));
    if (d.rows() != r || (r > 0 && d.cols() != c))
      throw ValidationError("matrix JSON sizes disagree with data");
    m = d;
  }
  return m;
}

Eigen::VectorXd realvec_from(const Json& j) {
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

Json to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace

Json to_json(const Realization& r) {
  return Json{{"A", sized(r.A)}, {"B", sized(r.B)}, {"C", sized(r.C)}, {"D", sized(r.D)}};
}

Realization realization_from_json(const Json& j) {
  return Realization(sized_from(j.at("A")), sized_from(j.at("B")),
                     sized_from(j.at("C")), sized_from(j.at("D")));
}

Json to_json(const WeylFunction& w) {
  return Json{{"halfplane", w.halfplane == WeylFunction::Halfplane::Upper ? "upper" : "lower"},
              {"bound_M", w.bound_M},
              {"realization", to_json(w.realization)}};
}

WeylFunction weyl_from_json(const Json& j) {
  WeylFunction w;
  w.realization = realization_from_json(j.at("realization"));
  const std::string hp = j.value("halfplane", "upper");
  w.halfplane = hp == "lower" ? WeylFunction::Halfplane::Lower
                              : WeylFunction::Halfplane::Upper;
  w.bound_M = j.value("bound_M", 0.0);
  return w;
}

namespace {

const char* kind_name(DiracKind k) {
  switch (k) {
    case DiracKind::SelfAdjoint: return "pe";
    case DiracKind::GeneralizedPE: return "gpe";
    case DiracKind::SkewSelfAdjoint: return "pe2";
  }
  return "pe";
}

DiracKind kind_from(const std::string& s) {
  if (s == "pe") return DiracKind::SelfAdjoint;
  if (s == "gpe") return DiracKind::GeneralizedPE;
  if (s == "pe2") return DiracKind::SkewSelfAdjoint;
  throw ValidationError("unknown Dirac seed kind: " + s);
}

}  // namespace

Json to_json(const DiracSeed& s) {
  return Json{{"kind", kind_name(s.kind)}, {"p1", s.p1},          {"p2", s.p2},
              {"A", sized(s.A)},           {"S0", sized(s.S0)},   {"Phi1", sized(s.Phi1)},
              {"Phi2", sized(s.Phi2)}};
}

DiracSeed dirac_seed_from_json(const Json& j) {
  DiracSeed s;
  s.kind = kind_from(j.at("kind").get<std::string>());
  s.p1 = j.at("p1").get<int>();
  s.p2 = j.at("p2").get<int>();
  s.A = sized_from(j.at("A"));
  s.S0 = sized_from(j.at("S0"));
  s.Phi1 = sized_from(j.at("Phi1"));
  s.Phi2 = sized_from(j.at("Phi2"));
  return s;
}

Json to_json(const NWaveSeed& s) {
  return Json{{"n", s.n},           {"m", s.m},         {"A", sized(s.A)},
              {"S0", sized(s.S0)},  {"Pi0", sized(s.Pi0)}, {"D", to_json(s.D)},
              {"Dhat", to_json(s.Dhat)}, {"B", to_json(s.B)}};
}

NWaveSeed nwave_seed_from_json(const Json& j) {
  NWaveSeed s;
  s.n = j.at("n").get<int>();
  s.m = j.at("m").get<int>();
  s.A = sized_from(j.at("A"));
  s.S0 = sized_from(j.at("S0"));
  s.Pi0 = sized_from(j.at("Pi0"));
  s.D = realvec_from(j.at("D"));
  s.Dhat = realvec_from(j.at("Dhat"));
  s.B = j.contains("B") ? realvec_from(j.at("B")) : Eigen::VectorXd::Ones(s.m).eval();
  return s;
}

Json to_json(const NlsSeed& s) {
  Json a = Json::array(), f = Json::array();
  for (const Complex& v : s.a) a.push_back(Json::array({v.real(), v.imag()}));
  for (const auto& v : s.f)
    f.push_back(Json::array({Json::array({v(0).real(), v(0).imag()}),
                             Json::array({v(1).real(), v(1).imag()})}));
  return Json{{"background",
               s.background == NlsSeed::Background::Zero ? "zero" : "plane-wave"},
              {"a", a},
              {"f", f}};
}

NlsSeed nls_seed_from_json(const Json& j) {
  NlsSeed s;
  const std::string bg = j.at("background").get<std::string>();
  if (bg == "zero")
    s.background = NlsSeed::Background::Zero;
  else if (bg == "plane-wave")
    s.background = NlsSeed::Background::PlaneWave;
  else
    throw ValidationError("unknown NLS background: " + bg);
  for (const Json& v : j.at("a"))
    s.a.push_back(Complex(v[0].get<double>(), v[1].get<double>()));
  for (const Json& v : j.at("f"))
    s.f.push_back(Eigen::Vector2cd(
        Complex(v[0][0].get<double>(), v[0][1].get<double>()),
        Complex(v[1][0].get<double>(), v[1][1].get<double>())));
  return s;
}

Json to_json(const EllipticSeed& s) {
  return Json{{"variant",
               s.variant == EllipticSeed::Variant::SineGordon ? "sine-gordon"
                                                              : "sinh-gordon"},
              {"n", s.n},
              {"A", sized(s.A)},
              {"Pi0", sized(s.Pi0)},
              {"S0", sized(s.S0)},
              {"U", sized(s.U)}};
}

EllipticSeed elliptic_seed_from_json(const Json& j) {
  EllipticSeed s;
  const std::string v = j.at("variant").get<std::string>();
  if (v == "sine-gordon")
    s.variant = EllipticSeed::Variant::SineGordon;
  else if (v == "sinh-gordon")
    s.variant = EllipticSeed::Variant::SinhGordon;
  else
    throw ValidationError("unknown elliptic variant: " + v);
  s.n = j.at("n").get<int>();
  s.A = sized_from(j.at("A"));
  s.Pi0 = sized_from(j.at("Pi0"));
  s.S0 = sized_from(j.at("S0"));
  s.U = sized_from(j.at("U"));
  return s;
}

Json to_json(const RadialSeed& s) {
  return Json{{"kappa", s.kappa},    {"m", s.m},           {"A1", sized(s.A1)},
              {"S1", sized(s.S1)},   {"A2", sized(s.A2)},  {"Psi1", sized(s.Psi1)},
              {"Psi2", sized(s.Psi2)}};
}

RadialSeed radial_seed_from_json(const Json& j) {
  RadialSeed s;
  s.kappa = j.at("kappa").get<int>();
  s.m = j.at("m").get<int>();
  s.A1 = sized_from(j.at("A1"));
  s.S1 = sized_from(j.at("S1"));
  s.A2 = sized_from(j.at("A2"));
  s.Psi1 = sized_from(j.at("Psi1"));
  s.Psi2 = sized_from(j.at("Psi2"));
  return s;
}

Json to_json(const ChiralSeed& s) {
  return Json{{"A1", sized(s.A1)},     {"A2", sized(s.A2)}, {"S0", sized(s.S0)},
              {"Pi1_0", sized(s.Pi1_0)}, {"Pi2_0", sized(s.Pi2_0)}};
}

ChiralSeed chiral_seed_from_json(const Json& j) {
  ChiralSeed s;
  s.A1 = sized_from(j.at("A1"));
  s.A2 = sized_from(j.at("A2"));
  s.S0 = sized_from(j.at("S0"));
  s.Pi1_0 = sized_from(j.at("Pi1_0"));
  s.Pi2_0 = sized_from(j.at("Pi2_0"));
  return s;
}

Json to_json(const SNode& n) {
  return Json{{"A1", sized(n.A1)}, {"A2", sized(n.A2)}, {"S", sized(n.S)},
              {"Pi1", sized(n.Pi1)}, {"Pi2", sized(n.Pi2)}};
}

SNode snode_from_json(const Json& j) {
  return SNode(sized_from(j.at("A1")), sized_from(j.at("A2")), sized_from(j.at("S")),
               sized_from(j.at("Pi1")), sized_from(j.at("Pi2")));
}

Json to_json(const ResidualReport& r) {
  Json j{{"max_residual", r.max_residual}, {"h", r.h}, {"max_index", r.max_index}};
  if (std::isfinite(r.order)) j["order"] = r.order;
  return j;
}

std::string dump_deterministic(const Json& j) {
  return j.dump(2) + "\n";  // nlohmann::json objects already store sorted keys
}

}  // namespace gbdt
