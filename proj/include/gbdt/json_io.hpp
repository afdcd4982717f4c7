// JSON (de)serialization: matrices as row-major nested arrays of [re, im]
// pairs; realizations, seeds of every system, and residual reports.
#ifndef GBDT_JSON_IO_HPP
#define GBDT_JSON_IO_HPP

#include <json.hpp>

#include "gbdt/dirac.hpp"
#include "gbdt/nonlinear.hpp"
#include "gbdt/radial.hpp"
#include "gbdt/realization.hpp"
#include "gbdt/residuals.hpp"
#include "gbdt/snode.hpp"

namespace gbdt {

using Json = nlohmann::json;

Json to_json(const CMat& m);
CMat cmat_from_json(const Json& j);

Json to_json(const Realization& r);
Realization realization_from_json(const Json& j);

Json to_json(const WeylFunction& w);
WeylFunction weyl_from_json(const Json& j);

Json to_json(const DiracSeed& s);
DiracSeed dirac_seed_from_json(const Json& j);

Json to_json(const NWaveSeed& s);
NWaveSeed nwave_seed_from_json(const Json& j);

Json to_json(const NlsSeed& s);
NlsSeed nls_seed_from_json(const Json& j);

Json to_json(const EllipticSeed& s);
EllipticSeed elliptic_seed_from_json(const Json& j);

Json to_json(const RadialSeed& s);
RadialSeed radial_seed_from_json(const Json& j);

Json to_json(const ChiralSeed& s);
ChiralSeed chiral_seed_from_json(const Json& j);

Json to_json(const SNode& n);
SNode snode_from_json(const Json& j);

Json to_json(const ResidualReport& r);

// Deterministic serialization (sorted keys, shortest round-trip numbers).
std::string dump_deterministic(const Json& j);

}  // namespace gbdt

#endif
