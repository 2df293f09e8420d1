#pragma once

#include "semigroup_spectra/model.hpp"

// Shared fixtures: the two bundled doubling models, built in code so the unit
// tests do not depend on the data files.
namespace fixtures {

inline sgs::SuspensionModel doubling_const() {
    using namespace sgs;
    std::vector<Branch> br;
    br.push_back({{0.0, 0.5}, Polynomial{{0.0, 2.0}}, true});
    br.push_back({{0.5, 1.0}, Polynomial{{-1.0, 2.0}}, true});
    BranchedMap1D base(br);
    std::vector<RoofPiece> rp;
    rp.push_back({{0.0, 0.5}, Polynomial::constant(1.0)});
    rp.push_back({{0.5, 1.0}, Polynomial::constant(1.0)});
    RoofFunction roof(rp);
    return SuspensionModel(std::move(base), std::move(roof), std::log(2.0), 0.1);
}

inline sgs::SuspensionModel doubling_perturbed() {
    using namespace sgs;
    std::vector<Branch> br;
    br.push_back({{0.0, 0.5}, Polynomial{{0.0, 2.0}}, true});
    br.push_back({{0.5, 1.0}, Polynomial{{-1.0, 2.0}}, true});
    BranchedMap1D base(br);
    Polynomial cubic{{1.0, 3.117691453623979, -9.353074360871937, 6.235382907247958}};
    std::vector<RoofPiece> rp;
    rp.push_back({{0.0, 0.5}, cubic});
    rp.push_back({{0.5, 1.0}, cubic});
    RoofFunction roof(rp);
    return SuspensionModel(std::move(base), std::move(roof), 0.55, 0.1);
}

} // namespace fixtures
