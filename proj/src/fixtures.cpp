#include "skrec/fixtures.hpp"

#include <stdexcept>

namespace skrec {

const std::vector<Fixture>& bundled_fixtures() {
    static const std::vector<Fixture> fx = [] {
        std::vector<Fixture> v;
        v.push_back({"genus1_quartic_roots",
                     "y^2 = x^4 - 1: square period lattice, j = 1728",
                     CurveModel::hyperelliptic(Poly({cplx{-1.0}, {}, {}, {}, cplx{1.0}}))});
        v.push_back({"genus1_legendre",
                     "y^2 = (x^2 - 1)(x^2 - 4): real branch points, rational j",
                     CurveModel::hyperelliptic(Poly({cplx{4.0}, {}, cplx{-5.0}, {}, cplx{1.0}}))});
        v.push_back({"genus2_sextic",
                     "y^2 = x^6 - 1: hexagonal symmetry, genus 2",
                     CurveModel::hyperelliptic(
                         Poly({cplx{-1.0}, {}, {}, {}, {}, {}, cplx{1.0}}))});
        v.push_back({"tower_gl2_genus2",
                     "w^2 = x^6 - 1, v^2 = x^2 - 4, theta = (-alpha/2 + v) dx / w: genus 5 tower",
                     CurveModel::tower(Poly({cplx{-1.0}, {}, {}, {}, {}, {}, cplx{1.0}}),
                                       Poly({cplx{1.0 / 3.0}, cplx{0.5}}),
                                       Poly({cplx{-4.0}, {}, cplx{1.0}}))});
        return v;
    }();
    return fx;
}

const Fixture& fixture_by_name(const std::string& name) {
    for (const Fixture& f : bundled_fixtures())
        if (f.name == name) return f;
    throw std::out_of_range("unknown fixture: " + name);
}

} // namespace skrec
