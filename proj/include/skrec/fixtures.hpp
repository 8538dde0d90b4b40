#ifndef SKREC_FIXTURES_HPP
#define SKREC_FIXTURES_HPP

// Bundled example curves used by the validation suites and the CLI.  Each is
// small enough to run in seconds yet exercises a distinct regime: genus 1
// with two period normalizations, genus 2, and a two-sheet tower model.

#include <string>
#include <vector>

#include "skrec/curves.hpp"

namespace skrec {

struct Fixture {
    std::string name;
    std::string summary;
    CurveModel model;
};

const std::vector<Fixture>& bundled_fixtures();

// Throws std::out_of_range for unknown names.
const Fixture& fixture_by_name(const std::string& name);

} // namespace skrec

#endif // SKREC_FIXTURES_HPP
