#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "bistress/fields.hpp"
#include "bistress/manifold.hpp"
#include "bistress/parallel.hpp"
#include "bistress/quadrature.hpp"

namespace bistress {

enum class Tag { harmonic, proper_biharmonic, s2_zero, parallel_s2, s2_lambda_g };

std::string tag_name(Tag t);
std::string tags_to_string(const std::set<Tag>& tags);

struct ParamSpec {
    std::string name;
    double default_value;
    std::string range;  // human-readable constraint
};

struct CatalogEntry {
    std::string name;                     // registry id
    std::string instance;                 // id with the parameter values baked in
    SmoothMap map;
    std::map<std::string, double> params;
    std::set<Tag> expected;
    bool compact = false;
    int default_resolution = 0;           // cells per axis when compact
    double sample_margin = 0.1;           // box shrink fraction for sample points
    std::string statement;                // what this example demonstrates

    Point sample(SplitMix64& rng) const { return map.source->domain.sample(rng, sample_margin); }
    Point halton_sample(std::uint64_t index) const {
        return map.source->domain.halton_point(index, sample_margin);
    }
    QuadratureMesh mesh(int resolution_override = 0) const;
};

struct RegistryInfo {
    std::string name;
    std::string description;
    std::vector<ParamSpec> params;
};

const std::vector<RegistryInfo>& registry();

// Builds a catalog entry, validating the parameters. Unknown names raise
// UnknownEntryError, out-of-range values InvalidParamError.
CatalogEntry build(const std::string& name, const std::map<std::string, double>& params = {});

// All registry entries with default parameters.
std::vector<CatalogEntry> default_entries();

struct Classification {
    std::set<Tag> tags;
    std::map<std::string, double> residuals;
    std::vector<std::string> inconclusive;  // residuals inside the forbidden band
    double lambda = 0.0;

    bool is_inconclusive() const { return !inconclusive.empty(); }
};

// Pointwise sup-norm classification over deterministic sample points.
// Residuals below `tol_pass` assert a property, above `tol_reject` deny it;
// the band in between is reported as inconclusive rather than classified.
Classification classify(const CatalogEntry& entry, int n_samples = 40,
                        double tol_pass = 1e-6, double tol_reject = 1e-3,
                        Exec exec = Exec::parallel);

// classify() that throws InconclusiveError instead of reporting a band hit.
Classification classify_or_throw(const CatalogEntry& entry, int n_samples = 40,
                                 double tol_pass = 1e-6, double tol_reject = 1e-3,
                                 Exec exec = Exec::parallel);

// Checks the kind-specific map invariants (isometry for immersions, full
// rank for submersions) at sample points; throws on violation.
void validate_map(const CatalogEntry& entry, int n_samples = 10);

}  // namespace bistress
