#pragma once

#include "masterop/kernel.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace masterop {

inline constexpr std::uint64_t kDefaultSeed = 0xA11CE;

struct ParabolicCylinder {
    double R = 1.0;
    SpaceTimePoint center;

    /// |y - cx| <= R and |tau - ct| <= R^2; an empty center means the origin.
    bool contains(std::span<const double> y, double tau) const;
};

enum class Label { Interior, A, B, C, D, E, F };

std::string to_string(Label l);

struct RegionLabel {
    Label label = Label::Interior;
    /// Sector I_sign^j (1-based j) of y around x; Step 1 only, 0 when unset.
    int sector_j = 0;
    int sector_sign = 0;
    double delta = 0.0;
    double t0 = 0.0;
};

/// R^{-1/3}.
double region_delta(double R);
/// R^{3/2}.
double region_t0(double R);

struct Sector {
    int j = 1;
    int sign = 1;
};

/// j = argmax_k |y_k - x_k| (smallest k on ties), sign of y_j - x_j (+ on zero).
Sector sector_index(std::span<const double> y, std::span<const double> x);

/// Interior (the cylinder Q_R), A, B or C. Requires tau < t and t <= R^2.
RegionLabel classify_step1(std::span<const double> y, double tau, std::span<const double> x, double t, double R);

/// C, D, E or F for points outside Q_R. Requires tau < t.
RegionLabel classify_step2(std::span<const double> y, double tau, double t, double R);

/// Set-membership predicates written straight from the set definitions (with the same tie-breaks).
namespace membership {
bool interior(std::span<const double> y, double tau, double R);
bool step1_A(std::span<const double> y, double tau, std::span<const double> x, double t, double R);
bool step1_B(std::span<const double> y, double tau, std::span<const double> x, double t, double R);
bool region_C(std::span<const double> y, double tau, double R);
bool step2_D(std::span<const double> y, double tau, double t, double R);
bool step2_E(std::span<const double> y, double tau, double t, double R);
bool step2_F(std::span<const double> y, double tau, double t, double R);
} // namespace membership

struct PartitionReport {
    std::size_t samples = 0;
    std::size_t double_assignments = 0;
    std::size_t non_assignments = 0;
    /// Samples where the classifier disagrees with the unique true predicate.
    std::size_t mismatches = 0;
    std::array<std::size_t, 7> counts{};
    bool pass() const { return double_assignments == 0 && non_assignments == 0 && mismatches == 0; }
};

PartitionReport verify_partition_step1(std::span<const double> x, double t, double R, std::size_t samples,
                                       std::uint64_t seed = kDefaultSeed);
PartitionReport verify_partition_step2(int n, double t, double R, std::size_t samples,
                                       std::uint64_t seed = kDefaultSeed);

/// Sampled kernel-ratio check. Values are logs of ratios; pass iff max_log <= envelope_log.
struct RatioReport {
    std::string region;
    std::size_t samples = 0;
    double max_log = -std::numeric_limits<double>::infinity();
    double envelope_log = 0.0;
    /// Constant in the envelope (c of e^{-c/delta}, c of c|x|/R, ...).
    double constant = 0.0;
    bool pass = false;
    bool degenerate = false;
    std::string note;

    double max_ratio() const;
    double envelope() const;
};

/// Step-1 case |y-x| >= delta (t - tau): M(x-y)/M(x +- e_j/delta^2 - y) over A_R with the sector's shift.
/// Envelope exp(-c R^{1/3}) with c = 1/(2 sqrt n) - 3 delta / 8.
RatioReport verify_ratio_c1(std::span<const double> x, double t, double R, std::size_t samples,
                            std::uint64_t seed = kDefaultSeed);

struct C1Sweep {
    std::vector<double> R;
    std::vector<RatioReport> reports;
    bool strictly_decreasing = false;
};

C1Sweep verify_ratio_c1_sweep(std::span<const double> x, double t, const std::vector<double>& R_list,
                              std::size_t samples, std::uint64_t seed = kDefaultSeed);

struct C2C3Report {
    /// |log M(x-y)/M(-y)| on B_R against delta (|x|/2 + 3|x|^2/4).
    RatioReport c2;
    /// Same ratio on C_R against c |x| / R with c = (2 + |x|/R) / (4 (1 + t/R^2)).
    RatioReport c3;
};

C2C3Report verify_ratio_c2_c3(std::span<const double> x, double t, double R, std::size_t samples,
                              std::uint64_t seed = kDefaultSeed);

struct Step2Report {
    /// |log M(-y,-tau)/M(-y,t-tau)| on C_R and D_R; log of M(-y,t-tau)/M(-y,t+t0-tau) on E_R and F_R.
    RatioReport C, D, E, F;
    /// 10 R^{-1/2}, the coarse shape for F_R.
    double F_reference = 0.0;
    /// 10 e^{-sqrt R}, the coarse shape for E_R.
    double E_reference = 0.0;
    bool pass() const { return C.pass && D.pass && E.pass && F.pass; }
};

/// Requires |t| <= R^2 / 9.
Step2Report verify_ratio_step2(const KernelParams& p, double t, double R, std::size_t samples,
                               std::uint64_t seed = kDefaultSeed);

} // namespace masterop
