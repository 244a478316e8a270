#ifndef SPLITFIT_CONSOLIDATION_HPP
#define SPLITFIT_CONSOLIDATION_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "splitfit/model.hpp"

namespace splitfit {

/// Oedometric test kind: displacement-controlled relaxation (ORT) or
/// load-controlled compression (OCT).
enum class TestType { Relaxation, Compression };

struct OedometerGeometry {
    double drainage_height = 0.0;    ///< H, m (half-width of a double-drained sample)
    double oedometric_modulus = 0.0; ///< E_oed, kPa
    double displacement_load = 0.0;  ///< v0, m (ORT)
    double stress_load = 0.0;        ///< sigma0, kPa (OCT)
};

/// Cubic initial pore-pressure shape u(0,y) = A y^3 + B y^2 + C y.
/// No constant term, so u(0,0) = 0 automatically.
struct InitialCondition {
    double cubic = 0.0;     ///< A
    double quadratic = 0.0; ///< B
    double linear = 0.0;    ///< C
    /// Exact mean over [0, H]: A H^3/4 + B H^2/3 + C H/2.
    double mean(double H) const;
};

/// Empirical logarithmic relaxation term parameters. Two parameterizations:
/// the physical one (s with b = log10((t1+t3)/t1)) and the linearized one
/// (sk = s*sigma(0) with b pinned to zero).
struct RelaxationParams {
    double s = 0.0;
    double t1 = 0.0;
    double t3 = 0.0;
    double b = 0.0;
    bool sk_mode = false;
    double sk = 0.0;

    static RelaxationParams with_s(double s, double t1, double t3);
    static RelaxationParams with_sk(double sk, double t1, double t3);
};

/// Truncated coefficient set of the transient series: alpha_k for the
/// relaxation test (cosine-minus-one basis) or beta_k for the compression
/// test (odd sine basis). Underlying displacement coefficients follow the
/// stated relations a_k = alpha_k H/(k pi), b_k = -beta_k 2H/((2k-1) pi).
struct FourierSeries {
    TestType type = TestType::Relaxation;
    double H = 0.0;
    std::vector<double> coefficients;

    std::size_t size() const { return coefficients.size(); }
    /// a_k (ORT) or b_k (OCT) for k = 1..K.
    double displacement_coefficient(std::size_t k) const;
};

struct ConsolidationParams {
    OedometerGeometry geometry;
    InitialCondition initial;
    double consolidation_coefficient = 0.0; ///< c, m^2/s
    double sigma_inf = 0.0;                 ///< kPa
    std::optional<RelaxationParams> relaxation;

    /// D, the mean initial pore water pressure.
    double mean_initial_pressure() const { return initial.mean(geometry.drainage_height); }
};

/// Dimensionless time factor: c t / H^2 (relaxation) or c t / (4 H^2)
/// (compression).
double time_factor(double c, double t, double H, TestType type);

/// Asymptotic total stress of the relaxation stage, E_oed v0 / H.
double sigma_infinity(const OedometerGeometry& geom);

/// Series coefficients of the cubic initial condition: closed-form cosine
/// moments (ORT) or odd sine moments (OCT) of y, y^2, y^3 on (0, H).
FourierSeries fourier_coefficients(const InitialCondition& initial, double H, TestType type,
                                   std::size_t terms);

/// Pore water pressure u(t, y).
double pore_pressure(const ConsolidationParams& params, const FourierSeries& series, double t,
                     double y, TestType type);

/// Closed-form (1/H) * integral of u over (0, H); relaxation test only.
double mean_pore_pressure(const ConsolidationParams& params, const FourierSeries& series,
                          double t);

/// Relaxation stress correction; zero for t <= t3, continuous at t = t3.
double relaxation_term(const RelaxationParams& relax, double sigma0, double t);

/// Total stress response of the relaxation test:
/// sigma_inf + u_mean(t) - relaxation term (omitted when params carry none).
double total_stress(const ConsolidationParams& params, const FourierSeries& series, double t);

/// Displacement field: steady part plus the transient sine/cosine series.
double displacement_field(const ConsolidationParams& params, const FourierSeries& series,
                          double t, double y, TestType type);

/// Transient strain: -(u_mean - u)/E_oed for the relaxation test,
/// u/E_oed for the compression test.
double strain_field(const ConsolidationParams& params, const FourierSeries& series, double t,
                    double y, TestType type);

/// Nested model variants for identification. Linear / nonlinear parameters:
///   H    : {A, B, C, sigma_inf} / {c, s, t3, t1}
///   HCRT : {A, B, C, sigma_inf, sk} / {c, t3}   (t1 fixed, b = 0)
///   HCR  : {A, B, C, sigma_inf, sk} / {c}       (t1 fixed, t3 = 0)
///   HC   : {A, B, C, sigma_inf} / {c}           (no relaxation)
enum class ModelVersion { H, HCRT, HCR, HC };

ModelVersion parse_model_version(const std::string& tag);
std::string to_string(ModelVersion v);

/// Values pinned by the version.
struct VersionFixed {
    std::optional<double> t1; ///< required for HCRT and HCR
};

/// Assembles the version as a partly-linear ModelDefinition over the total
/// stress response. `bound_overrides` replaces the wide default interval of
/// the named parameters.
ModelDefinition build_model(ModelVersion version, const OedometerGeometry& geometry,
                            const VersionFixed& fixed, std::size_t terms,
                            const std::map<std::string, Interval>& bound_overrides = {});

} // namespace splitfit

#endif
