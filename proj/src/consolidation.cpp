#include "splitfit/consolidation.hpp"

#include <cmath>

namespace splitfit {

namespace {

constexpr double kPi = 3.14159265358979323846;
/// Early-exit threshold of the series summation relative to the running sum.
constexpr double kSeriesExit = 1e-14;

void check_geometry(const OedometerGeometry& g) {
    if (!(g.drainage_height > 0.0)) throw InvalidArgument("drainage height H must be positive");
    if (!(g.oedometric_modulus > 0.0))
        throw InvalidArgument("oedometric modulus must be positive");
}

/// Terms may vanish at even k, so two consecutive negligible terms are
/// required before truncating. No decay at T = 0: the full length is summed.
struct SeriesAccumulator {
    double sum = 0.0;
    int tiny_streak = 0;
    bool decaying = false;

    explicit SeriesAccumulator(double T) : decaying(T > 0.0) {}

    /// Returns false when summation should stop.
    bool add(double term) {
        sum += term;
        if (!decaying) return true;
        if (std::abs(term) <= kSeriesExit * std::abs(sum)) {
            if (++tiny_streak >= 2) return false;
        } else {
            tiny_streak = 0;
        }
        return true;
    }
};

} // namespace

double InitialCondition::mean(double H) const {
    return cubic * H * H * H / 4.0 + quadratic * H * H / 3.0 + linear * H / 2.0;
}

RelaxationParams RelaxationParams::with_s(double s, double t1, double t3) {
    if (!(t1 > 0.0)) throw InvalidArgument("relaxation delay time t1 must be positive");
    if (t3 < 0.0) throw InvalidArgument("relaxation pause t3 must be nonnegative");
    RelaxationParams r;
    r.s = s;
    r.t1 = t1;
    r.t3 = t3;
    r.b = std::log10((t1 + t3) / t1);
    if (std::abs(1.0 - r.s * r.b) < 1e-14)
        throw InvalidArgument("relaxation parameters hit the singular denominator s*b = 1");
    return r;
}

RelaxationParams RelaxationParams::with_sk(double sk, double t1, double t3) {
    if (!(t1 > 0.0)) throw InvalidArgument("relaxation delay time t1 must be positive");
    if (t3 < 0.0) throw InvalidArgument("relaxation pause t3 must be nonnegative");
    RelaxationParams r;
    r.t1 = t1;
    r.t3 = t3;
    r.b = 0.0;
    r.sk_mode = true;
    r.sk = sk;
    return r;
}

double FourierSeries::displacement_coefficient(std::size_t k) const {
    if (k < 1 || k > coefficients.size())
        throw InvalidArgument("displacement coefficient index out of range");
    const double kk = static_cast<double>(k);
    if (type == TestType::Relaxation) return coefficients[k - 1] * H / (kk * kPi);
    return -coefficients[k - 1] * 2.0 * H / ((2.0 * kk - 1.0) * kPi);
}

double time_factor(double c, double t, double H, TestType type) {
    if (!(c > 0.0)) throw InvalidArgument("consolidation coefficient must be positive");
    if (!(H > 0.0)) throw InvalidArgument("drainage height must be positive");
    if (t < 0.0) throw InvalidArgument("time must be nonnegative");
    return type == TestType::Relaxation ? c * t / (H * H) : c * t / (4.0 * H * H);
}

double sigma_infinity(const OedometerGeometry& geom) {
    check_geometry(geom);
    return geom.oedometric_modulus * geom.displacement_load / geom.drainage_height;
}

FourierSeries fourier_coefficients(const InitialCondition& initial, double H, TestType type,
                                   std::size_t terms) {
    if (terms < 1) throw InvalidArgument("series needs at least one term");
    if (!(H > 0.0)) throw InvalidArgument("drainage height must be positive");

    const double A = initial.cubic;
    const double B = initial.quadratic;
    const double C = initial.linear;

    FourierSeries out;
    out.type = type;
    out.H = H;
    out.coefficients.resize(terms);

    for (std::size_t k = 1; k <= terms; ++k) {
        double coeff;
        if (type == TestType::Relaxation) {
            // Cosine moments of y, y^2, y^3 on (0, H).
            const double lam = static_cast<double>(k) * kPi / H;
            const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
            const double i1 = (sgn - 1.0) / (lam * lam);
            const double i2 = 2.0 * H * sgn / (lam * lam);
            const double i3 = 3.0 * H * H * sgn / (lam * lam) - 6.0 * (sgn - 1.0) / (lam * lam * lam * lam);
            coeff = (2.0 / H) * (A * i3 + B * i2 + C * i1);
        } else {
            // Odd sine moments of y, y^2, y^3 on (0, H).
            const double mu = (2.0 * static_cast<double>(k) - 1.0) * kPi / (2.0 * H);
            const double sgn = (k % 2 == 0) ? -1.0 : 1.0; // (-1)^(k+1)
            const double j1 = sgn / (mu * mu);
            const double j2 = 2.0 * H * sgn / (mu * mu) - 2.0 / (mu * mu * mu);
            const double j3 = sgn * (3.0 * H * H / (mu * mu) - 6.0 / (mu * mu * mu * mu));
            coeff = (2.0 / H) * (A * j3 + B * j2 + C * j1);
        }
        out.coefficients[k - 1] = coeff;
    }
    return out;
}

double pore_pressure(const ConsolidationParams& params, const FourierSeries& series, double t,
                     double y, TestType type) {
    const double H = params.geometry.drainage_height;
    check_geometry(params.geometry);
    if (y < 0.0 || y > H) throw InvalidArgument("depth y outside [0, H]");
    const double T = time_factor(params.consolidation_coefficient, t, H, type);

    SeriesAccumulator acc(T);
    if (type == TestType::Relaxation) {
        for (std::size_t k = 1; k <= series.size(); ++k) {
            const double kk = static_cast<double>(k);
            const double term = series.coefficients[k - 1] *
                                (std::cos(kk * kPi * y / H) - 1.0) *
                                std::exp(-kk * kk * kPi * kPi * T);
            if (!acc.add(term)) break;
        }
    } else {
        for (std::size_t k = 1; k <= series.size(); ++k) {
            const double n = 2.0 * static_cast<double>(k) - 1.0;
            const double term = series.coefficients[k - 1] *
                                std::sin(n * kPi * y / (2.0 * H)) *
                                std::exp(-n * n * kPi * kPi * T);
            if (!acc.add(term)) break;
        }
    }
    return acc.sum;
}

double mean_pore_pressure(const ConsolidationParams& params, const FourierSeries& series,
                          double t) {
    check_geometry(params.geometry);
    if (series.type != TestType::Relaxation)
        throw InvalidArgument("mean pore pressure is defined for the relaxation test");
    const double H = params.geometry.drainage_height;
    const double T = time_factor(params.consolidation_coefficient, t, H, TestType::Relaxation);

    // The cosine integrates to zero over (0, H); only the -1 part survives.
    SeriesAccumulator acc(T);
    for (std::size_t k = 1; k <= series.size(); ++k) {
        const double kk = static_cast<double>(k);
        const double term = -series.coefficients[k - 1] * std::exp(-kk * kk * kPi * kPi * T);
        if (!acc.add(term)) break;
    }
    return acc.sum;
}

double relaxation_term(const RelaxationParams& relax, double sigma0, double t) {
    if (t <= relax.t3) return 0.0;
    const double shape = std::log10((t + relax.t1) / (relax.t1 + relax.t3));
    if (relax.sk_mode) return relax.sk * shape;
    const double denom = 1.0 - relax.s * relax.b;
    if (std::abs(denom) < 1e-14)
        throw InvalidArgument("relaxation term is singular: s*b = 1");
    return relax.s * sigma0 * shape / denom;
}

double total_stress(const ConsolidationParams& params, const FourierSeries& series, double t) {
    check_geometry(params.geometry);
    if (series.type != TestType::Relaxation)
        throw InvalidArgument("total stress response is defined for the relaxation test");
    const double H = params.geometry.drainage_height;
    const double T = time_factor(params.consolidation_coefficient, t, H, TestType::Relaxation);

    // Transient part: equal to the mean pore pressure. Summed here with the
    // same term order so the identity can be checked against
    // mean_pore_pressure as a second code path.
    SeriesAccumulator acc(T);
    for (std::size_t k = 1; k <= series.size(); ++k) {
        const double kk = static_cast<double>(k);
        const double term = -series.coefficients[k - 1] * std::exp(-kk * kk * kPi * kPi * T);
        if (!acc.add(term)) break;
    }

    double sigma = params.sigma_inf + acc.sum;
    if (params.relaxation) {
        const double sigma0 = params.sigma_inf + params.mean_initial_pressure();
        sigma -= relaxation_term(*params.relaxation, sigma0, t);
    }
    return sigma;
}

double displacement_field(const ConsolidationParams& params, const FourierSeries& series,
                          double t, double y, TestType type) {
    check_geometry(params.geometry);
    const double H = params.geometry.drainage_height;
    const double E = params.geometry.oedometric_modulus;
    if (y < 0.0 || y > H) throw InvalidArgument("depth y outside [0, H]");
    const double T = time_factor(params.consolidation_coefficient, t, H, type);

    double steady;
    SeriesAccumulator acc(T);
    if (type == TestType::Relaxation) {
        steady = params.geometry.displacement_load * (1.0 - y / H);
        for (std::size_t k = 1; k <= series.size(); ++k) {
            const double kk = static_cast<double>(k);
            const double term = series.displacement_coefficient(k) *
                                std::sin(kk * kPi * y / H) *
                                std::exp(-kk * kk * kPi * kPi * T);
            if (!acc.add(term)) break;
        }
    } else {
        steady = params.geometry.stress_load * (H - y) / E;
        for (std::size_t k = 1; k <= series.size(); ++k) {
            const double n = 2.0 * static_cast<double>(k) - 1.0;
            const double term = series.displacement_coefficient(k) *
                                std::cos(n * kPi * y / (2.0 * H)) *
                                std::exp(-n * n * kPi * kPi * T);
            if (!acc.add(term)) break;
        }
    }
    // The stated coefficient relations carry pressure units; the modulus
    // converts the transient series to a length so that eps = dv/dy matches
    // the strain field and the equilibrium equation.
    return steady + acc.sum / E;
}

double strain_field(const ConsolidationParams& params, const FourierSeries& series, double t,
                    double y, TestType type) {
    const double E = params.geometry.oedometric_modulus;
    const double u = pore_pressure(params, series, t, y, type);
    if (type == TestType::Relaxation) {
        const double um = mean_pore_pressure(params, series, t);
        return -(um - u) / E;
    }
    return u / E;
}

ModelVersion parse_model_version(const std::string& tag) {
    if (tag == "H") return ModelVersion::H;
    if (tag == "HCRT") return ModelVersion::HCRT;
    if (tag == "HCR") return ModelVersion::HCR;
    if (tag == "HC") return ModelVersion::HC;
    throw InvalidArgument("unknown model version '" + tag + "'");
}

std::string to_string(ModelVersion v) {
    switch (v) {
        case ModelVersion::H: return "H";
        case ModelVersion::HCRT: return "HCRT";
        case ModelVersion::HCR: return "HCR";
        case ModelVersion::HC: return "HC";
    }
    return "?";
}

namespace {

struct VersionLayout {
    std::vector<std::string> names;
    std::size_t linear_count = 0;
};

VersionLayout version_layout(ModelVersion v) {
    switch (v) {
        case ModelVersion::H:
            return {{"A", "B", "C", "sigma_inf", "c", "s", "t3", "t1"}, 4};
        case ModelVersion::HCRT:
            return {{"A", "B", "C", "sigma_inf", "sk", "c", "t3"}, 5};
        case ModelVersion::HCR:
            return {{"A", "B", "C", "sigma_inf", "sk", "c"}, 5};
        case ModelVersion::HC:
            return {{"A", "B", "C", "sigma_inf", "c"}, 4};
    }
    throw InvalidArgument("unknown model version");
}

Interval default_bound(const std::string& name) {
    if (name == "c") return {1e-12, 1e6};
    if (name == "t1") return {1e-9, 1e12};
    if (name == "t3") return {0.0, 1e12};
    if (name == "s") return {-10.0, 10.0};
    return {-1e6, 1e6};
}

/// Decayed moment sum -sum_k m_k exp(-k^2 pi^2 T); the transient response of
/// a unit initial-condition monomial.
double decayed_sum(const std::vector<double>& moments, double T) {
    SeriesAccumulator acc(T);
    for (std::size_t k = 1; k <= moments.size(); ++k) {
        const double kk = static_cast<double>(k);
        const double term = -moments[k - 1] * std::exp(-kk * kk * kPi * kPi * T);
        if (!acc.add(term)) break;
    }
    return acc.sum;
}

double log_shape(double t, double t1, double t3) {
    if (t <= t3) return 0.0;
    return std::log10((t + t1) / (t1 + t3));
}

} // namespace

ModelDefinition build_model(ModelVersion version, const OedometerGeometry& geometry,
                            const VersionFixed& fixed, std::size_t terms,
                            const std::map<std::string, Interval>& bound_overrides) {
    check_geometry(geometry);
    if (terms < 1) throw InvalidArgument("series needs at least one term");
    if ((version == ModelVersion::HCRT || version == ModelVersion::HCR) && !fixed.t1)
        throw InvalidArgument(to_string(version) + " requires a fixed t1 value");
    if (fixed.t1 && !(*fixed.t1 > 0.0))
        throw InvalidArgument("fixed t1 must be positive");

    const VersionLayout layout = version_layout(version);
    const std::size_t m = layout.names.size();

    ModelDefinition model;
    model.parameter_count = m;
    model.parameter_names = layout.names;
    {
        std::vector<std::size_t> lin(layout.linear_count);
        std::vector<std::size_t> nl(m - layout.linear_count);
        for (std::size_t i = 0; i < lin.size(); ++i) lin[i] = i;
        for (std::size_t i = 0; i < nl.size(); ++i) nl[i] = layout.linear_count + i;
        model.split = ParameterSplit(std::move(lin), std::move(nl));
    }
    model.domain.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto it = bound_overrides.find(layout.names[i]);
        model.domain[i] = it != bound_overrides.end() ? it->second : default_bound(layout.names[i]);
    }

    const double H = geometry.drainage_height;
    // Unit moment vectors for A = 1, B = 1, C = 1; alpha(A,B,C) is their
    // linear combination.
    const std::vector<double> mA =
        fourier_coefficients({1.0, 0.0, 0.0}, H, TestType::Relaxation, terms).coefficients;
    const std::vector<double> mB =
        fourier_coefficients({0.0, 1.0, 0.0}, H, TestType::Relaxation, terms).coefficients;
    const std::vector<double> mC =
        fourier_coefficients({0.0, 0.0, 1.0}, H, TestType::Relaxation, terms).coefficients;
    const double dA = InitialCondition{1.0, 0.0, 0.0}.mean(H);
    const double dB = InitialCondition{0.0, 1.0, 0.0}.mean(H);
    const double dC = InitialCondition{0.0, 0.0, 1.0}.mean(H);

    const double t1_fixed = fixed.t1.value_or(0.0);

    // Physical route: assemble ConsolidationParams from the full vector and
    // evaluate the closed-form stress. Kept independent of the basis route.
    model.evaluate = [version, geometry, terms, t1_fixed](double t, std::span<const double> p) {
        ConsolidationParams cp;
        cp.geometry = geometry;
        cp.initial = {p[0], p[1], p[2]};
        cp.sigma_inf = p[3];
        switch (version) {
            case ModelVersion::H:
                cp.consolidation_coefficient = p[4];
                cp.relaxation = RelaxationParams::with_s(p[5], p[7], p[6]);
                break;
            case ModelVersion::HCRT:
                cp.consolidation_coefficient = p[5];
                cp.relaxation = RelaxationParams::with_sk(p[4], t1_fixed, p[6]);
                break;
            case ModelVersion::HCR:
                cp.consolidation_coefficient = p[5];
                cp.relaxation = RelaxationParams::with_sk(p[4], t1_fixed, 0.0);
                break;
            case ModelVersion::HC:
                cp.consolidation_coefficient = p[4];
                break;
        }
        const FourierSeries series =
            fourier_coefficients(cp.initial, geometry.drainage_height, TestType::Relaxation, terms);
        return total_stress(cp, series, t);
    };

    model.basis = [version, H, mA, mB, mC, dA, dB, dC, t1_fixed](
                      double t, std::span<const double> p2) -> std::vector<double> {
        const double c = p2[0];
        const double T = c * t / (H * H);
        const double fa = decayed_sum(mA, T);
        const double fb = decayed_sum(mB, T);
        const double fc = decayed_sum(mC, T);
        switch (version) {
            case ModelVersion::H: {
                const double s = p2[1];
                const double t3 = p2[2];
                const double t1 = p2[3];
                if (!(t1 > 0.0) || t3 < 0.0)
                    throw InvalidArgument("relaxation times out of range in basis evaluation");
                const double b = std::log10((t1 + t3) / t1);
                const double denom = 1.0 - s * b;
                if (std::abs(denom) < 1e-14)
                    throw InvalidArgument("relaxation term is singular: s*b = 1");
                const double r = s / denom;
                const double shape = log_shape(t, t1, t3);
                return {fa - r * dA * shape, fb - r * dB * shape, fc - r * dC * shape,
                        1.0 - r * shape};
            }
            case ModelVersion::HCRT: {
                const double t3 = p2[1];
                if (t3 < 0.0) throw InvalidArgument("t3 must be nonnegative");
                return {fa, fb, fc, 1.0, -log_shape(t, t1_fixed, t3)};
            }
            case ModelVersion::HCR:
                return {fa, fb, fc, 1.0, -log_shape(t, t1_fixed, 0.0)};
            case ModelVersion::HC:
                return {fa, fb, fc, 1.0};
        }
        throw InvalidArgument("unknown model version");
    };

    model.validate();
    return model;
}

} // namespace splitfit
