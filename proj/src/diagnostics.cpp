#include "elicit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "elicit/error.hpp"
#include "elicit/simplex.hpp"
#include "elicit/special.hpp"

namespace elicit {

namespace {

// Normal scale for the lognormal target.
Family response_family(const Family& family) {
  return family.kind() == FamilyKind::lognormal_target ? Family::normal()
                                                       : family;
}

double draw_lambda(const PrecisionPrior& prior, RandomSource& rng) {
  if (prior.is_known()) return 1.0 / prior.phi();
  return rng.gamma(0.5 * prior.shape(), 0.5 * prior.rate());
}

}  // namespace

std::vector<kernels::MeanDraw> sample_mean_mc(const Family& family_in,
                                              double mu0, double w,
                                              const DispersionSpec& spec,
                                              std::size_t n,
                                              std::uint64_t seed,
                                              SampleMeanOptions options) {
  const Family family = response_family(family_in);
  require(w > 0 && std::isfinite(w), "sample mean: w must be positive");
  require(family.domain().interior(mu0), "sample mean: mu0 outside domain");
  const PrecisionPrior prior = spec.prior;

  if (family.kind() == FamilyKind::simplex) {
    require(options.acknowledge_no_convolution,
            "sample mean: simplex is not closed under convolution; set the "
            "acknowledgement flag to use S(mu0, w lambda)",
            ErrorKind::unsupported);
    if (prior.is_known()) {
      const double lambda = 1.0 / prior.phi();
      const auto sampler = std::make_shared<const SimplexSampler>(mu0, w * lambda);
      return kernels::draw_pairs(
          [sampler, lambda](RandomSource& rng) {
            return kernels::MeanDraw{sampler->sample(rng), lambda};
          },
          n, seed, options.backend);
    }
    // Mean first from its Studentised marginal, then lambda given the mean.
    const double s = prior.shape();
    const double r = prior.rate();
    const auto sampler =
        std::make_shared<const StudentisedSimplexSampler>(mu0, s, r / w);
    return kernels::draw_pairs(
        [sampler, s, r, w, mu0](RandomSource& rng) {
          const double mean = sampler->sample(rng);
          const double d = simplex_unit_deviance(mean, mu0);
          return kernels::MeanDraw{mean,
                                   rng.gamma(0.5 * (s + 1.0), 0.5 * (r + w * d))};
        },
        n, seed, options.backend);
  }

  if (family.kind() == FamilyKind::compound_poisson) {
    require(family.power().has_value(),
            "sample mean: compound Poisson power not yet known",
            ErrorKind::unsupported);
  }
  if (family.kind() == FamilyKind::binomial_proportion) {
    require(prior.is_known(),
            "sample mean: binomial proportion needs known dispersion",
            ErrorKind::unsupported);
  }
  return kernels::draw_pairs(
      [family, prior, mu0, w](RandomSource& rng) {
        const double lambda = draw_lambda(prior, rng);
        return kernels::MeanDraw{
            sample_ed_one(family, mu0, 1.0 / (w * lambda), rng), lambda};
      },
      n, seed, options.backend);
}

double dkw_epsilon(std::size_t n, double alpha) {
  require(n > 0, "DKW: need at least one sample");
  require(alpha > 0 && alpha < 1, "DKW: alpha must lie in (0, 1)");
  return std::sqrt(-std::log(0.5 * alpha) / (2.0 * static_cast<double>(n)));
}

double kolmogorov_distance(std::vector<double> sample,
                           const std::function<double(double)>& cdf) {
  require(!sample.empty(), "Kolmogorov distance: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double sup = 0.0;
  std::size_t i = 0;
  while (i < sample.size()) {
    std::size_t j = i;
    while (j + 1 < sample.size() && sample[j + 1] == sample[i]) ++j;
    const double f = cdf(sample[i]);
    sup = std::max({sup, static_cast<double>(j + 1) / n - f,
                    f - static_cast<double>(i) / n});
    i = j + 1;
  }
  return sup;
}

std::function<double(double)> sample_mean_t_cdf(const Family& family,
                                                double mu0, double w,
                                                const DispersionSpec& spec) {
  const double v_phi =
      spec.prior.ratio() * response_family(family).variance(mu0) / w;
  const double sd = std::sqrt(v_phi);
  const double s = spec.prior.shape();
  return [mu0, sd, s](double x) { return student_t_cdf((x - mu0) / sd, s); };
}

DiscrepancyReport discrepancy_report(
    const std::vector<kernels::MeanDraw>& pairs, const Family& family_in,
    double mu0, double w, const DispersionSpec& spec, double band_alpha,
    kernels::Backend backend) {
  require(pairs.size() >= 100, "discrepancy report: need N >= 100");
  const Family family = response_family(family_in);
  DiscrepancyReport report;
  report.n_samples = pairs.size();
  report.band_alpha = band_alpha;
  report.dkw_epsilon = dkw_epsilon(pairs.size(), band_alpha);

  std::vector<double> means(pairs.size());
  std::transform(pairs.begin(), pairs.end(), means.begin(),
                 [](const kernels::MeanDraw& d) { return d.mean; });
  report.kolmogorov =
      kolmogorov_distance(std::move(means), sample_mean_t_cdf(family, mu0, w, spec));

  if (!family.has_density()) {
    report.partial = true;
    return report;
  }
  const double v = family.variance(mu0);
  const Family normal = Family::normal();
  const std::vector<double> terms = kernels::map_terms(
      [&](std::size_t i) {
        const double x = pairs[i].mean;
        const double phi = 1.0 / (w * pairs[i].lambda);
        return family.logpdf(x, mu0, phi) - normal.logpdf(x, mu0, v * phi);
      },
      pairs.size(), backend);
  const double n = static_cast<double>(terms.size());
  double mean = 0.0;
  for (double t : terms) mean += t;
  mean /= n;
  double ss = 0.0;
  for (double t : terms) ss += (t - mean) * (t - mean);
  report.kl_estimate = mean;
  report.kl_stderr = std::sqrt(ss) / n;
  return report;
}

}  // namespace elicit
