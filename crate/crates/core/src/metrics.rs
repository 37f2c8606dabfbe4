//! Distributions of traffic descriptors: log-binned densities, CCDFs and
//! discrete power-law fits.

use crate::error::{Error, Result};

/// Default geometric bin ratio, ten bins per decade.
pub fn default_bin_ratio() -> f64 {
    10f64.powf(0.1)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    pub density: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogBinnedHistogram {
    pub ratio: f64,
    pub bins: Vec<Bin>,
}

impl LogBinnedHistogram {
    pub fn total(&self) -> u64 {
        self.bins.iter().map(|b| b.count).sum()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> std::io::Result<()> {
        write_bins_csv(&self.bins, out)
    }
}

pub fn write_bins_csv<W: std::io::Write>(bins: &[Bin], mut out: W) -> std::io::Result<()> {
    writeln!(out, "bin_lo,bin_hi,count,density")?;
    for b in bins {
        writeln!(out, "{},{},{},{}", b.lo, b.hi, b.count, b.density)?;
    }
    Ok(())
}

/// Geometric binning `[r^k, r^(k+1))` starting at 1. Zeros, which show up
/// for session depths, go to an extra leading `[0, 1)` bin.
pub fn histogram(samples: &[u64], ratio: f64) -> Result<LogBinnedHistogram> {
    if samples.is_empty() {
        return Err(Error::Data("histogram of an empty sample".into()));
    }
    if !(ratio > 1.0 && ratio.is_finite()) {
        return Err(Error::config(format!("bin ratio {ratio} must be > 1")));
    }
    let max = *samples.iter().max().unwrap() as f64;

    let mut edges = vec![1.0f64];
    let mut k = 1;
    while *edges.last().unwrap() <= max {
        let next = ratio.powi(k);
        k += 1;
        if next > *edges.last().unwrap() {
            edges.push(next);
        }
    }
    let mut counts = vec![0u64; edges.len() - 1];
    let mut zeros = 0u64;
    for &x in samples {
        if x == 0 {
            zeros += 1;
            continue;
        }
        let x = x as f64;
        // last edge <= x
        let i = edges.partition_point(|&e| e <= x) - 1;
        counts[i] += 1;
    }

    let total = samples.len() as f64;
    let mut bins = Vec::with_capacity(counts.len() + 1);
    if zeros > 0 {
        bins.push(Bin {
            lo: 0.0,
            hi: 1.0,
            count: zeros,
            density: zeros as f64 / total,
        });
    }
    for (i, &count) in counts.iter().enumerate() {
        let (lo, hi) = (edges[i], edges[i + 1]);
        bins.push(Bin {
            lo,
            hi,
            count,
            density: count as f64 / ((hi - lo) * total),
        });
    }
    Ok(LogBinnedHistogram { ratio, bins })
}

/// Equal-width bins over `[0, width·⌈max/width⌉]`, for real-valued samples
/// such as entropies.
pub fn linear_histogram(samples: &[f64], width: f64) -> Result<Vec<Bin>> {
    if samples.is_empty() {
        return Err(Error::Data("histogram of an empty sample".into()));
    }
    if width.is_nan() || width <= 0.0 {
        return Err(Error::config("bin width must be > 0"));
    }
    if samples.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::Data("samples must be finite and non-negative".into()));
    }
    let max = samples.iter().cloned().fold(0.0, f64::max);
    let nbins = ((max / width).floor() as usize) + 1;
    let mut counts = vec![0u64; nbins];
    for &x in samples {
        counts[((x / width).floor() as usize).min(nbins - 1)] += 1;
    }
    let total = samples.len() as f64;
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| Bin {
            lo: i as f64 * width,
            hi: (i + 1) as f64 * width,
            count,
            density: count as f64 / (width * total),
        })
        .collect())
}

/// `(value, P(X >= value))` for each distinct value, ascending.
pub fn ccdf<T: Copy + PartialOrd>(samples: &[T]) -> Vec<(T, f64)> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("unordered sample"));
    let n = sorted.len() as f64;
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        out.push((v, (sorted.len() - i) as f64 / n));
        while i < sorted.len() && sorted[i] == v {
            i += 1;
        }
    }
    out
}

/// `P(X >= x)` read off a CCDF table.
pub fn ccdf_at(table: &[(f64, f64)], x: f64) -> f64 {
    let i = table.partition_point(|&(v, _)| v < x);
    table.get(i).map_or(0.0, |&(_, p)| p)
}

/// Kolmogorov–Smirnov distance between two distributions given as CCDFs.
pub fn ks_statistic(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    a.iter()
        .chain(b)
        .map(|&(x, _)| (ccdf_at(a, x) - ccdf_at(b, x)).abs())
        .fold(0.0, f64::max)
}

/// Mean of the distribution behind a CCDF table.
pub fn ccdf_mean(table: &[(f64, f64)]) -> f64 {
    table
        .iter()
        .enumerate()
        .map(|(i, &(v, p))| {
            let next = table.get(i + 1).map_or(0.0, |&(_, q)| q);
            v * (p - next)
        })
        .sum()
}

/// Shannon entropy in bits of a vector of counts. The result does not
/// depend on the order of the counts.
pub fn entropy_bits<I: IntoIterator<Item = u64>>(counts: I) -> f64 {
    let mut counts: Vec<u64> = counts.into_iter().filter(|&c| c > 0).collect();
    // hash-map iteration order must not leak into the summation order
    counts.sort_unstable();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    let s: f64 = counts
        .iter()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum();
    s.max(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub xmin: u64,
    pub n_tail: usize,
    /// `(alpha - 1) / sqrt(n_tail)`
    pub stderr: f64,
}

pub const MIN_TAIL: usize = 10;

fn tail(samples: &[u64], xmin: u64) -> Result<Vec<u64>> {
    if xmin < 1 {
        return Err(Error::Stats("xmin must be at least 1".into()));
    }
    let tail: Vec<u64> = samples.iter().copied().filter(|&x| x >= xmin).collect();
    if tail.len() < MIN_TAIL {
        return Err(Error::Stats(format!(
            "{} samples >= {xmin}, need at least {MIN_TAIL}",
            tail.len()
        )));
    }
    if tail.iter().all(|&x| x == tail[0]) {
        return Err(Error::Stats("degenerate tail: all samples equal".into()));
    }
    Ok(tail)
}

/// Closed-form approximation `1 + n / Σ ln(x / (xmin - 1/2))` of the discrete
/// maximum-likelihood exponent. Biased low for small `xmin`.
pub fn fit_power_law_approx(samples: &[u64], xmin: u64) -> Result<PowerLawFit> {
    let tail = tail(samples, xmin)?;
    let shift = xmin as f64 - 0.5;
    let s: f64 = tail.iter().map(|&x| (x as f64 / shift).ln()).sum();
    let n = tail.len();
    let alpha = 1.0 + n as f64 / s;
    Ok(PowerLawFit {
        alpha,
        xmin,
        n_tail: n,
        stderr: (alpha - 1.0) / (n as f64).sqrt(),
    })
}

/// Discrete power-law exponent by maximizing the exact likelihood
/// `P(x) = x^-alpha / ζ(alpha, xmin)` over the samples `>= xmin`.
pub fn fit_power_law(samples: &[u64], xmin: u64) -> Result<PowerLawFit> {
    let tail = tail(samples, xmin)?;
    let n = tail.len() as f64;
    let sum_ln: f64 = tail.iter().map(|&x| (x as f64).ln()).sum();
    let alpha = mle_alpha(n, sum_ln, xmin as f64)?;
    Ok(PowerLawFit {
        alpha,
        xmin,
        n_tail: tail.len(),
        stderr: (alpha - 1.0) / n.sqrt(),
    })
}

fn mle_alpha(n: f64, sum_ln: f64, q: f64) -> Result<f64> {
    let neg_loglik = |a: f64| a * sum_ln + n * hurwitz_zeta(a, q).ln();

    // the likelihood is log-concave in alpha; golden-section on a bracket
    let (mut lo, mut hi) = (1.0 + 1e-9, 2.0);
    while neg_loglik(hi * 1.5) < neg_loglik(hi) {
        hi *= 1.5;
        if hi > 1e3 {
            return Err(Error::Stats("exponent does not converge".into()));
        }
    }
    hi *= 1.5;
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (neg_loglik(x1), neg_loglik(x2));
    while hi - lo > 1e-10 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = neg_loglik(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = neg_loglik(x2);
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Smallest tail considered by [`fit_power_law_auto`].
pub const AUTO_MIN_TAIL: usize = 50;

/// Kolmogorov–Smirnov distance between the empirical CCDF of the samples
/// `>= fit.xmin` and the fitted discrete power law.
pub fn power_law_ks(samples: &[u64], fit: &PowerLawFit) -> f64 {
    let mut tail: Vec<u64> = samples.iter().copied().filter(|&x| x >= fit.xmin).collect();
    tail.sort_unstable();
    let (values, above) = distinct_suffix_counts(&tail);
    tail_ks(&values, &above, tail.len(), fit.alpha, fit.xmin)
}

/// Distinct sorted values and, for each, the number of samples `>=` it.
fn distinct_suffix_counts(sorted: &[u64]) -> (Vec<u64>, Vec<usize>) {
    let mut values = Vec::new();
    let mut above = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        if values.last() != Some(&x) {
            values.push(x);
            above.push(sorted.len() - i);
        }
    }
    (values, above)
}

fn tail_ks(values: &[u64], above: &[usize], n: usize, alpha: f64, xmin: u64) -> f64 {
    let z0 = hurwitz_zeta(alpha, xmin as f64);
    values
        .iter()
        .zip(above)
        .filter(|(&x, _)| x >= xmin)
        .map(|(&x, &c)| (c as f64 / n as f64 - hurwitz_zeta(alpha, x as f64) / z0).abs())
        .fold(0.0, f64::max)
}

/// Exact-likelihood fit with `xmin` chosen to minimize the KS distance
/// between the tail and the fitted law. Candidates are the distinct sample
/// values leaving at least [`AUTO_MIN_TAIL`] samples and two distinct
/// values in the tail, thinned to at most one per 1% of scale.
pub fn fit_power_law_auto(samples: &[u64]) -> Result<PowerLawFit> {
    let mut sorted: Vec<u64> = samples.iter().copied().filter(|&x| x >= 1).collect();
    sorted.sort_unstable();
    let (values, above) = distinct_suffix_counts(&sorted);
    // suffix sums of ln x over the sorted samples
    let mut suffix_ln = vec![0.0; sorted.len() + 1];
    for i in (0..sorted.len()).rev() {
        suffix_ln[i] = suffix_ln[i + 1] + (sorted[i] as f64).ln();
    }

    let mut best: Option<(f64, PowerLawFit)> = None;
    let mut last = 0u64;
    for (k, (&xmin, &n)) in values.iter().zip(&above).enumerate() {
        if n < AUTO_MIN_TAIL || k + 1 >= values.len() {
            break;
        }
        if last > 0 && (xmin as f64) < last as f64 * 1.01 {
            continue;
        }
        last = xmin;
        let alpha = mle_alpha(n as f64, suffix_ln[sorted.len() - n], xmin as f64)?;
        let ks = tail_ks(&values[k..], &above[k..], n, alpha, xmin);
        if best.as_ref().is_none_or(|(b, _)| ks < *b) {
            let fit = PowerLawFit {
                alpha,
                xmin,
                n_tail: n,
                stderr: (alpha - 1.0) / (n as f64).sqrt(),
            };
            best = Some((ks, fit));
        }
    }
    best.map(|(_, f)| f).ok_or_else(|| {
        Error::Stats(format!(
            "no candidate xmin leaves {AUTO_MIN_TAIL} samples over two distinct values"
        ))
    })
}

/// Hurwitz zeta `Σ_{k>=0} (q + k)^-s` for `s > 1`, `q > 0`, by
/// Euler–Maclaurin summation.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    debug_assert!(s > 1.0 && q > 0.0);
    // B_2j / (2j)!
    const COEF: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
        1.0 / 74724249600.0,
        -3617.0 / 10670622842880000.0,
    ];
    const N: usize = 12;
    let mut sum = 0.0;
    for k in 0..N {
        sum += (q + k as f64).powf(-s);
    }
    let a = q + N as f64;
    sum += a.powf(1.0 - s) / (s - 1.0);
    sum += 0.5 * a.powf(-s);
    // rising factorial s (s+1) ... (s + 2j - 2) times a^(-s - 2j + 1)
    let mut fact = s;
    let mut pow = a.powf(-s - 1.0);
    let a2 = a * a;
    for (j, c) in COEF.iter().enumerate() {
        sum += c * fact * pow;
        let m = 2.0 * j as f64;
        fact *= (s + m + 1.0) * (s + m + 2.0);
        pow /= a2;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Zeta};

    #[test]
    fn powers_of_two() {
        let h = histogram(&[1, 1, 2, 4], 2.0).unwrap();
        let got: Vec<_> = h.bins.iter().map(|b| (b.lo, b.hi, b.count)).collect();
        assert_eq!(got, vec![(1.0, 2.0, 2), (2.0, 4.0, 1), (4.0, 8.0, 1)]);
    }

    #[test]
    fn densities_integrate_to_one() {
        let samples: Vec<u64> = (1..5000u64).map(|i| i * i % 977 + 1).collect();
        let h = histogram(&samples, default_bin_ratio()).unwrap();
        let mass: f64 = h.bins.iter().map(|b| b.density * (b.hi - b.lo)).sum();
        assert!((mass - 1.0).abs() < 1e-9);
        assert_eq!(h.total(), samples.len() as u64);
        assert!(h.bins.windows(2).all(|w| w[0].hi == w[1].lo && w[0].lo < w[1].lo));
    }

    #[test]
    fn single_value_fills_one_bin() {
        let h = histogram(&[7, 7, 7], default_bin_ratio()).unwrap();
        assert_eq!(h.bins.iter().filter(|b| b.count > 0).count(), 1);
        assert_eq!(h.total(), 3);
    }

    #[test]
    fn zeros_get_their_own_bin() {
        let h = histogram(&[0, 0, 1, 3], 2.0).unwrap();
        assert_eq!((h.bins[0].lo, h.bins[0].hi, h.bins[0].count), (0.0, 1.0, 2));
        let mass: f64 = h.bins.iter().map(|b| b.density * (b.hi - b.lo)).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_errors() {
        assert!(matches!(histogram(&[], 2.0), Err(Error::Data(_))));
        assert!(matches!(histogram(&[1], 1.0), Err(Error::Config(_))));
    }

    #[test]
    fn ccdf_examples() {
        assert_eq!(ccdf(&[1u64, 2, 2, 5]), vec![(1, 1.0), (2, 0.75), (5, 0.25)]);
        assert_eq!(ccdf(&[9u64]), vec![(9, 1.0)]);
        assert_eq!(ccdf(&[3.5f64, 0.5])[0], (0.5, 1.0));
    }

    #[test]
    fn ks_and_mean_from_tables() {
        let to_f = |t: Vec<(u64, f64)>| t.into_iter().map(|(v, p)| (v as f64, p)).collect::<Vec<_>>();
        let a = to_f(ccdf(&[1u64, 2, 2, 5]));
        let b = to_f(ccdf(&[1u64, 1, 1, 1]));
        assert_eq!(ks_statistic(&a, &a), 0.0);
        assert!((ks_statistic(&a, &b) - 0.75).abs() < 1e-12);
        assert!((ccdf_mean(&a) - 2.5).abs() < 1e-12);
        assert_eq!(ccdf_at(&a, 3.0), 0.25);
        assert_eq!(ccdf_at(&a, 6.0), 0.0);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy_bits([5]), 0.0);
        assert!((entropy_bits([2, 2, 2, 2]) - 2.0).abs() < 1e-12);
        assert!((entropy_bits([3, 1]) - 0.811_278_124_459_132_9).abs() < 1e-12);
    }

    #[test]
    fn zeta_against_known_values() {
        use std::f64::consts::PI;
        assert!((hurwitz_zeta(2.0, 1.0) - PI * PI / 6.0).abs() < 1e-13);
        assert!((hurwitz_zeta(4.0, 1.0) - PI.powi(4) / 90.0).abs() < 1e-13);
        assert!((hurwitz_zeta(3.0, 1.0) - 1.202_056_903_159_594_3).abs() < 1e-13);
        // ζ(2, 3) = π²/6 - 1 - 1/4
        assert!((hurwitz_zeta(2.0, 3.0) - (PI * PI / 6.0 - 1.25)).abs() < 1e-13);
    }

    #[test]
    fn zeta_against_direct_sum() {
        // brute force: partial sum plus the integral tail correction
        for &(s, q) in &[(1.75, 1.0), (2.1, 5.0), (1.3, 10.0), (3.5, 2.0)] {
            let terms = 2_000_000u64;
            let partial: f64 = (0..terms).map(|k| (q + k as f64).powf(-s)).sum();
            let end = q + terms as f64;
            let rest = end.powf(1.0 - s) / (s - 1.0) + 0.5 * end.powf(-s);
            let direct = partial + rest;
            let rel = (hurwitz_zeta(s, q) - direct).abs() / direct;
            assert!(rel < 1e-9, "s={s} q={q}: rel err {rel}");
        }
    }

    fn zeta_draws(alpha: f64, n: usize, seed: u64) -> Vec<u64> {
        let d = Zeta::new(alpha).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let x: f64 = d.sample(&mut rng);
                x.min(u64::MAX as f64) as u64
            })
            .collect()
    }

    #[test]
    fn recovers_exponent_from_unit_cutoff() {
        let fit = fit_power_law(&zeta_draws(2.1, 100_000, 1), 1).unwrap();
        assert!((fit.alpha - 2.1).abs() < 0.02, "{fit:?}");
        assert_eq!(fit.n_tail, 100_000);
        assert!((fit.stderr - (fit.alpha - 1.0) / 100_000f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn recovers_exponent_above_cutoff() {
        let fit = fit_power_law(&zeta_draws(1.75, 100_000, 2), 5).unwrap();
        assert!((fit.alpha - 1.75).abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn approximation_is_close_for_large_cutoff() {
        let draws = zeta_draws(1.9, 100_000, 3);
        let exact = fit_power_law(&draws, 10).unwrap();
        let approx = fit_power_law_approx(&draws, 10).unwrap();
        assert!((exact.alpha - approx.alpha).abs() < 0.02, "{exact:?} {approx:?}");
    }

    #[test]
    fn estimate_tightens_with_sample_size() {
        let errs: Vec<f64> = [1_000usize, 10_000, 100_000]
            .iter()
            .map(|&n| {
                // average absolute error over a few replicates
                (0..8)
                    .map(|rep| (fit_power_law(&zeta_draws(2.1, n, 100 + rep), 1).unwrap().alpha - 2.1).abs())
                    .sum::<f64>()
                    / 8.0
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        assert!(errs[2] < 0.01);
    }

    #[test]
    fn degenerate_and_short_tails_are_errors() {
        assert!(matches!(fit_power_law(&[4; 50], 1), Err(Error::Stats(_))));
        assert!(matches!(fit_power_law(&[1, 2, 3], 1), Err(Error::Stats(_))));
        assert!(matches!(fit_power_law(&[1, 2, 3, 50, 60], 10), Err(Error::Stats(_))));
        assert!(matches!(fit_power_law_approx(&[4; 50], 4), Err(Error::Stats(_))));
    }

    #[test]
    fn ccdf_slope_matches_histogram_slope() {
        // on log-log axes the density falls as x^-alpha and the CCDF as
        // x^-(alpha-1); compare their slopes over the well-populated range
        let alpha = 2.1;
        let draws = zeta_draws(alpha, 200_000, 9);
        let h = histogram(&draws, default_bin_ratio()).unwrap();
        let pts: Vec<(f64, f64)> = h
            .bins
            .iter()
            .filter(|b| b.lo >= 30.0 && b.count >= 50)
            .map(|b| (((b.lo * b.hi).sqrt()).ln(), b.density.ln()))
            .collect();
        let hist_slope = slope(&pts);

        // CCDF read at the same log-spaced points
        let table: Vec<(f64, f64)> = ccdf(&draws).into_iter().map(|(v, p)| (v as f64, p)).collect();
        let cpts: Vec<(f64, f64)> = h
            .bins
            .iter()
            .filter(|b| b.lo >= 30.0 && b.count >= 50)
            .map(|b| {
                let x = b.lo.ceil();
                (x.ln(), ccdf_at(&table, x).ln())
            })
            .collect();
        // derivative of log CCDF, shifted by one for the density
        let derived = slope(&cpts) - 1.0;
        assert!((hist_slope - derived).abs() < 0.1, "{hist_slope} vs {derived}");
    }

    fn slope(pts: &[(f64, f64)]) -> f64 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    }

    #[test]
    fn linear_bins_cover_samples() {
        let bins = linear_histogram(&[0.0, 0.3, 1.0, 2.49], 0.5).unwrap();
        assert_eq!(bins.len(), 5);
        assert_eq!(bins.iter().map(|b| b.count).sum::<u64>(), 4);
        assert_eq!(bins[2].count, 1);
    }

    #[test]
    fn auto_cutoff_skips_a_non_power_law_body() {
        // power-law tail above 40 under a flat body on [1, 40)
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut xs: Vec<u64> = zeta_draws(2.1, 400_000, 12).into_iter().filter(|&x| x >= 40).collect();
        let tail = xs.len();
        xs.extend((0..20 * tail).map(|_| rng.random_range(1..40u64)));
        let fixed = fit_power_law(&xs, 1).unwrap();
        let auto = fit_power_law_auto(&xs).unwrap();
        assert!((fixed.alpha - 2.1).abs() > 0.3);
        assert!((auto.alpha - 2.1).abs() < 0.1, "{auto:?}");
        assert!(auto.xmin >= 30, "{auto:?}");
        assert!(power_law_ks(&xs, &auto) <= power_law_ks(&xs, &fixed));
    }

    #[test]
    fn auto_cutoff_on_a_pure_power_law() {
        let xs = zeta_draws(2.5, 100_000, 13);
        let f = fit_power_law_auto(&xs).unwrap();
        assert!((f.alpha - 2.5).abs() < 0.1, "{f:?}");
        assert!(fit_power_law_auto(&[3; 100]).is_err());
    }
}
